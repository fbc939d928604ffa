import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab.counting import count_window, entropy_curve, window_bowen
from mdimlab.dimensions import mdim_estimate
from mdimlab.groups import FolnerSchedule, GroupSpec, box
from mdimlab.metric import finite_alphabet, geometric_grid, interval_net, tie
from mdimlab.pressure import Potential, birkhoff_sum, potential_from_json, pressure_count, pressure_mdim
from mdimlab.shift import ShiftSystem

BOXES = FolnerSchedule.boxes(GroupSpec(1))
NET = ShiftSystem(interval_net(0.25))
THREE = ShiftSystem(finite_alphabet(3, 0.5))
PAIR = box(1, 0, 1)


def brute_pressure(sys, F, f, eps):
    """log of the best weighted sum over every separated subset."""
    enum, arr, dist = window_bowen(sys, F)
    cols = [enum.sites.index(g) for g in F]
    logw = f.table(sys)[arr[:, cols]].sum(axis=1) + f.c * len(F)
    n = len(arr)
    best = -math.inf
    for k in range(1, n + 1):
        for sub in itertools.combinations(range(n), k):
            if all(dist[i, j] > tie(eps) for i, j in itertools.combinations(sub, 2)):
                best = max(best, float(np.logaddexp.reduce(logw[list(sub)])))
    return best


def test_birkhoff_examples():
    x = NET.config({0: 2, 1: 1})
    assert birkhoff_sum(NET, PAIR, Potential.constant(0), x) == 0
    assert birkhoff_sum(NET, box(1, 0, 3), Potential.constant(0.7), x) == pytest.approx(2.8)
    ident = Potential.coordinate(NET.alphabet.points.ravel())
    assert birkhoff_sum(NET, PAIR, ident, x) == pytest.approx(0.75)


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.6])
def test_zero_potential_is_log_separated(eps):
    s = count_window(NET, PAIR, eps).separated
    assert pressure_count(NET, PAIR, Potential.constant(0), eps) == pytest.approx(math.log(s), abs=1e-12)


@pytest.mark.parametrize("mode", ["auto", "greedy", "exact"])
def test_constant_shift_is_exact(mode):
    f = Potential.coordinate([0.2, -0.4, 1.0])
    for c in (0.5, -1.3):
        base = pressure_count(THREE, PAIR, f, 0.3, mode)
        assert abs(pressure_count(THREE, PAIR, f + Potential.constant(c), 0.3, mode) - base - 2 * c) <= 1e-12


phis = st.lists(st.floats(-2, 2), min_size=3, max_size=3)


@given(phis, st.floats(0.05, 1.0))
def test_matches_subset_oracle(phi, eps):
    f = Potential.coordinate(phi)
    assert pressure_count(THREE, PAIR, f, eps, "exact") == pytest.approx(brute_pressure(THREE, PAIR, f, eps),
                                                                        abs=1e-9)


@given(phis, st.lists(st.floats(0, 1), min_size=3, max_size=3), st.floats(0.05, 1.0))
def test_monotone_in_potential(phi, bump, eps):
    f = Potential.coordinate(phi)
    h = Potential.coordinate([a + b for a, b in zip(phi, bump)])
    assert pressure_count(THREE, PAIR, f, eps, "exact") <= pressure_count(THREE, PAIR, h, eps, "exact") + 1e-12


@given(phis, phis, st.floats(0.05, 1.0))
def test_lipschitz_in_potential(a, b, eps):
    f, h = Potential.coordinate(a), Potential.coordinate(b)
    gap = max(abs(x - y) for x, y in zip(a, b))
    diff = pressure_count(THREE, PAIR, f, eps, "exact") - pressure_count(THREE, PAIR, h, eps, "exact")
    assert abs(diff) <= len(PAIR) * gap + 1e-9


@given(phis, phis, st.floats(0, 1), st.floats(0.05, 1.0))
def test_convex_in_potential(a, b, p, eps):
    f, h = Potential.coordinate(a), Potential.coordinate(b)
    mix = f.scaled(p) + h.scaled(1 - p)
    lhs = pressure_count(THREE, PAIR, mix, eps, "exact")
    rhs = p * pressure_count(THREE, PAIR, f, eps, "exact") + (1 - p) * pressure_count(THREE, PAIR, h, eps, "exact")
    assert lhs <= rhs + 1e-9


@pytest.fixture(scope="module")
def net_setup():
    grid = geometric_grid(0.3, 0.1 ** 0.5, 6)
    sys = ShiftSystem(interval_net(grid[-1] / 4))
    ng = (1, 2, 3, 1024, 4096)
    plain = mdim_estimate(entropy_curve(sys, BOXES, grid, ng))
    return sys, grid, ng, plain


def test_pressure_mdim_zero_and_constant(net_setup):
    sys, grid, ng, plain = net_setup
    zero = pressure_mdim(sys, BOXES, Potential.constant(0), grid, ng)
    assert zero.upper == pytest.approx(plain.upper, abs=1e-12)
    shifted = pressure_mdim(sys, BOXES, Potential.constant(0.5), grid, ng)
    assert abs(shifted.upper - plain.upper - 0.5) <= 0.1


def test_pressure_mdim_norm_bound(net_setup):
    sys, grid, ng, plain = net_setup
    phi = np.linspace(-0.3, 0.2, len(sys.alphabet))
    f = Potential.coordinate(phi)
    est = pressure_mdim(sys, BOXES, f, grid, ng)
    b = f.sup_norm(sys)
    assert plain.upper - b - 0.1 <= est.upper <= plain.upper + b + 0.1


def test_potential_json_and_errors():
    for f in (Potential.constant(1.5), Potential.coordinate([0.1, 0.2]),
              Potential.constant(1.0) + Potential.coordinate([0.0, 2.0])):
        g = potential_from_json(f.to_json())
        assert (g.c, g.phi) == (f.c, f.phi)
    with pytest.raises(ValueError, match="potential.kind"):
        potential_from_json({"kind": "quadratic"})
    with pytest.raises(ValueError, match="potential.phi"):
        potential_from_json({"kind": "sum", "c": 1})
    with pytest.raises(ValueError):
        Potential.coordinate([1.0]).table(THREE)
