import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab.counting import CurveRow, EntropyCurve, entropy_curve
from mdimlab.dimensions import (entdim_estimate, local_mdim_estimate, mdim_estimate, power_rule_experiment,
                                product_experiment, ratios_from_stats)
from mdimlab.groups import FolnerSchedule, GroupSpec
from mdimlab.metric import Alphabet, finite_alphabet, geometric_grid, harmonic_set, interval_net
from mdimlab.shift import ShiftSystem, coordinate_scaling

BOXES = FolnerSchedule.boxes(GroupSpec(1))
NG = (1, 2, 3, 256, 1024, 4096)
FINE = geometric_grid(0.3, 0.01, 8)  # down to 3e-15, where log 4 / log(1/eps) < 0.05
UNIT_GRID = geometric_grid(0.3, 0.1 ** 0.25, 17)


@pytest.fixture(scope="module")
def unit():
    return ShiftSystem(interval_net(UNIT_GRID[-1] / 4), label="[0,1]-net")


@pytest.fixture(scope="module")
def unit_curve(unit):
    return entropy_curve(unit, BOXES, UNIT_GRID, NG)


def test_finite_alphabet_has_zero_mdim():
    two = ShiftSystem(finite_alphabet(2))
    est = mdim_estimate(entropy_curve(two, BOXES, FINE, NG))
    assert 0 <= est.lower <= est.upper <= 0.1


def test_unit_interval_shift(unit_curve):
    est = mdim_estimate(unit_curve)
    assert 0.9 <= est.lower <= est.upper <= 1.1
    assert "fit window" in est.diagnostics


def test_harmonic_shift():
    grid = geometric_grid(0.1, 0.1 ** 0.25, 21)
    est = mdim_estimate(entropy_curve(ShiftSystem(harmonic_set(10 ** 6)), BOXES, grid, NG))
    assert abs(est.upper - 0.5) <= 0.07 and abs(est.lower - 0.5) <= 0.07


def test_entdim_of_unit_interval_contains_one(unit_curve):
    ed = entdim_estimate(unit_curve, [0.2, 0.4, 0.6, 0.8, 0.9, 1.0, 1.1, 1.2, 1.4, 1.6, 1.8, 2.0])
    assert ed.transition_lo <= 1.0 <= ed.transition_hi


def test_entdim_zero_entropy_system():
    one = ShiftSystem(Alphabet(np.array([0.0])))
    s_grid = [0.1, 0.5, 1.0]
    ed = entdim_estimate(entropy_curve(one, BOXES, FINE, (1, 2, 64)), s_grid)
    assert ed.transition_hi <= s_grid[0]
    two = ShiftSystem(finite_alphabet(2))
    ed = entdim_estimate(entropy_curve(two, BOXES, FINE, (1, 2, 64)), s_grid)
    assert ed.transition_lo == 0 and list(ed.values_at_s) == sorted(ed.values_at_s, reverse=True)


def test_entdim_validation(unit_curve):
    with pytest.raises(ValueError):
        entdim_estimate(unit_curve, [0.5, 0.4])
    with pytest.raises(ValueError):
        entdim_estimate(unit_curve, [0.5, 2.5])


def test_power_rule(unit):
    full, sub, ratio = power_rule_experiment(unit, 1, UNIT_GRID, NG)
    assert ratio == 1.0 and full.per_eps == sub.per_eps
    _, _, r2 = power_rule_experiment(unit, 2, UNIT_GRID, NG)
    assert abs(r2 - 2) <= 0.2


def test_product_experiment(unit):
    one = ShiftSystem(Alphabet(np.array([0.0])))
    s, sq = product_experiment(one, FINE, (1, 2, 64))
    assert (s.upper, sq.upper) == (0.0, 0.0)
    two = ShiftSystem(finite_alphabet(2))
    s, sq = product_experiment(two, FINE, NG)
    assert s.upper <= 0.1 and sq.upper <= 0.1
    grid = geometric_grid(0.3, 0.1 ** (1 / 3), 10)
    s, sq = product_experiment(ShiftSystem(interval_net(grid[-1] / 4)), grid, NG)
    assert abs(sq.upper - 2 * s.upper) <= 0.2 and abs(s.upper - 1) <= 0.1


def test_local_mdim(unit, unit_curve):
    whole = mdim_estimate(unit_curve)
    assert local_mdim_estimate(unit, {}, UNIT_GRID, NG).upper == whole.upper
    pinned = local_mdim_estimate(unit, {0: 3}, UNIT_GRID, NG)
    assert abs(pinned.upper - whole.upper) <= 0.15
    assert pinned.upper <= whole.upper + 1e-9
    two = ShiftSystem(finite_alphabet(2))
    assert local_mdim_estimate(two, {0: 1}, FINE, NG).upper <= 0.1


def test_grid_requirements():
    rows = tuple(CurveRow(e, 1, 1, 1.0, 1.0, "exact") for e in (0.3, 0.2, 0.1))
    with pytest.raises(ValueError):
        mdim_estimate(EntropyCurve(rows))
    with pytest.raises(ValueError):
        ratios_from_stats([(0.5 / (k + 1), 1, 1) for k in range(6)])


def test_scaling_invariance():
    sys = ShiftSystem(finite_alphabet(5, 0.2))
    grid = geometric_grid(0.15, 0.5, 7)
    base = entropy_curve(sys, BOXES, grid, (1, 2, 3, 100))
    scaled = entropy_curve(coordinate_scaling(sys, 2), BOXES, [2 * e for e in grid], (1, 2, 3, 100))
    for a, b in zip(base.rows, scaled.rows):
        assert (a.log_separated, a.log_spanning, a.method) == (b.log_separated, b.log_spanning, b.method)


@st.composite
def curves(draw):
    grid = geometric_grid(draw(st.floats(0.05, 0.3)), draw(st.floats(0.2, 0.8)), draw(st.integers(6, 12)))
    rows = []
    for e in grid:
        for n in (1, 2, 3):
            v = draw(st.floats(0, 20))
            rows.append(CurveRow(e, n, n, v * n, v * n, "exact"))
    return EntropyCurve(tuple(rows))


@given(curves(), st.floats(0.1, 1.9), st.floats(0.01, 0.1))
def test_monotone_in_s_and_ordered(curve, s, ds):
    a, b = mdim_estimate(curve, s), mdim_estimate(curve, s + ds)
    assert b.upper <= a.upper + 1e-12
    assert a.lower <= a.upper
