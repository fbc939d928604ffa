import math

import numpy as np
import networkx as nx
import pytest
from hypothesis import given, strategies as st

from mdimlab.counting import (CurveOptions, EntropyCurve, closed_form_bounds, count_window, cylinder_subset,
                              distance_shells, entropy_curve, shift_lower_log, shift_upper_log, site_log_count,
                              window_bowen)
from mdimlab.groups import FolnerSchedule, GroupSpec, box
from mdimlab.metric import Alphabet, finite_alphabet, harmonic_set, interval_net, tie
from mdimlab.shift import ShiftSystem

BOXES = FolnerSchedule.boxes(GroupSpec(1))


def test_count_window_examples():
    one = ShiftSystem(Alphabet(np.array([0.0])))
    assert (count_window(one, box(1, 0, 3), 0.1).separated, count_window(one, box(1, 0, 3), 0.1).spanning) == (1, 1)
    two = ShiftSystem(finite_alphabet(2))
    assert count_window(two, box(1, 0, 0), 0.4).separated == 2


def test_count_window_matches_exhaustive_oracle():
    sys = ShiftSystem(interval_net(0.1))  # 11 points
    F = box(1, 0, 1)
    _, _, dist = window_bowen(sys, F)
    assert len(dist) == 121
    ok = dist > tie(0.3)
    np.fill_diagonal(ok, False)
    bb = count_window(sys, F, 0.3, "exact", exact_threshold=200)
    # 2^121 subsets are out of reach, so the independent oracle is networkx's exact max clique
    clique, size = nx.max_weight_clique(nx.from_numpy_array(ok.astype(int)), weight=None)
    assert bb.separated == size == len(clique)


def test_closed_form_bounds_examples():
    three = ShiftSystem(finite_alphabet(3, 0.5))
    b = closed_form_bounds(three, box(1, 0, 4), box(1, -1, 1), 0.3)
    assert b.lower == pytest.approx(math.log(3))
    one = ShiftSystem(Alphabet(np.array([0.0])))
    b = closed_form_bounds(one, box(1, 0, 4), box(1, -1, 1), 0.3)
    assert b.lower == b.upper == 0
    net = ShiftSystem(interval_net(0.01))
    assert net.total_weight == pytest.approx(3.0)
    b = closed_form_bounds(net, box(1, 0, 4), box(1, 0, 0), 0.1)
    assert b.upper == pytest.approx(math.log(math.ceil(1 / (2 * 0.1 / 6))), rel=0.05)


def test_distance_shells():
    assert distance_shells(box(1, 0, 4), 2) == [5, 2, 2]
    assert distance_shells(box(2, 0, 1), 1) == [4, 12]


def test_entropy_curve_examples():
    one = ShiftSystem(Alphabet(np.array([0.0])))
    c = entropy_curve(one, BOXES, [0.3, 0.1], [1, 2, 3, 50])
    assert all(r.normalized == 0 for r in c.rows)
    net17 = ShiftSystem(interval_net(1 / 16))
    c = entropy_curve(net17, BOXES, [0.05, 0.03], [1, 2, 3, 100, 1000])
    for r in c.rows:
        assert r.normalized >= math.log(17) - 1e-12
    # below the net gap every window configuration is separated from every other
    for r in c.rows:
        if r.method != "closed-form-lower":
            assert r.log_separated == pytest.approx(r.n * math.log(17))


def test_harmonic_curve_grows_like_half_log():
    h = ShiftSystem(harmonic_set(10 ** 5))
    c = entropy_curve(h, BOXES, [1e-3, 1e-4], [1, 2, 3, 1024])
    for eps in c.epsilons:
        tail = max(r for r in c.at(eps) if r.n == 1024)
        assert tail.normalized == pytest.approx(site_log_count(h.alphabet, eps), rel=0.05)
        assert 0.4 < tail.normalized / math.log(1 / eps) < 0.7


def test_csv_round_trip():
    sys = ShiftSystem(interval_net(0.05))
    c = entropy_curve(sys, BOXES, [0.3, 0.2 / 3, 0.2], [1, 2, 64], label="net")
    back = EntropyCurve.from_csv(c.to_csv(), "net")
    assert back.rows == c.rows
    assert EntropyCurve.from_json(c.to_json()).rows == c.rows


def test_cylinder_subset_counts():
    sys = ShiftSystem(finite_alphabet(3), window=box(1, -1, 1))
    F = box(1, 0, 0)
    assert len(cylinder_subset(sys, {}, F)) == 27
    assert len(cylinder_subset(sys, {0: 1}, F)) == 9
    with pytest.raises(ValueError):
        cylinder_subset(sys, {5: 1}, F)


def test_pinned_coordinate_fraction_vanishes():
    sys = ShiftSystem(finite_alphabet(3, 0.5))
    free = entropy_curve(sys, BOXES, [0.3], [2, 4, 8], opts=CurveOptions(enum_n_max=0))
    pinned = entropy_curve(sys, BOXES, [0.3], [2, 4, 8], opts=CurveOptions(enum_n_max=0, constraints=(((0,), 1),)))
    gaps = [f.normalized - p.normalized for f, p in zip(free.rows, pinned.rows)]
    assert all(g > 0 for g in gaps) and gaps[0] > gaps[1] > gaps[2]


def test_worker_count_does_not_change_rows():
    sys = ShiftSystem(interval_net(0.02))
    grid, ng = [0.3, 0.2, 0.1], [1, 2, 3, 64]
    assert entropy_curve(sys, BOXES, grid, ng, opts=CurveOptions(workers=1)).rows == \
        entropy_curve(sys, BOXES, grid, ng, opts=CurveOptions(workers=4)).rows


# -- properties -------------------------------------------------------------

@st.composite
def small_systems(draw):
    k = draw(st.integers(1, 4))
    spacing = draw(st.floats(0.1, 1.0))
    return ShiftSystem(finite_alphabet(k, spacing))


@given(small_systems(), st.floats(0.05, 0.9), st.integers(1, 3))
def test_sandwich_and_bounds(sys, eps, n):
    F = box(1, 0, n - 1)
    wc = count_window(sys, F, eps, "exact", exact_threshold=64)
    wc_half = count_window(sys, F, eps / 2, "exact", exact_threshold=64)
    assert wc.spanning <= wc.separated <= wc_half.spanning
    # the window model freezes sites outside F, so only the F shell of the closed form applies
    assert len(F) * site_log_count(sys.alphabet, eps) <= math.log(wc.separated) + 1e-9
    assert shift_lower_log(sys, F, eps) >= len(F) * site_log_count(sys.alphabet, eps) - 1e-9
    assert math.log(wc.spanning) <= shift_upper_log(sys, F, eps) + 1e-9
    b = closed_form_bounds(sys, F, box(1, -8, 8), eps)
    assert b.lower <= math.log(wc.separated) / len(F) + 1e-9


@given(small_systems(), st.integers(1, 3))
def test_counts_antitone_in_eps(sys, n):
    c = entropy_curve(sys, BOXES, [0.8, 0.5, 0.3, 0.1], [n])
    vals = [r.normalized for r in c.rows]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


@given(small_systems(), st.floats(0.05, 0.9))
def test_greedy_equals_exact_on_tiny_windows(sys, eps):
    F = box(1, 0, 0)
    g = count_window(sys, F, eps, "greedy")
    e = count_window(sys, F, eps, "exact")
    assert (g.separated, g.spanning) == (e.separated, e.spanning)
