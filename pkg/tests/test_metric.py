import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab import packing
from mdimlab.metric import (Alphabet, alphabet_from_json, alphabet_to_json, box_dimension, check_grid,
                            check_metric_axioms, entdim_scaling, finite_alphabet, generate_entdim_set,
                            geometric_grid, harmonic_set, interval_net, is_tame, max_separated,
                            min_spanning, power, tame_growth_profile, tie)

four = Alphabet(np.array([0.0, 0.3, 0.6, 0.9]))


def test_pairwise_distance_examples():
    a = Alphabet(np.array([0.0, 0.5, 1.0]))
    assert a.pairwise_distance(1, 1) == 0
    assert a.pairwise_distance(0, 2) == 1
    b = Alphabet(np.array([[0.0, 0.0], [0.3, 0.7]]), "supmd")
    assert b.pairwise_distance(0, 1) == pytest.approx(0.7)
    with pytest.raises(IndexError):
        a.pairwise_distance(0, 3)


@pytest.mark.parametrize("mode", ["exact", "greedy", "auto"])
def test_separated_examples(mode):
    assert max_separated(Alphabet(np.array([0.0])), None, 0.1, mode).count == 1
    assert max_separated(four, None, 0.25, mode).count == 4


def test_separated_tie_and_oracle():
    assert max_separated(four, None, 0.35, "exact").count == 2
    # 0.3-gaps count as equal to eps, so they are not separated at eps=0.3
    assert max_separated(four, None, 0.3, "exact").count == 2


def test_spanning_examples():
    assert min_spanning(Alphabet(np.array([0.0])), None, 0.1, "exact").count == 1
    assert min_spanning(four, None, 0.3, "exact").count == 2
    assert min_spanning(four, None, four.diameter, "exact").count == 1


def test_matrix_alphabet_counts():
    mat = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    a = Alphabet(np.arange(3), "matrix", matrix=mat)
    assert max_separated(a, None, 0.5, "exact").count == 3
    assert max_separated(a, None, 1.0, "exact").count == 2
    assert min_spanning(a, None, 1.0, "exact").count == 1


def test_box_dimension_examples():
    five = Alphabet(np.array([0.0, 0.1, 0.4, 0.45, 0.9]))
    est = box_dimension(five, geometric_grid(0.1, 0.1 ** 0.5, 7))
    assert abs(est.lsq_slope) <= 0.05
    # the ratio proxy log 5 / log(1/eps) only falls below 0.05 once eps is far smaller
    assert box_dimension(five, geometric_grid(0.1, 0.1 ** 6, 7)).upper_slope <= 0.05
    net = interval_net(1e-5)
    est = box_dimension(net, [0.1 * 2.0 ** -j for j in range(11)])
    # r = ceil(1/(2 eps)) puts a log 2 / log(1/eps) bias on the ratio; the slope is unbiased
    assert abs(est.lsq_slope - 1) <= 0.05
    assert 0.9 <= est.lower_slope <= est.upper_slope <= 1.0
    est = box_dimension(harmonic_set(10 ** 5), geometric_grid(0.1, 0.1 ** (1 / 12), 49))
    assert 0.45 <= est.lower_slope <= est.upper_slope <= 0.55


def test_box_dimension_is_deterministic():
    grid = geometric_grid(0.1, 0.5, 8)
    a, b = box_dimension(harmonic_set(5000), grid), box_dimension(harmonic_set(5000), grid)
    assert a.curve == b.curve


def test_grid_validation():
    with pytest.raises(ValueError):
        check_grid([0.1, 0.05])
    with pytest.raises(ValueError):
        check_grid([0.1, 0.2, 0.05, 0.01, 0.005, 0.001])
    with pytest.raises(ValueError):
        box_dimension(interval_net(0.01), geometric_grid(0.1, 0.5, 8))  # net coarser than eps_min/4
    with pytest.raises(ValueError):
        geometric_grid(0.1, 1.5, 4)


def test_tame_growth():
    grid = geometric_grid(0.1, 0.5, 12)
    assert is_tame(tame_growth_profile(finite_alphabet(3, 0.5), 0.5, grid))
    prof = tame_growth_profile(interval_net(grid[-1] / 4), 0.5, grid)
    assert is_tame(prof) and prof[-1][1] < 0.2
    X = generate_entdim_set(0.5, 1.0, k_max=8)
    lo, hi = X.meta["valid_window"]
    g = geometric_grid(hi, (lo / hi) ** (1 / 11), 12)
    prof = tame_growth_profile(X, 0.9, g)
    assert prof[-1][1] < 1e-20
    with pytest.raises(ValueError):
        tame_growth_profile(X, 0.0, g)


def test_entdim_set_construction():
    X = generate_entdim_set(0.5, 1.0, k_max=6)
    assert X.meta["cluster_sizes"][6] == 403 == math.floor(math.exp(6))
    with pytest.raises(ValueError):
        generate_entdim_set(1.5)
    with pytest.raises(ValueError):
        generate_entdim_set(0.5, 1.0, k_max=14, cap=1000)


def test_entdim_set_scaling_and_box_dimension():
    X = generate_entdim_set(0.5, 1.0, k_max=8)
    lo, hi = X.meta["valid_window"]
    g = geometric_grid(hi, (lo / hi) ** (1 / 17), 18)
    sc, prof = entdim_scaling(X, 0.5, g)
    assert abs(sc - 1) < 0.15 and len(prof) == 18
    # the box-dimension proxy decays like (log 1/eps)^(-1/2), so it needs the deep clusters
    X = generate_entdim_set(0.5, 1.0, k_max=12, cap=10 ** 6)
    lo, hi = X.meta["valid_window"]
    assert box_dimension(X, geometric_grid(hi, (lo / hi) ** (1 / 11), 12)).upper_slope <= 0.1


def test_products_and_json():
    sq = power(interval_net(0.25), 2)
    assert len(sq) == 25 and sq.metric_kind == "supmd"
    assert max_separated(sq, None, 0.2).count == 25
    assert max_separated(sq, None, 0.3).count == 9
    doc = alphabet_to_json(finite_alphabet(3, 0.5))
    back = alphabet_from_json(doc)
    assert np.array_equal(back.points, finite_alphabet(3, 0.5).points)
    assert len(alphabet_from_json({"finite": {"k": 4}})) == 4
    assert len(alphabet_from_json({"net": {"resolution": 0.1}})) == 11
    with pytest.raises(ValueError):
        alphabet_from_json({"metric": "cosine", "points": [0]})
    with pytest.raises(ValueError):
        alphabet_from_json({"metric": "matrix", "points": [0, 1]})


def test_metric_axioms_on_constructors():
    for a in (harmonic_set(50), interval_net(0.1, 2), finite_alphabet(4)):
        assert check_metric_axioms(a)


# -- properties -------------------------------------------------------------

clouds_1d = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=12)
eps_st = st.floats(0.01, 0.6)


@st.composite
def clouds(draw):
    kind = draw(st.sampled_from(["abs1d", "supmd", "matrix"]))
    n = draw(st.integers(1, 10))
    seed = draw(st.integers(0, 2 ** 16))
    rng = np.random.default_rng(seed)
    if kind == "abs1d":
        return Alphabet(rng.random(n))
    if kind == "supmd":
        return Alphabet(rng.random((n, 2)), "supmd")
    p = rng.random((n, 3))
    return Alphabet(np.arange(n), "matrix", matrix=np.sqrt(((p[:, None] - p[None]) ** 2).sum(-1)))


@given(clouds(), eps_st)
def test_count_chain(a, eps):
    r = min_spanning(a, None, eps, "exact").count
    s = max_separated(a, None, eps, "exact").count
    assert r <= s <= min_spanning(a, None, eps / 2, "exact").count


@given(clouds(), eps_st)
def test_greedy_separated_set_spans(a, eps):
    members = max_separated(a, None, eps, "greedy").members
    d = a.distance_matrix()
    assert (d[:, list(members)] <= tie(eps)).any(axis=1).all()


@given(clouds(), eps_st)
def test_exact_counts_match_exhaustive_oracle(a, eps):
    d = a.distance_matrix()
    ok = d > tie(eps)
    np.fill_diagonal(ok, False)
    assert max_separated(a, None, eps, "exact").count == round(
        packing.exhaustive_packing(packing.bitsets_from_bool(ok))[0])
    assert min_spanning(a, None, eps, "exact").count == len(
        packing.exhaustive_cover(packing.bitsets_from_bool(d <= tie(eps))))


@given(clouds(), eps_st, eps_st)
def test_counts_antitone_in_eps(a, e1, e2):
    e1, e2 = sorted((e1, e2))
    assert max_separated(a, None, e1, "exact").count >= max_separated(a, None, e2, "exact").count
    assert min_spanning(a, None, e1, "exact").count >= min_spanning(a, None, e2, "exact").count


@given(clouds_1d, eps_st)
def test_sweeps_match_branch_and_bound(xs, eps):
    a = Alphabet(np.array(xs))
    d = a.distance_matrix()
    ok = d > tie(eps)
    np.fill_diagonal(ok, False)
    assert max_separated(a, None, eps).count == round(packing.max_weight_packing(packing.bitsets_from_bool(ok))[0])
    assert min_spanning(a, None, eps).count == len(packing.min_cover(packing.bitsets_from_bool(d <= tie(eps))))
