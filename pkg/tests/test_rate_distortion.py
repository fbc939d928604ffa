import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdimlab.groups import box
from mdimlab.measures import MeasureSpec
from mdimlab.metric import finite_alphabet, interval_net
from mdimlab.rate_distortion import (JointDistribution, RDProblem, binary_hamming_rate, blahut_arimoto, entropy,
                                     inequality_csv, mutual_information, rate_for_target, rd_at_epsilon,
                                     rd_inequality_suite, results_csv, window_model)
from mdimlab.shift import ShiftSystem

TWO = ShiftSystem(finite_alphabet(2))
HAMMING = np.array([[0.0, 1.0], [1.0, 0.0]])


def direct_mi(p):
    p = np.asarray(p, float)
    px, py = p.sum(1), p.sum(0)
    return sum(p[i, j] * math.log(p[i, j] / (px[i] * py[j]))
               for i in range(p.shape[0]) for j in range(p.shape[1]) if p[i, j] > 0)


def test_mutual_information_examples():
    assert mutual_information(JointDistribution(np.eye(4) / 4)) == pytest.approx(math.log(4), abs=1e-12)
    fixture = JointDistribution(np.array([[0.4, 0.1], [0.1, 0.4]]))
    assert mutual_information(fixture) == pytest.approx(0.8 * math.log(1.6) + 0.2 * math.log(0.4), abs=1e-12)
    assert abs(mutual_information(fixture) - 0.192745) <= 1e-6
    assert mutual_information(JointDistribution.product([0.2, 0.3, 0.5], [0.1, 0.9])) <= 1e-12
    with pytest.raises(ValueError):
        JointDistribution(np.array([[0.5, 0.6]]))


joints = st.integers(0, 2 ** 20).map(
    lambda s: np.random.default_rng(s).dirichlet(np.full(12, 0.5)).reshape(3, 4))


@given(joints)
def test_mutual_information_properties(p):
    v = mutual_information(JointDistribution(p))
    assert v >= 0
    assert v == pytest.approx(mutual_information(JointDistribution(p.T)), abs=1e-12)
    assert v == pytest.approx(direct_mi(p), abs=1e-12)
    assert mutual_information(JointDistribution.product(p.sum(1), p.sum(0))) <= 1e-12


@pytest.mark.parametrize("D", [0.05, 0.1, 0.2, 0.3, 0.4])
def test_binary_hamming_oracle(D):
    res = rate_for_target(RDProblem(np.array([0.5, 0.5]), HAMMING, target=D))
    assert abs(res.rate - binary_hamming_rate(D)) <= 1e-4
    assert res.achieved_distortion <= D + 1e-12


def test_binary_hamming_limits():
    assert binary_hamming_rate(0.1) == pytest.approx(0.3680642, abs=1e-6)
    near = rate_for_target(RDProblem(np.array([0.5, 0.5]), HAMMING, target=1e-9))
    assert near.rate == pytest.approx(math.log(2), abs=1e-6)
    loose = rate_for_target(RDProblem(np.array([0.5, 0.5]), HAMMING, target=1.0))
    assert loose.rate == 0
    with pytest.raises(ValueError, match="below the attainable"):
        rate_for_target(RDProblem(np.array([0.5, 0.5]), HAMMING + 0.1, target=0.05))


def test_blahut_arimoto_sweep_is_monotone():
    rng = np.random.default_rng(4)
    src = rng.dirichlet(np.ones(6))
    rho = rng.random((6, 6))
    prob = RDProblem(src, rho)
    res = [blahut_arimoto(prob, b) for b in np.geomspace(0.01, 200, 25)]
    for a, b in zip(res, res[1:]):
        assert b.achieved_distortion <= a.achieved_distortion + 1e-9
        assert b.rate >= a.rate - 1e-9
    for r in res:
        assert 0 <= r.rate <= entropy(src) + 1e-12
        assert r.converged
    with pytest.raises(ValueError):
        blahut_arimoto(prob, -1.0)


def test_rd_examples():
    F = box(1, 0, 1)
    x = TWO.config({0: 1})
    for eps in (0.05, 0.3):
        assert rd_at_epsilon(MeasureSpec.dirac(x), TWO, F, eps, p=1).rate == 0
        assert rd_at_epsilon(MeasureSpec.dirac(x), TWO, F, eps, s=0).rate == 0
    uni = MeasureSpec.uniform()
    assert rd_at_epsilon(uni, TWO, F, 1e-4, p=1).rate / len(F) == pytest.approx(math.log(2), abs=1e-3)
    net = ShiftSystem(interval_net(0.25))
    big = 2 * net.alphabet.diameter * net.total_weight
    assert rd_at_epsilon(uni, net, box(1, 0, 0), big, p=1).rate == 0
    with pytest.raises(ValueError):
        rd_at_epsilon(uni, TWO, F, 0.1)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2, 0.3])
def test_holder_ordering(eps):
    net = ShiftSystem(interval_net(0.25))
    F = box(1, 0, 1)
    model = window_model(MeasureSpec.uniform(), net, F)
    rates = [rd_at_epsilon(MeasureSpec.uniform(), net, F, eps, p=p, model=model).rate for p in (1, 2, 4)]
    assert rates[0] <= rates[1] + 1e-6 <= rates[2] + 2e-6


def test_inequality_suite():
    F = box(1, 0, 1)
    x = TWO.config({0: 1})
    rows = rd_inequality_suite(MeasureSpec.dirac(x), TWO, F, [0.1, 0.3])
    assert all(r.passed for r in rows)
    assert all(r.r_l1_2eps == r.r_l2_2eps == r.r_linf == r.katok == 0 for r in rows)
    rows = rd_inequality_suite(MeasureSpec.uniform(), TWO, F, [0.05, 0.1, 0.2, 0.3])
    assert all(r.passed for r in rows)
    rows = rd_inequality_suite(MeasureSpec.uniform(), ShiftSystem(interval_net(0.25)), F, [0.1, 0.2])
    assert all(r.r_linf <= r.katok_delta0 + 1e-6 for r in rows)
    text = inequality_csv(rows)
    assert text.splitlines()[0] == "epsilon,p_or_s,rate"
    assert len(text.splitlines()) == 1 + 6 * len(rows)


def test_results_csv():
    res = rate_for_target(RDProblem(np.array([0.5, 0.5]), HAMMING, target=0.2))
    lines = results_csv([(0.2, "p=1", res)]).splitlines()
    assert lines[0].split(",")[:3] == ["epsilon", "p_or_s", "rate"]
    assert float(lines[1].split(",")[2]) == res.rate
