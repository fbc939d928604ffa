"""Named verification suites shared by ``mdimlab verify`` and the acceptance tests.

Each check compares one measured number against a band. Payloads hold no timings,
so repeated runs (at any worker count) serialise to identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import packing
from .counting import CurveOptions, entropy_curve
from .dimensions import entdim_estimate, mdim_estimate, power_rule_experiment, product_experiment
from .groups import FolnerSchedule, GroupSpec, box
from .measures import (ConvexCombination, MeasureSpec, katok_cover_count, katok_entropy,
                       measure_mdim_along_family)
from .metric import (Alphabet, box_dimension, entdim_scaling, finite_alphabet, generate_entdim_set,
                     geometric_grid, harmonic_set, interval_net, max_separated, min_spanning, tie)
from .pressure import Potential, pressure_count, pressure_mdim
from .rate_distortion import (JointDistribution, RDProblem, binary_hamming_rate, mutual_information,
                              rate_for_target, rd_inequality_suite)
from .shift import ShiftSystem


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    measured: float
    lo: float
    hi: float

    @property
    def passed(self) -> bool:
        return bool(self.lo <= self.measured <= self.hi)

    def to_json(self) -> dict:
        lo = self.lo if math.isfinite(self.lo) else None
        hi = self.hi if math.isfinite(self.hi) else None
        return {"criterion": self.criterion, "name": self.name, "measured": self.measured,
                "expected": [lo, hi], "passed": self.passed}


def band(criterion: int, name: str, measured: float, lo: float, hi: float, scale: float = 1.0) -> Check:
    """Interval check; ``scale`` widens the band about its midpoint (one-sided bounds stay put)."""
    if scale != 1 and math.isfinite(lo) and math.isfinite(hi):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        lo, hi = mid - scale * half, mid + scale * half
    return Check(criterion, name, float(measured), lo, hi)


def at_most(criterion: int, name: str, measured: float, bound: float, tol: float = 0.0,
            scale: float = 1.0) -> Check:
    return Check(criterion, name, float(measured), -math.inf, bound + scale * tol)


def count_ok(criterion: int, name: str, violations: int) -> Check:
    return Check(criterion, name, float(violations), 0.0, 0.0)


BOXES = FolnerSchedule.boxes(GroupSpec(1))
N_GRID = (1, 2, 3, 4096, 16384, 65536)


def unit_net_system() -> tuple[ShiftSystem, list[float]]:
    grid = geometric_grid(0.3, 0.1 ** 0.25, 17)
    return ShiftSystem(interval_net(grid[-1] / 4), label="[0,1]-net"), grid


# -- criteria -----------------------------------------------------------------

def c01_harmonic_boxdim(scale=1.0, workers=1):
    grid = geometric_grid(0.1, 0.1 ** (1 / 12), 49)
    est = box_dimension(harmonic_set(10 ** 5), grid)
    return [band(1, "harmonic box dimension (upper)", est.upper_slope, 0.45, 0.55, scale),
            band(1, "harmonic box dimension (lower)", est.lower_slope, 0.45, 0.55, scale)]


def c02_unit_mdim(scale=1.0, workers=1):
    sys, grid = unit_net_system()
    est = mdim_estimate(entropy_curve(sys, BOXES, grid, N_GRID, opts=CurveOptions(workers=workers)))
    return [band(2, "[0,1]-net mdim (upper)", est.upper, 0.9, 1.1, scale),
            band(2, "[0,1]-net mdim (lower)", est.lower, 0.9, 1.1, scale)]


def c03_harmonic_mdim(scale=1.0, workers=1):
    grid = geometric_grid(0.1, 0.1 ** 0.25, 21)
    sys = ShiftSystem(harmonic_set(10 ** 6), label="harmonic")
    est = mdim_estimate(entropy_curve(sys, BOXES, grid, N_GRID, opts=CurveOptions(workers=workers)))
    return [band(3, "harmonic-alphabet mdim (upper)", est.upper, 0.43, 0.57, scale),
            band(3, "harmonic-alphabet mdim (lower)", est.lower, 0.43, 0.57, scale)]


def c04_power_rule(scale=1.0, workers=1):
    sys, grid = unit_net_system()
    opts = CurveOptions(workers=workers)
    out = []
    for m, lo, hi in ((2, 1.8, 2.2), (3, 2.64, 3.36)):
        _, _, ratio = power_rule_experiment(sys, m, grid, N_GRID, opts)
        out.append(band(4, f"power rule ratio m={m}", ratio, lo, hi, scale))
    return out


def c05_product(scale=1.0, workers=1):
    grid = geometric_grid(0.3, 0.1 ** (1 / 3), 10)
    sys = ShiftSystem(interval_net(grid[-1] / 4), label="[0,1]-net")
    single, squared = product_experiment(sys, grid, N_GRID, CurveOptions(workers=workers))
    return [band(5, "self-product mdim", squared.upper, 2 * single.upper - 0.2, 2 * single.upper + 0.2, scale)]


def entdim_fixture():
    X = generate_entdim_set(0.5, 1.0, k_max=13, cap=1_000_000)
    lo, _ = X.meta["valid_window"]
    grid = [float(math.exp(-L)) for L in np.linspace(1.5, math.log(1 / lo), 24)]
    return X, grid


S_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.5, 2.0)


def c06_c07_entdim(scale=1.0, workers=1):
    X, grid = entdim_fixture()
    curve = entropy_curve(ShiftSystem(X, label="entdim"), BOXES, grid, N_GRID,
                          opts=CurveOptions(workers=workers))
    ed = entdim_estimate(curve, S_GRID)
    overlap = min(ed.transition_hi, 0.6) - max(ed.transition_lo, 0.4)
    sc, _ = entdim_scaling(X, 0.5, grid)
    return [Check(6, "entdim transition overlaps [0.4, 0.6]", overlap, 0.0, math.inf),
            at_most(6, "entdim set plain mdim", mdim_estimate(curve).upper, 0.1),
            band(7, "entdim set scaling ratio at s=0.5", sc, 0.85, 1.15, scale)]


def _lebesgue(eps: float) -> ConvexCombination:
    return ConvexCombination(((1.0, MeasureSpec.uniform()),))


def c08_katok_lebesgue(scale=1.0, workers=1):
    grid = geometric_grid(0.3, 0.1 ** (1 / 3), 16)
    n_grid = (1, 2, 3, 1024, 4096, 16384)
    out = []
    for m in (1, 2):
        sys = ShiftSystem(interval_net(grid[-1] / 4, m), label=f"[0,1]^{m}-net")
        est = measure_mdim_along_family(_lebesgue, sys, BOXES, grid, n_grid,
                                        opts=CurveOptions(workers=workers))
        worst = min(lo - m * math.log(1 / (2 * e)) for e, _, lo in est.per_eps)
        out.append(Check(8, f"Katok minus m*log(1/2eps), m={m}", worst, -0.5 * scale, math.inf))
        out.append(band(8, f"quantized-Lebesgue family ratio m={m}", est.upper, m - 0.15, m + 0.15, scale))
    return out


def random_clouds(count: int = 200, seed: int = 0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(2, 13))
        kind = i % 3
        if kind == 0:
            yield Alphabet(rng.random(n), "abs1d"), float(rng.uniform(0.05, 0.5))
        elif kind == 1:
            yield Alphabet(rng.random((n, 2)), "supmd"), float(rng.uniform(0.05, 0.5))
        else:
            pts = rng.random((n, 3))
            mat = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
            yield Alphabet(np.arange(n), "matrix", matrix=mat), float(rng.uniform(0.05, 0.8))


def c09a_count_chain(scale=1.0, workers=1):
    bad = 0
    for a, eps in random_clouds():
        r = min_spanning(a, None, eps, "exact").count
        s = max_separated(a, None, eps, "exact").count
        r2 = min_spanning(a, None, eps / 2, "exact").count
        bad += not (r <= s <= r2)
    return [count_ok(9, "r(eps) <= s(eps) <= r(eps/2) violations on 200 clouds", bad)]


def measure_fixtures():
    two = ShiftSystem(finite_alphabet(2), label="2 symbols")
    three = ShiftSystem(finite_alphabet(3, 0.5), label="3 symbols")
    coarse = ShiftSystem(interval_net(0.25), label="[0,1]-net/5")
    fx = [(two, MeasureSpec.product([0.5, 0.5])), (two, MeasureSpec.product([0.8, 0.2])),
          (two, MeasureSpec.dirac(two.config({0: 1, 1: 1}))),
          (three, MeasureSpec.product([0.2, 0.3, 0.5])),
          (three, MeasureSpec.empirical([(three.config({0: 1}), 2), (three.config({1: 2}), 1),
                                         (three.config({}), 1)])),
          (coarse, MeasureSpec.uniform())]
    return fx


def c09b_katok_sandwich(scale=1.0, workers=1):
    eps_grid = (0.05, 0.1, 0.2, 0.3, 0.45, 0.7, 1.2)
    bad = 0
    compared = 0
    for sys, mu in measure_fixtures():
        # closed-form Katok rows exist only for product measures
        n_grid = (1, 2, 3, 48) if mu.kind == "product" else (1, 2, 3)
        curve = entropy_curve(sys, BOXES, eps_grid, n_grid, opts=CurveOptions(workers=workers))
        for eps in eps_grid:
            k = katok_entropy(mu, sys, BOXES, eps, 0.05, "sup", n_grid)
            for row, krow in zip(sorted(curve.at(eps), key=lambda r: r.n), k.per_n):
                same_model = (row.method == "closed-form-lower") == (krow.method == "closed-form-lower")
                if not same_model:
                    continue
                compared += 1
                bad += krow.normalized > row.log_spanning / row.folner_size + 1e-12
    return [count_ok(9, f"Katok <= log spanning violations ({compared} matched rows)", bad)]


def rd_fixtures():
    two = ShiftSystem(finite_alphabet(2), label="2 symbols")
    coarse = ShiftSystem(interval_net(0.25), label="[0,1]-net/5")
    F = box(1, 0, 1)
    return [(two, MeasureSpec.product([0.5, 0.5]), F), (two, MeasureSpec.product([0.7, 0.3]), F),
            (two, MeasureSpec.dirac(two.config({0: 1})), F), (coarse, MeasureSpec.uniform(), F)]


def c09cd_rd_chain(scale=1.0, workers=1):
    eps_grid = (0.05, 0.1, 0.2, 0.3, 0.45, 0.8)
    bad_c = bad_d = 0
    for sys, mu, F in rd_fixtures():
        for row in rd_inequality_suite(mu, sys, F, eps_grid, tolerance=1e-6 * scale):
            for name, ok in row.checks:
                if name in ("L1<=L2", "L2<=Linf"):
                    bad_c += not ok
                elif "Katok" in name:
                    bad_d += not ok
    return [count_ok(9, "R_L1(2eps) <= R_L2(2eps) <= R_Linf(eps) violations", bad_c),
            count_ok(9, "R_Linf(eps) <= Katok(eps) + 1e-6 violations", bad_d)]


def c10_binary_hamming(scale=1.0, workers=1):
    out = []
    for D in (0.05, 0.1, 0.2, 0.3, 0.4):
        res = rate_for_target(RDProblem(np.array([0.5, 0.5]), 1 - np.eye(2), target=D))
        out.append(at_most(10, f"|BA - (ln2 - H_b)| at D={D}", abs(res.rate - binary_hamming_rate(D)),
                           1e-4 * scale))
    return out


def c11_mutual_information(scale=1.0, workers=1):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        px = rng.dirichlet(np.ones(int(rng.integers(1, 7))))
        py = rng.dirichlet(np.ones(int(rng.integers(1, 7))))
        j = np.outer(px, py)
        worst = max(worst, abs(mutual_information(JointDistribution(j / j.sum()))))
    fixture = mutual_information(JointDistribution(np.array([[0.4, 0.1], [0.1, 0.4]])))
    return [at_most(11, "max |I| on product joints", worst, 1e-12 * scale),
            band(11, "I([[0.4,0.1],[0.1,0.4]])", fixture, 0.192745 - 1e-6, 0.192745 + 1e-6, scale)]


def c12_pressure(scale=1.0, workers=1):
    rng = np.random.default_rng(12)
    worst = 0.0
    systems = [ShiftSystem(finite_alphabet(2)), ShiftSystem(finite_alphabet(3, 0.5)),
               ShiftSystem(interval_net(0.25))]
    for sys in systems:
        for n in (1, 2, 3):
            F = box(1, 0, n - 1)
            for eps in (0.1, 0.3, 0.6):
                f = Potential.coordinate(rng.normal(size=len(sys.alphabet)))
                c = float(rng.normal() * 3)
                for mode in ("auto", "greedy"):
                    a = pressure_count(sys, F, f + Potential.constant(c), eps, mode)
                    b = pressure_count(sys, F, f, eps, mode)
                    worst = max(worst, abs(a - b - c * len(F)))
    sys, grid = unit_net_system()
    opts = CurveOptions(workers=workers)
    plain = mdim_estimate(entropy_curve(sys, BOXES, grid, N_GRID, opts=opts)).upper
    out = [at_most(12, "max |log P(f+c) - log P(f) - c|F||", worst, 1e-12 * scale)]
    for c in (0.5, -0.3):
        est = pressure_mdim(sys, BOXES, Potential.constant(c), grid, N_GRID, opts).upper
        out.append(band(12, f"pressure mdim with f={c:g} minus plain", est - plain, c - 0.1, c + 0.1, scale))
    return out


def c13_oracles(scale=1.0, workers=1):
    rng = np.random.default_rng(13)
    bad = {"separated": 0, "spanning": 0, "weighted": 0, "katok": 0}
    for a, eps in random_clouds(150, seed=13):
        n = len(a)
        dist = a.distance_matrix()
        compat = dist > tie(eps)
        np.fill_diagonal(compat, False)
        cbits = packing.bitsets_from_bool(compat)
        ball = packing.bitsets_from_bool(dist <= tie(eps))
        s_ex = round(packing.exhaustive_packing(cbits)[0])
        s = max_separated(a, None, eps, "exact").count
        bad["separated"] += s != s_ex or round(packing.max_weight_packing(cbits)[0]) != s_ex
        r = min_spanning(a, None, eps, "exact").count
        bad["spanning"] += r != len(packing.exhaustive_cover(ball))
        w = rng.random(n) + 0.01
        bb, _ = packing.max_weight_packing(cbits, w)
        ex, _ = packing.exhaustive_packing(cbits, w)
        bad["weighted"] += abs(bb - ex) > 1e-9
        mass = rng.dirichlet(np.ones(n))
        delta = float(rng.choice([0.0, 0.05, 0.2]))
        ballm = dist <= tie(eps)
        g = katok_cover_count(ballm, mass, delta, "greedy")
        e = katok_cover_count(ballm, mass, delta, "exhaustive")
        bad["katok"] += g < e
    return [count_ok(13, f"{k} oracle mismatches", v) for k, v in bad.items()]


SUITES: dict[str, tuple[Callable, ...]] = {
    "paper-examples": (c01_harmonic_boxdim, c02_unit_mdim, c03_harmonic_mdim, c04_power_rule,
                       c05_product, c06_c07_entdim, c08_katok_lebesgue, c12_pressure),
    "inequalities": (c09a_count_chain, c09b_katok_sandwich, c09cd_rd_chain),
    "oracles": (c10_binary_hamming, c11_mutual_information, c13_oracles),
}
SUITES["all"] = SUITES["paper-examples"] + SUITES["inequalities"] + SUITES["oracles"]


def run_suite(name: str, tolerance_scale: float = 1.0, workers: int = 1) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    out: list[Check] = []
    for fn in SUITES[name]:
        out.extend(fn(tolerance_scale, workers))
    return out
