"""Mutual information and Blahut-Arimoto rate-distortion on finite window models.

All information quantities are in nats. Distortion between a window configuration
x and a reproduction x' is measured along the orbit segment: the L^p distortion is
(1/|F|) sum_{g in F} D(gx, gx')^p and the L^inf outage is the fraction of g in F with
D(gx, gx') > eps (up to the tie nudge, so that distance exactly eps is no outage).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .counting import fmt
from .groups import FolnerSet
from .measures import MeasureSpec, katok_window_log_count, window_masses
from .metric import tie
from .shift import ShiftSystem, WindowEnumeration, bowen_matrices

TOL = 1e-9
MAX_ITER = 100_000
STRICT_NUDGE = 1e-6
OUTAGE_LEVELS = (0.2, 0.1, 0.05)
RD_CAP = 1024


@dataclass(frozen=True)
class JointDistribution:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or (p < 0).any() or abs(p.sum() - 1) > 1e-12:
            raise ValueError("a joint distribution is a nonnegative matrix summing to 1")
        object.__setattr__(self, "p", p)

    @classmethod
    def product(cls, px: Sequence[float], py: Sequence[float]) -> "JointDistribution":
        return cls(np.outer(px, py))


def mutual_information(j: JointDistribution) -> float:
    """sum p(x,y) log(p(x,y) / (p(x) p(y))) with 0 log 0 = 0."""
    p = j.p
    rows, cols = np.nonzero(p)
    px = p.sum(axis=1)[rows]
    py = p.sum(axis=0)[cols]
    vals = p[rows, cols]
    val = float(np.sum(vals * (np.log(vals) - np.log(px) - np.log(py))))
    return max(val, 0.0)


def entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class RDProblem:
    """Source law, distortion matrix (source x reproduction) and the constraint target.

    ``allowed`` optionally restricts the channel support (used for zero outage).
    """

    source: np.ndarray
    distortion: np.ndarray
    constraint_kind: str = "Lp"
    p: float = 1.0
    epsilon: float = 0.0
    target: float = 0.0
    allowed: np.ndarray | None = None

    def __post_init__(self):
        src = np.asarray(self.source, dtype=float)
        rho = np.asarray(self.distortion, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != len(src):
            raise ValueError("distortion matrix rows must match the source")
        if (src < 0).any() or abs(src.sum() - 1) > 1e-9:
            raise ValueError("source must be a probability vector")
        if (rho < 0).any():
            raise ValueError("distortions must be nonnegative")
        if self.constraint_kind not in ("Lp", "Linf"):
            raise ValueError("constraint_kind must be 'Lp' or 'Linf'")
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "distortion", rho)


@dataclass(frozen=True)
class RDResult:
    rate: float
    achieved_distortion: float
    multiplier: float
    iterations: int
    converged: bool
    channel: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {"rate": self.rate, "achieved_distortion": self.achieved_distortion,
                "multiplier": self.multiplier, "iterations": self.iterations, "converged": self.converged}


def _channel_rate(src: np.ndarray, q: np.ndarray) -> float:
    return mutual_information(JointDistribution(src[:, None] * q / (src[:, None] * q).sum()))


def blahut_arimoto(prob: RDProblem, multiplier: float, tol: float = TOL, max_iter: int = MAX_ITER,
                   init: np.ndarray | None = None) -> RDResult:
    """Alternating minimisation of I(X; Y) + multiplier * E rho at a fixed slope."""
    if multiplier < 0:
        raise ValueError("multiplier must be nonnegative")
    keep = prob.source > 0
    src = prob.source[keep]
    rho = prob.distortion[keep]
    mask = None if prob.allowed is None else np.asarray(prob.allowed, dtype=bool)[keep]
    K = rho.shape[1]
    log_r = np.log(np.full(K, 1.0 / K)) if init is None else np.log(np.maximum(init, 1e-300))
    prev = math.inf
    q = None
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        logits = log_r[None, :] - multiplier * rho
        if mask is not None:
            logits = np.where(mask, logits, -np.inf)
        logits -= logits.max(axis=1, keepdims=True)
        q = np.exp(logits)
        q /= q.sum(axis=1, keepdims=True)
        r = src @ q
        with np.errstate(divide="ignore", invalid="ignore"):
            log_r = np.log(r)
            ratio = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)) - log_r[None, :], 0.0)
            rate = float(np.nansum(src[:, None] * q * ratio))
        if abs(rate - prev) < tol:
            converged = True
            break
        prev = rate
    full_q = np.zeros((len(prob.source), K))
    full_q[keep] = q
    full_q[~keep] = np.exp(log_r) / np.exp(log_r).sum() if (~keep).any() else 0.0
    rate = min(max(_channel_rate(prob.source, full_q), 0.0), entropy(prob.source))
    achieved = float(np.sum(prob.source[:, None] * full_q * prob.distortion))
    return RDResult(rate, achieved, multiplier, it, converged, full_q)


def rate_for_target(prob: RDProblem, target: float | None = None, tol: float = TOL,
                    max_iter: int = MAX_ITER, max_bisect: int = 200) -> RDResult:
    """Smallest rate with expected distortion <= target.

    The slope is bisected until the two bracketing solutions straddle the target;
    their channels are then mixed so the achieved distortion equals the target
    (mixing two feasible points never increases the rate above the chord).
    """
    target = prob.target if target is None else target
    src, rho = prob.source, prob.distortion
    allowed = np.ones_like(rho, dtype=bool) if prob.allowed is None else np.asarray(prob.allowed, bool)
    # a constant reproduction already meeting the target needs no information
    const = np.where(allowed.all(axis=0), src @ rho, np.inf)
    best = int(np.argmin(const))
    if const[best] <= target:
        q = np.zeros_like(rho)
        q[:, best] = 1.0
        return RDResult(0.0, float(const[best]), 0.0, 0, True, q)
    dmin = float(src @ np.where(allowed, rho, np.inf).min(axis=1))
    if dmin > target:
        raise ValueError(f"target distortion {target:g} is below the attainable minimum {dmin:g}")
    lo = blahut_arimoto(prob, 0.0, tol, max_iter)
    scale = 1.0 / max(float(rho[rho > 0].min()) if (rho > 0).any() else 1.0, 1e-300)
    beta = scale
    hi = blahut_arimoto(prob, beta, tol, max_iter)
    while hi.achieved_distortion > target:
        lo = hi
        beta *= 2
        if beta > 1e12 * scale:
            # only the exact-minimum channel meets the target: restrict to minimisers
            mins = np.where(allowed, rho, np.inf).min(axis=1, keepdims=True)
            exact = RDProblem(src, rho, prob.constraint_kind, prob.p, prob.epsilon, target,
                              allowed & (rho <= mins))
            res = blahut_arimoto(exact, 0.0, tol, max_iter)
            return RDResult(res.rate, res.achieved_distortion, math.inf, res.iterations, res.converged,
                            res.channel)
        hi = blahut_arimoto(prob, beta, tol, max_iter, init=src @ lo.channel)
    for _ in range(max_bisect):
        if hi.achieved_distortion >= target * (1 - 1e-12) or \
                lo.achieved_distortion - hi.achieved_distortion < 1e-12 * max(target, 1e-300):
            break
        mid_beta = math.sqrt(lo.multiplier * hi.multiplier) if lo.multiplier > 0 else hi.multiplier / 2
        mid = blahut_arimoto(prob, mid_beta, tol, max_iter, init=src @ hi.channel)
        if mid.achieved_distortion > target:
            lo = mid
        else:
            hi = mid
        if hi.multiplier - lo.multiplier < 1e-12 * hi.multiplier:
            break
    if lo.achieved_distortion <= target or lo.achieved_distortion == hi.achieved_distortion:
        lam = 0.0
    else:
        lam = (target - hi.achieved_distortion) / (lo.achieved_distortion - hi.achieved_distortion)
        lam = min(max(lam, 0.0), 1.0)
    q = lam * lo.channel + (1 - lam) * hi.channel
    rate = min(_channel_rate(src, q), entropy(src))
    achieved = float(np.sum(src[:, None] * q * rho))
    return RDResult(rate, achieved, hi.multiplier, lo.iterations + hi.iterations,
                    lo.converged and hi.converged, q)


def binary_hamming_rate(D: float) -> float:
    """ln 2 - H_b(D) for a fair binary source under Hamming distortion, D in [0, 1/2]."""
    if D >= 0.5:
        return 0.0
    if D <= 0:
        return math.log(2)
    return math.log(2) + D * math.log(D) + (1 - D) * math.log(1 - D)


# -- window models ------------------------------------------------------------

@dataclass(frozen=True)
class WindowModel:
    source: np.ndarray
    stack: np.ndarray  # (|F|, N, N) of D(g x, g x') for g in F
    configs: np.ndarray


def window_model(mu: MeasureSpec, sys: ShiftSystem, F: FolnerSet, cap: int = RD_CAP) -> WindowModel:
    """Source law on the window configurations with the per-g orbit distances."""
    enum = WindowEnumeration(sys, range(len(sys.alphabet)), F, cap)
    arr = enum.array()
    src = window_masses(mu, sys, arr, enum.sites)
    return WindowModel(src, bowen_matrices(sys, arr, enum.sites, F), arr)


def lp_problem(model: WindowModel, epsilon: float, p: float) -> RDProblem:
    rho = np.mean(model.stack ** p, axis=0)
    return RDProblem(model.source, rho, "Lp", p, epsilon, epsilon ** p * (1 - STRICT_NUDGE))


def linf_problem(model: WindowModel, epsilon: float, s: float) -> RDProblem:
    outage = np.mean(model.stack > tie(epsilon), axis=0)
    if s == 0:
        return RDProblem(model.source, outage, "Linf", math.inf, epsilon, 0.0, outage == 0)
    return RDProblem(model.source, outage, "Linf", math.inf, epsilon, s * (1 - STRICT_NUDGE))


def rd_at_epsilon(mu: MeasureSpec, sys: ShiftSystem, F: FolnerSet, epsilon: float,
                  p: float | None = None, s: float | None = None, tol: float = TOL,
                  model: WindowModel | None = None) -> RDResult:
    """R(F, eps) for the L^p constraint (give ``p``) or the L^inf outage level ``s``.

    ``s = 0`` is the zero-outage problem, i.e. the limit s -> 0+: every reproduction
    must stay within eps along the whole orbit segment.
    """
    if (p is None) == (s is None):
        raise ValueError("give exactly one of p (L^p) or s (L^inf outage)")
    model = model or window_model(mu, sys, F)
    prob = lp_problem(model, epsilon, p) if p is not None else linf_problem(model, epsilon, s)
    if prob.constraint_kind == "Linf" and s == 0:
        res = blahut_arimoto(prob, 0.0, tol)
        return RDResult(res.rate, res.achieved_distortion, math.inf, res.iterations, res.converged, res.channel)
    return rate_for_target(prob, tol=tol)


@dataclass(frozen=True)
class InequalityRow:
    epsilon: float
    folner_size: int
    r_l1_2eps: float
    r_l2_2eps: float
    r_linf: float
    r_linf_family: tuple[tuple[float, float], ...]
    katok: float
    katok_delta0: float
    checks: tuple[tuple[str, bool], ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


def rd_inequality_suite(mu: MeasureSpec, sys: ShiftSystem, F: FolnerSet, eps_grid: Sequence[float],
                        delta: float = 0.05, tolerance: float = 1e-6) -> list[InequalityRow]:
    """Per-eps table of the normalized rates and Katok values with the ordering checks.

    Checks: R_L1(2eps) <= R_L2(2eps) <= R_Linf(eps) with zero outage; the outage family
    is nonincreasing in s; R_Linf(eps, s) <= Katok(eps, delta) for every level s > delta,
    and zero-outage R_Linf(eps) <= Katok(eps, 0). All comparisons allow ``tolerance``.
    """
    model = window_model(mu, sys, F)
    n = len(F)
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        r1 = rd_at_epsilon(mu, sys, F, 2 * eps, p=1, model=model).rate / n
        r2 = rd_at_epsilon(mu, sys, F, 2 * eps, p=2, model=model).rate / n
        r0 = rd_at_epsilon(mu, sys, F, eps, s=0, model=model).rate / n
        fam = tuple((s, rd_at_epsilon(mu, sys, F, eps, s=s, model=model).rate / n) for s in OUTAGE_LEVELS)
        k = katok_window_log_count(mu, sys, F, eps, delta) / n
        k0 = katok_window_log_count(mu, sys, F, eps, 0.0) / n
        checks = [("L1<=L2", r1 <= r2 + tolerance), ("L2<=Linf", r2 <= r0 + tolerance)]
        vals = [v for _, v in fam] + [r0]
        checks.append(("outage-monotone", all(a <= b + tolerance for a, b in zip(vals, vals[1:]))))
        for s, v in fam:
            if s > delta:
                checks.append((f"Linf(s={s:g})<=Katok", v <= k + tolerance))
        checks.append(("Linf(0)<=Katok(0)", r0 <= k0 + tolerance))
        rows.append(InequalityRow(eps, n, r1, r2, r0, fam, k, k0, tuple(checks)))
    return rows


def inequality_csv(rows: Sequence[InequalityRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "p_or_s", "rate"])
    for r in rows:
        w.writerow([fmt(r.epsilon), "L1@2eps", fmt(r.r_l1_2eps)])
        w.writerow([fmt(r.epsilon), "L2@2eps", fmt(r.r_l2_2eps)])
        for s, v in r.r_linf_family:
            w.writerow([fmt(r.epsilon), f"s={s:g}", fmt(v)])
        w.writerow([fmt(r.epsilon), "s=0", fmt(r.r_linf)])
    return buf.getvalue()


def results_csv(rows: Sequence[tuple[float, str, RDResult]]) -> str:
    """CSV with columns epsilon, p_or_s, rate, achieved, multiplier, iterations, converged."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "p_or_s", "rate", "achieved", "multiplier", "iterations", "converged"])
    for eps, tag, r in rows:
        w.writerow([fmt(eps), tag, fmt(r.rate), fmt(r.achieved_distortion), fmt(r.multiplier),
                    r.iterations, str(r.converged).lower()])
    return buf.getvalue()
