"""Separated/spanning counts of full shifts and the EntropyCurve tables built from them."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from . import packing
from .groups import FolnerSchedule, FolnerSet
from .metric import (EXACT_THRESHOLD, Alphabet, OracleTooLarge, max_separated, min_spanning,
                     separated_sweep, tie)
from .shift import (ENUMERATION_CAP, PAIRWISE_CAP, CapExceeded, ShiftSystem, WindowEnumeration,
                    auto_window, bowen_matrix)

METHODS = ("exact", "greedy", "closed-form-lower", "closed-form-upper")


@dataclass(frozen=True)
class WindowCount:
    separated: int
    spanning: int
    separated_exact: bool
    spanning_exact: bool
    configurations: int


def _pack_counts(dist: np.ndarray, eps: float, mode: str, exact_threshold: int,
                 weights: np.ndarray | None = None) -> tuple[float, bool]:
    """Separated count (or log of the max weighted sum when ``weights`` are log-weights)."""
    n = len(dist)
    ok = dist > tie(eps)
    np.fill_diagonal(ok, False)
    use_exact = mode == "exact" or (mode == "auto" and n <= exact_threshold)
    if mode == "exact" and n > exact_threshold:
        raise OracleTooLarge(f"oracle too large: {n} configurations > exact threshold {exact_threshold}")
    if weights is None:
        if use_exact:
            val, _ = packing.max_weight_packing(packing.bitsets_from_bool(ok))
            return float(round(val)), True
        return float(len(packing.greedy_packing(packing.bitsets_from_bool(ok)))), n == 1
    shift = float(np.max(weights))
    w = np.exp(weights - shift)
    if use_exact:
        _, members = packing.max_weight_packing(packing.bitsets_from_bool(ok), w)
    else:
        order = sorted(range(n), key=lambda i: (-weights[i], i))
        members = packing.greedy_packing(packing.bitsets_from_bool(ok), order)
    return float(np.logaddexp.reduce(weights[members])), use_exact or n == 1


def _cover_count(dist: np.ndarray, eps: float, mode: str, exact_threshold: int) -> tuple[int, bool]:
    n = len(dist)
    ball = dist <= tie(eps)
    if mode == "exact" or (mode == "auto" and n <= exact_threshold):
        if n > exact_threshold:
            raise OracleTooLarge(f"oracle too large: {n} configurations > exact threshold {exact_threshold}")
        return len(packing.min_cover(packing.bitsets_from_bool(ball))), True
    return len(packing.greedy_cover(ball)), n == 1


def window_bowen(sys: ShiftSystem, F: FolnerSet, net: Sequence[int] | None = None,
                 constraints: Mapping | None = None, cap: int = ENUMERATION_CAP,
                 mode: str = "sup") -> tuple[WindowEnumeration, np.ndarray, np.ndarray]:
    """Enumerate the window configurations and their pairwise Bowen distances."""
    net = range(len(sys.alphabet)) if net is None else net
    enum = WindowEnumeration(sys, net, F, cap=min(cap, ENUMERATION_CAP), constraints=constraints)
    if len(enum) > PAIRWISE_CAP:
        raise CapExceeded("pairwise Bowen distances", len(enum), PAIRWISE_CAP)
    arr = enum.array()
    return enum, arr, bowen_matrix(sys, arr, enum.sites, F, mode)


def count_window(sys: ShiftSystem, F: FolnerSet, epsilon: float, mode: str = "auto",
                 net: Sequence[int] | None = None, constraints: Mapping | None = None,
                 exact_threshold: int = EXACT_THRESHOLD, cap: int = ENUMERATION_CAP) -> WindowCount:
    """Separated and spanning counts of the window configurations under the Bowen metric d_F."""
    enum, _, dist = window_bowen(sys, F, net, constraints, cap)
    s, s_exact = _pack_counts(dist, epsilon, mode, exact_threshold)
    r, r_exact = _cover_count(dist, epsilon, mode, exact_threshold)
    return WindowCount(int(s), r, s_exact, r_exact, len(enum))


# -- closed-form product bounds ---------------------------------------------

@lru_cache(maxsize=100_000)
def site_log_count(alphabet: Alphabet, eta: float) -> float:
    """log s(X, d, eta) by the best available route (exact sweep in 1-d)."""
    if eta >= alphabet.diameter * (1 + 1e-9) or len(alphabet) <= 1 and alphabet.factors is None:
        return 0.0
    return math.log(max_separated(alphabet, None, eta, "auto").count)


@lru_cache(maxsize=100_000)
def site_log_cover(alphabet: Alphabet, eta: float) -> float:
    if eta >= alphabet.diameter * (1 + 1e-9) or len(alphabet) <= 1 and alphabet.factors is None:
        return 0.0
    return math.log(min_spanning(alphabet, None, eta, "auto").count)


def site_log_weighted(alphabet: Alphabet, eta: float, log_w: np.ndarray,
                      exact_threshold: int = EXACT_THRESHOLD) -> float:
    """log of max over eta-separated R of sum_{x in R} exp(log_w[x])."""
    if alphabet.metric_kind == "abs1d":
        x = alphabet.points[:, 0]
        order = np.argsort(x, kind="stable")
        xs, lw = x[order], np.asarray(log_w, dtype=float)[order]
        # prev[i]: number of points at distance <= eta below point i, excluded when i is taken
        prev = np.searchsorted(xs, xs - tie(eta), side="left")
        best = np.full(len(xs) + 1, -np.inf)
        for i in range(len(xs)):
            take = np.logaddexp(lw[i], best[prev[i]])
            best[i + 1] = max(best[i], take)
        return float(best[-1])
    dist = alphabet.distance_matrix()
    val, _ = _pack_counts(dist, eta, "auto", exact_threshold, np.asarray(log_w, dtype=float))
    return val


def distance_shells(F: FolnerSet, K: int) -> list[int]:
    """n_k = number of sites at sup-norm distance exactly k from F, for k = 0..K."""
    lo, hi = F.bounding_box()
    lo = np.asarray(lo) - K
    hi = np.asarray(hi) + K
    shape = tuple(int(v) for v in hi - lo + 1)
    if math.prod(shape) > 20_000_000:
        raise CapExceeded("distance-shell grid", math.prod(shape), 20_000_000)
    mask = np.ones(shape, dtype=bool)
    idx = np.asarray(F) - lo
    mask[tuple(idx.T)] = False
    dist = ndimage.distance_transform_cdt(mask, metric="chessboard") if mask.any() else np.zeros(shape, int)
    counts = np.bincount(dist.ravel(), minlength=K + 1)[: K + 1]
    return [int(c) for c in counts]


def shell_depth(sys: ShiftSystem, eps: float) -> int:
    """Largest k with base^k * diam > eps: deeper shells cannot carry separated pairs."""
    diam = sys.alphabet.diameter
    if diam <= 0:
        return 0
    k = 0
    while sys.weights.base ** (k + 1) * diam > eps:
        k += 1
    return k


def shift_lower_log(sys: ShiftSystem, F: FolnerSet, eps: float,
                    log_w: np.ndarray | None = None, pinned: int = 0) -> float:
    """Certified lower bound on log s(X^G, D_F, eps) (or the log pressure sum).

    Sites at distance k from F carry an (eps / base^k)-separated set of symbols; any two
    product configurations then differ somewhere by more than eps in D_F. With log-weights
    the sites of F carry the maximum-weight separated set instead. ``pinned`` sites of F
    are held fixed and contribute nothing.
    """
    K = shell_depth(sys, eps)
    shells = distance_shells(F, K)
    a = sys.alphabet
    total = 0.0
    if log_w is None:
        total += (shells[0] - pinned) * site_log_count(a, eps)
    else:
        total += (shells[0] - pinned) * site_log_weighted(a, eps, log_w)
    for k in range(1, K + 1):
        if shells[k]:
            total += shells[k] * site_log_count(a, eps / sys.weights.base ** k)
    return total


def shift_upper_log(sys: ShiftSystem, F: FolnerSet, eps: float) -> float:
    """|S F| log r(X, d, eps / 2M) with S the auto window for eps: bounds log r(X^G, D_F, eps)."""
    S = auto_window(sys.group, sys.weights, sys.alphabet.diameter, eps)
    k = max(abs(c) for c in S[0])
    n_sf = sum(distance_shells(F, k))
    return n_sf * site_log_cover(sys.alphabet, eps / (2 * sys.total_weight))


@dataclass(frozen=True)
class ClosedFormBounds:
    lower: float
    upper: float


def closed_form_bounds(sys: ShiftSystem, F_n: FolnerSet, S: FolnerSet, epsilon: float) -> ClosedFormBounds:
    """Per-site bracket: log s(X,d,eps) <= (1/|F_n|) log counts <= (|S F_n|/|F_n|) log r(X,d,eps/2M)."""
    lower = site_log_count(sys.alphabet, epsilon)
    n_sf = len(S.product(F_n))
    upper = n_sf / len(F_n) * site_log_cover(sys.alphabet, epsilon / (2 * sys.total_weight))
    return ClosedFormBounds(lower, upper)


# -- entropy curves -----------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    epsilon: float
    n: int
    folner_size: int
    log_separated: float
    log_spanning: float
    method: str

    @property
    def normalized(self) -> float:
        return self.log_separated / self.folner_size


@dataclass(frozen=True)
class EntropyCurve:
    """Rows of (eps, n, |F_n|, log separated, log spanning, method).

    Closed-form rows store the certified product lower bound in ``log_separated`` and
    the product upper bound on the spanning count in ``log_spanning``.
    """

    rows: tuple[CurveRow, ...]
    label: str = ""
    schedule: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: (-r.epsilon, r.n))))

    @property
    def epsilons(self) -> list[float]:
        return sorted({r.epsilon for r in self.rows}, reverse=True)

    def at(self, eps: float) -> list[CurveRow]:
        return [r for r in self.rows if r.epsilon == eps]

    def tail_stats(self, tail_fraction: float = 1 / 3) -> list[tuple[float, float, float]]:
        """(eps, max, min) of log_separated / |F_n| over the largest ceil(fraction) of n values."""
        out = []
        for eps in self.epsilons:
            rows = sorted(self.at(eps), key=lambda r: r.n)
            k = max(1, math.ceil(tail_fraction * len(rows)))
            vals = [r.normalized for r in rows[-k:]]
            out.append((eps, max(vals), min(vals)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "n", "folner_size", "log_separated", "log_spanning", "method"])
        for r in self.rows:
            w.writerow([fmt(r.epsilon), r.n, r.folner_size, fmt(r.log_separated), fmt(r.log_spanning), r.method])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> "EntropyCurve":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(CurveRow(float(rec["epsilon"]), int(rec["n"]), int(rec["folner_size"]),
                                 float(rec["log_separated"]), float(rec["log_spanning"]), rec["method"]))
        return cls(tuple(rows), label)

    def to_json(self) -> list[dict]:
        return [{"epsilon": r.epsilon, "n": r.n, "folner_size": r.folner_size,
                 "log_separated": r.log_separated, "log_spanning": r.log_spanning, "method": r.method}
                for r in self.rows]

    @classmethod
    def from_json(cls, rows: list[dict], label: str = "") -> "EntropyCurve":
        return cls(tuple(CurveRow(float(d["epsilon"]), int(d["n"]), int(d["folner_size"]),
                                  float(d["log_separated"]), float(d["log_spanning"]), d["method"])
                         for d in rows), label)


def fmt(x: float) -> str:
    """17 significant digits: enough for a lossless float round trip."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class CurveOptions:
    mode: str = "auto"
    enum_n_max: int = 3
    exact_threshold: int = EXACT_THRESHOLD
    cap: int = ENUMERATION_CAP
    net_factor: float | None = 0.5
    constraints: tuple = ()
    workers: int = 1


def _enum_net(sys: ShiftSystem, F: FolnerSet, eps: float, opts: CurveOptions,
              n_free: int) -> list[int] | None:
    """Symbols to enumerate on each window site, or None when enumeration is out of reach."""
    budget = min(opts.cap, PAIRWISE_CAP)
    if not sys.alphabet.materialized:
        return None
    full = list(range(len(sys.alphabet)))
    if len(full) ** n_free <= budget:
        return full
    if opts.net_factor is None or sys.alphabet.metric_kind != "abs1d":
        return None
    # a coarser sub-net: a maximal (net_factor * eps)-separated subset in sorted order
    x = sys.alphabet.points[:, 0]
    order = np.argsort(x, kind="stable")
    pos = separated_sweep(x[order], opts.net_factor * eps)
    sub = sorted(order[pos].tolist())
    return sub if len(sub) ** n_free <= budget else None


def curve_cell(sys: ShiftSystem, schedule: FolnerSchedule, eps: float, n: int,
               opts: CurveOptions) -> CurveRow:
    F = schedule(n)
    constraints = dict(opts.constraints)
    sites = len(sys.window.product(F))
    if n <= opts.enum_n_max:
        net = _enum_net(sys, F, eps, opts, sites - len(constraints))
        if net is not None:
            try:
                wc = count_window(sys, F, eps, opts.mode, net, constraints, opts.exact_threshold, opts.cap)
            except (CapExceeded, OracleTooLarge):
                wc = None
            if wc is not None:
                exact = wc.separated_exact and wc.spanning_exact and len(net) == len(sys.alphabet)
                return CurveRow(eps, n, len(F), math.log(wc.separated), math.log(wc.spanning),
                                "exact" if exact else "greedy")
    lower = shift_lower_log(sys, F, eps, pinned=len(constraints))
    upper = shift_upper_log(sys, F, eps)
    return CurveRow(eps, n, len(F), lower, upper, "closed-form-lower")


def run_cells(fn, cells, workers: int = 1) -> list:
    """Evaluate independent grid cells; output order follows ``cells`` regardless of workers."""
    if workers <= 1:
        return [fn(*c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda c: fn(*c), cells))


def entropy_curve(sys: ShiftSystem, schedule: FolnerSchedule, eps_grid: Sequence[float],
                  n_grid: Sequence[int], mode: str = "auto", opts: CurveOptions | None = None,
                  label: str = "") -> EntropyCurve:
    """One row per (eps, n); enumeration for small n, certified product bounds otherwise."""
    if not eps_grid or not n_grid:
        raise ValueError("grids must be non-empty")
    opts = replace(opts or CurveOptions(), mode=mode)
    cells = [(sys, schedule, float(e), int(n), opts) for e in eps_grid for n in n_grid]
    rows = run_cells(curve_cell, cells, opts.workers)
    return EntropyCurve(tuple(rows), label or sys.label, schedule.label)


def cylinder_subset(sys: ShiftSystem, constraints: Mapping, F: FolnerSet,
                    net: Sequence[int] | None = None, cap: int = ENUMERATION_CAP) -> WindowEnumeration:
    """Window configurations on S F that match the pinned symbols."""
    net = range(len(sys.alphabet)) if net is None else net
    return WindowEnumeration(sys, net, F, cap, constraints)
