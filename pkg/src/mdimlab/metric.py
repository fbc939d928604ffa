"""Finite point clouds standing in for compact metric spaces.

Counting conventions used throughout the package: a set is eps-separated when
distinct points are at distance > eps, and eps-spanning when every point is within
distance <= eps of a centre. Spanning centres are always taken from the set being
covered. Comparisons are made against ``eps * (1 + TIE_NUDGE)`` so that distances
equal to eps up to rounding are treated the same way on every platform.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import packing
from .packing import OracleTooLarge

TIE_NUDGE = 1e-12
EXACT_THRESHOLD = 24
ORACLE_THRESHOLD = 12
ENTDIM_POINT_CAP = 200_000

METRIC_KINDS = ("abs1d", "supmd", "matrix")


def tie(eps: float) -> float:
    return eps * (1.0 + TIE_NUDGE)


@dataclass(frozen=True, eq=False)
class Alphabet:
    """A finite metric space.

    ``points`` has shape (N, dim). For ``matrix`` alphabets the distances come from
    ``matrix`` and ``points`` only carries labels. ``factors`` is set on sup-norm
    products of 1-d alphabets; counts then factor across coordinates. ``resolution``
    is the net spacing when the alphabet discretises a continuum (None for a
    genuinely finite space).
    """

    points: np.ndarray
    metric_kind: str = "abs1d"
    label: str = ""
    matrix: np.ndarray | None = None
    factors: tuple["Alphabet", ...] | None = None
    resolution: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric_kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if self.metric_kind == "matrix":
            mat = np.asarray(self.matrix, dtype=float)
            if mat.shape != (len(pts), len(pts)):
                raise ValueError("distance matrix shape does not match the point list")
            object.__setattr__(self, "matrix", mat)
        elif self.factors is None:
            pts = _dedupe_rows(pts)
        if self.metric_kind == "abs1d" and pts.shape[1] != 1:
            raise ValueError("abs1d alphabets hold scalar points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        if self.factors is not None and not self.materialized:
            return math.prod(len(f) for f in self.factors)
        return len(self.points)

    @property
    def materialized(self) -> bool:
        return len(self.points) > 0

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def diameter(self) -> float:
        if self.metric_kind == "matrix":
            return float(self.matrix.max())
        if self.factors is not None:
            return max(f.diameter for f in self.factors)
        return float(np.max(self.points.max(axis=0) - self.points.min(axis=0)))

    def pairwise_distance(self, i: int, j: int) -> float:
        n = len(self)
        for k in (i, j):
            if not -n <= k < n:
                raise IndexError(f"point index {k} out of range for {n} points")
        if self.metric_kind == "matrix":
            return float(self.matrix[i, j])
        return float(np.max(np.abs(self.points[i] - self.points[j])))

    def distance_matrix(self, subset: Sequence[int] | None = None) -> np.ndarray:
        if not self.materialized:
            raise ValueError("alphabet too large to materialise; use factor-wise counts")
        idx = np.arange(len(self)) if subset is None else np.asarray(subset, dtype=int)
        if self.metric_kind == "matrix":
            return self.matrix[np.ix_(idx, idx)]
        p = self.points[idx]
        return np.max(np.abs(p[:, None, :] - p[None, :, :]), axis=2)

    def scaled(self, factor: float) -> "Alphabet":
        if self.metric_kind == "matrix":
            raise ValueError("coordinate scaling is undefined for explicit-matrix alphabets")
        facs = None if self.factors is None else tuple(f.scaled(factor) for f in self.factors)
        res = None if self.resolution is None else self.resolution * factor
        return Alphabet(self.points * factor, self.metric_kind, f"{self.label}*{factor:g}",
                        factors=facs, resolution=res, meta=dict(self.meta))


def _dedupe_rows(pts: np.ndarray) -> np.ndarray:
    _, first = np.unique(pts, axis=0, return_index=True)
    return pts[np.sort(first)]


# -- constructors -------------------------------------------------------------

def interval_net(resolution: float, dim: int = 1, lo: float = 0.0, hi: float = 1.0) -> Alphabet:
    """Uniform net of [lo, hi]^dim with spacing at most ``resolution`` (sup-norm for dim > 1)."""
    k = int(math.ceil((hi - lo) / resolution - 1e-9)) + 1
    pts = np.linspace(lo, hi, k)
    spacing = (hi - lo) / (k - 1) if k > 1 else 0.0
    base = Alphabet(pts, "abs1d", f"net[{lo:g},{hi:g}]/{k}", resolution=spacing)
    return power(base, dim) if dim > 1 else base


def power(a: Alphabet, m: int) -> Alphabet:
    return product_alphabet(*([a] * m))


def product_alphabet(*factors: Alphabet) -> Alphabet:
    """Sup-norm product of 1-d (or already factored) alphabets."""
    flat: list[Alphabet] = []
    for f in factors:
        if f.factors is not None:
            flat.extend(f.factors)
        elif f.metric_kind == "abs1d":
            flat.append(f)
        else:
            raise ValueError("products are built from abs1d factors")
    sizes = [len(f) for f in flat]
    total = math.prod(sizes)
    if total <= 2_000_000:
        grids = np.meshgrid(*[f.points[:, 0] for f in flat], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    else:
        pts = np.zeros((0, len(flat)))  # too large to materialise; counts use the factors
    res = None
    if all(f.resolution is not None for f in flat):
        res = max(f.resolution for f in flat)
    label = " x ".join(f.label or "X" for f in flat)
    return Alphabet(pts, "supmd", label, factors=tuple(flat), resolution=res)


def harmonic_set(n_max: int) -> Alphabet:
    """Truncation {0} U {1/n : 1 <= n <= n_max}."""
    pts = np.concatenate([[0.0], 1.0 / np.arange(1, n_max + 1)])
    return Alphabet(pts, "abs1d", f"harmonic<= {n_max}".replace(" ", ""))


def finite_alphabet(k: int, spacing: float = 1.0) -> Alphabet:
    """k equally spaced symbols."""
    return Alphabet(np.arange(k) * spacing, "abs1d", f"symbols{k}")


def generate_entdim_set(s: float, alpha: float = 1.0, k0: int | None = None, k_max: int = 8,
                        cap: int = ENTDIM_POINT_CAP) -> Alphabet:
    """{0} U union_{k0<=k<=k_max} {j*eps_k : 1 <= j <= M_k}, eps_k = exp(-k^(1/s)), M_k = floor(exp(alpha k)).

    The set has zero box dimension while log N_eps grows like alpha (log 1/eps)^s.
    ``k0`` defaults to the least k from which exp(alpha k) * eps_k stays below 1 and
    decreases.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def log_f(k):
        return alpha * k - k ** (1.0 / s)

    if k0 is None:
        k0 = 1
        while not all(log_f(k) < 0 and log_f(k + 1) < log_f(k) for k in range(k0, k_max + 2)):
            k0 += 1
    if k_max < k0:
        raise ValueError("k_max must be at least k0")
    sizes = {k: int(math.floor(math.exp(alpha * k))) for k in range(k0, k_max + 1)}
    total = 1 + sum(sizes.values())
    if total > cap:
        raise ValueError(f"entdim set needs {total} points, above the cap of {cap}")
    chunks = [np.zeros(1)]
    for k, m in sizes.items():
        eps_k = math.exp(-(k ** (1.0 / s)))
        chunks.append(np.arange(1, m + 1) * eps_k)
    pts = np.sort(np.concatenate(chunks))
    eps = {k: math.exp(-(k ** (1.0 / s))) for k in sizes}
    meta = {"s": s, "alpha": alpha, "k0": k0, "k_max": k_max, "cluster_sizes": sizes,
            "eps_k": eps, "valid_window": (eps[k_max], eps[k0])}
    return Alphabet(pts, "abs1d", f"entdim(s={s:g},alpha={alpha:g},k={k0}..{k_max})", meta=meta)


def alphabet_from_json(doc: dict) -> Alphabet:
    """Build an alphabet from {"label", "metric": abs1d|supmd|matrix, "points", "matrix"}."""
    kind = doc.get("metric", "abs1d")
    if kind not in METRIC_KINDS:
        raise ValueError(f"metric: unknown kind {kind!r}")
    if "net" in doc:
        net = doc["net"]
        return interval_net(float(net["resolution"]), int(net.get("dim", 1)),
                            float(net.get("lo", 0.0)), float(net.get("hi", 1.0)))
    if "harmonic" in doc:
        return harmonic_set(int(doc["harmonic"]))
    if "finite" in doc:
        f = doc["finite"]
        return finite_alphabet(int(f["k"]), float(f.get("spacing", 1.0)))
    if "entdim" in doc:
        e = doc["entdim"]
        return generate_entdim_set(float(e["s"]), float(e.get("alpha", 1.0)), e.get("k0"),
                                   int(e.get("k_max", 8)), int(e.get("cap", ENTDIM_POINT_CAP)))
    pts = doc.get("points")
    if pts is None:
        raise ValueError("points: missing")
    mat = doc.get("matrix")
    if kind == "matrix":
        if mat is None:
            raise ValueError("matrix: required for metric 'matrix'")
        n = len(pts)
        mat = np.asarray(mat, dtype=float).reshape(n, n)
    return Alphabet(np.asarray(pts, dtype=float), kind, doc.get("label", ""), matrix=mat)


def alphabet_to_json(a: Alphabet) -> dict:
    doc = {"label": a.label, "metric": a.metric_kind, "points": a.points.tolist()}
    if a.matrix is not None:
        doc["matrix"] = a.matrix.ravel().tolist()
    return doc


def check_metric_axioms(a: Alphabet, samples: int = 200, seed: int = 0) -> bool:
    """Spot-check symmetry, zero diagonal, positivity and the triangle inequality."""
    n = len(a)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        i, j, k = rng.integers(0, n, 3)
        dij, dji = a.pairwise_distance(i, j), a.pairwise_distance(j, i)
        if dij != dji or dij < 0 or (i == j) != (dij == 0):
            return False
        if dij > a.pairwise_distance(i, k) + a.pairwise_distance(k, j) + 1e-12:
            return False
    return True


# -- counts -------------------------------------------------------------------

@dataclass(frozen=True)
class Packing:
    """Outcome of one separated or spanning computation."""

    count: int
    members: tuple[int, ...] | None
    exact: bool
    method: str


@dataclass(frozen=True)
class CountResult:
    epsilon: float
    spanning: int
    separated: int
    spanning_exact: bool
    separated_exact: bool
    internal_centres: bool = True


def _subset(a: Alphabet, subset) -> np.ndarray:
    idx = np.arange(len(a)) if subset is None else np.asarray(sorted(set(int(i) for i in subset)), dtype=int)
    if len(idx) == 0:
        raise ValueError("subset must be non-empty")
    return idx


def _sorted_1d(a: Alphabet, idx: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    if idx is None:
        cached = a.__dict__.get("_sorted")
        if cached is None:
            xs, order = _sorted_1d(a, np.arange(len(a)))
            cached = (xs.tolist(), order)
            object.__setattr__(a, "_sorted", cached)
        return cached
    vals = a.points[idx, 0]
    order = np.argsort(vals, kind="stable")
    return vals[order], idx[order]


def separated_sweep(x: Sequence[float], eps: float) -> np.ndarray:
    """Positions of a maximum eps-separated subset of sorted reals (leftmost greedy, optimal)."""
    xs = x.tolist() if isinstance(x, np.ndarray) else x
    e = tie(eps)
    out = []
    i, n = 0, len(xs)
    while i < n:
        out.append(i)
        i = bisect.bisect_right(xs, xs[i] + e, i)
    return np.asarray(out, dtype=int)


def spanning_sweep(x: Sequence[float], eps: float) -> np.ndarray:
    """Positions of a minimum internal eps-cover of sorted reals (optimal for 1-d)."""
    xs = x.tolist() if isinstance(x, np.ndarray) else x
    e = tie(eps)
    out = []
    i, n = 0, len(xs)
    while i < n:
        c = bisect.bisect_right(xs, xs[i] + e, i) - 1
        out.append(c)
        i = bisect.bisect_right(xs, xs[c] + e, c)
    return np.asarray(out, dtype=int)


def _compat_bits(dist: np.ndarray, eps: float) -> list[int]:
    ok = dist > tie(eps)
    np.fill_diagonal(ok, False)
    return packing.bitsets_from_bool(ok)


def _ball_bits(dist: np.ndarray, eps: float) -> list[int]:
    return packing.bitsets_from_bool(dist <= tie(eps))


def max_separated(a: Alphabet, subset=None, epsilon: float = 0.1, mode: str = "auto",
                  exact_threshold: int = EXACT_THRESHOLD) -> Packing:
    """Largest (d, eps)-separated subset of ``subset``.

    ``exact`` runs branch and bound on the conflict graph (1-d alphabets use the
    optimal sweep at any size); ``greedy`` keeps points in index order when they are
    separated from everything kept so far, which is also an eps-spanning set;
    ``auto`` picks the best exact route available and falls back to greedy.
    """
    if mode not in ("auto", "exact", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    if a.factors is not None and subset is None and mode != "exact":
        counts = [max_separated(f, None, epsilon, "auto") for f in a.factors]
        return Packing(math.prod(c.count for c in counts), None, False, "product")
    idx = _subset(a, subset)
    if a.metric_kind == "abs1d" and mode != "greedy":
        xs, order = _sorted_1d(a, None if subset is None else idx)
        pos = separated_sweep(xs, epsilon)
        return Packing(len(pos), tuple(sorted(order[pos].tolist())), True, "sweep")
    if mode == "exact" or (mode == "auto" and len(idx) <= exact_threshold):
        if len(idx) > exact_threshold:
            raise OracleTooLarge(f"oracle too large: {len(idx)} points > exact threshold {exact_threshold}")
        val, members = packing.max_weight_packing(_compat_bits(a.distance_matrix(idx), epsilon))
        return Packing(int(round(val)), tuple(idx[members].tolist()), True, "branch-and-bound")
    chosen = packing.greedy_packing(_compat_bits(a.distance_matrix(idx), epsilon))
    return Packing(len(chosen), tuple(idx[chosen].tolist()), len(idx) == 1, "greedy")


def min_spanning(a: Alphabet, subset=None, epsilon: float = 0.1, mode: str = "auto",
                 exact_threshold: int = EXACT_THRESHOLD) -> Packing:
    """Smallest internal (d, eps)-spanning subset of ``subset``."""
    if mode not in ("auto", "exact", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    if a.factors is not None and subset is None and mode != "exact":
        counts = [min_spanning(f, None, epsilon, "auto") for f in a.factors]
        return Packing(math.prod(c.count for c in counts), None, False, "product")
    idx = _subset(a, subset)
    if a.metric_kind == "abs1d" and mode != "greedy":
        xs, order = _sorted_1d(a, None if subset is None else idx)
        pos = spanning_sweep(xs, epsilon)
        return Packing(len(pos), tuple(sorted(order[pos].tolist())), True, "sweep")
    if mode == "exact" or (mode == "auto" and len(idx) <= exact_threshold):
        if len(idx) > exact_threshold:
            raise OracleTooLarge(f"oracle too large: {len(idx)} points > exact threshold {exact_threshold}")
        chosen = packing.min_cover(_ball_bits(a.distance_matrix(idx), epsilon))
        return Packing(len(chosen), tuple(idx[chosen].tolist()), True, "branch-and-bound")
    chosen = packing.greedy_cover(a.distance_matrix(idx) <= tie(epsilon))
    return Packing(len(chosen), tuple(sorted(idx[chosen].tolist())), len(idx) == 1, "greedy")


def counts(a: Alphabet, epsilon: float, subset=None, mode: str = "auto") -> CountResult:
    s = max_separated(a, subset, epsilon, mode)
    r = min_spanning(a, subset, epsilon, mode)
    return CountResult(epsilon, r.count, s.count, r.exact, s.exact)


def max_ball_count(a: Alphabet, epsilon: float) -> int:
    """Largest number of alphabet points within distance <= eps of a single alphabet point."""
    if a.factors is not None:
        return math.prod(max_ball_count(f, epsilon) for f in a.factors)
    if a.metric_kind == "abs1d":
        x = np.sort(a.points[:, 0])
        e = tie(epsilon)
        hi = np.searchsorted(x, x + e, side="right")
        lo = np.searchsorted(x, x - e, side="left")
        return int(np.max(hi - lo))
    return int((a.distance_matrix() <= tie(epsilon)).sum(axis=1).max())


# -- box dimension ------------------------------------------------------------

@dataclass(frozen=True)
class BoxDimEstimate:
    upper_slope: float
    lower_slope: float
    curve: tuple[tuple[float, float], ...]
    fit_window: tuple[int, int]
    lsq_slope: float


def geometric_grid(eps_max: float, ratio: float, count: int) -> list[float]:
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    return [eps_max * ratio ** j for j in range(count)]


def tail_window(count: int, fraction: float = 1 / 3) -> tuple[int, int]:
    """Index range [start, count) of the last ceil(fraction * count) entries."""
    size = max(1, math.ceil(fraction * count))
    return count - size, count


def check_grid(eps_grid: Sequence[float], min_len: int = 6) -> list[float]:
    grid = [float(e) for e in eps_grid]
    if len(grid) < min_len:
        raise ValueError(f"epsilon grid too short: need at least {min_len} values, got {len(grid)}")
    if any(e <= 0 or e >= 1 for e in grid):
        raise ValueError("epsilon values must lie in (0, 1)")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be strictly decreasing")
    return grid


def guard_resolution(a: Alphabet, eps_min: float) -> None:
    """Refuse queries below four times the net spacing of a discretised continuum."""
    if a.resolution is not None and a.resolution > eps_min / 4 * (1 + 1e-9):
        raise ValueError(f"net resolution {a.resolution:g} is coarser than eps_min/4 = {eps_min / 4:g}")


def box_dimension(a: Alphabet, eps_grid: Sequence[float], window_fraction: float = 1 / 3) -> BoxDimEstimate:
    """Upper/lower box-dimension proxies: max/min of log r / log(1/eps) over the smallest eps."""
    grid = check_grid(eps_grid)
    ratios = [b / a_ for a_, b in zip(grid, grid[1:])]
    if max(ratios) - min(ratios) > 1e-6 * max(ratios):
        raise ValueError("epsilon grid must be geometric")
    guard_resolution(a, grid[-1])
    curve = tuple((e, math.log(min_spanning(a, None, e, "auto").count)) for e in grid)
    lo, hi = tail_window(len(grid), window_fraction)
    vals = [lr / math.log(1 / e) for e, lr in curve[lo:hi]]
    x = np.log(1 / np.asarray(grid))
    y = np.asarray([c[1] for c in curve])
    slope = float(np.polyfit(x[lo:hi], y[lo:hi], 1)[0]) if hi - lo >= 2 else float("nan")
    return BoxDimEstimate(max(vals), min(vals), curve, (lo, hi), slope)


def tame_growth_profile(a: Alphabet, theta: float, eps_grid: Sequence[float]) -> list[tuple[float, float]]:
    """(eps, eps^theta * log r(X, d, eps)) along the grid."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    return [(e, e ** theta * math.log(min_spanning(a, None, e, "auto").count)) for e in eps_grid]


def is_tame(profile: Sequence[tuple[float, float]], tail_fraction: float = 1 / 3) -> bool:
    """Empirical tameness: the profile's tail is nonincreasing and below its starting value."""
    vals = [v for _, v in profile]
    lo, _ = tail_window(len(vals), tail_fraction)
    tail = vals[lo:]
    return all(b <= a + 1e-12 for a, b in zip(tail, tail[1:])) and tail[-1] <= max(vals)


def entdim_scaling(a: Alphabet, s: float, eps_grid: Sequence[float],
                   window_fraction: float = 1 / 3) -> tuple[float, list[tuple[float, float]]]:
    """max over the tail window of log N_eps / (log 1/eps)^s, with the full profile."""
    prof = [(e, math.log(min_spanning(a, None, e, "auto").count) / math.log(1 / e) ** s)
            for e in eps_grid]
    lo, hi = tail_window(len(prof), window_fraction)
    return max(v for _, v in prof[lo:hi]), prof
