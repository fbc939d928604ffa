"""Dimension estimates regressed from entropy curves.

The eps -> 0 upper limit is proxied by the largest per-eps ratio over the fit window
(the smallest third of the eps values), the lower limit by the smallest one. Inside
each eps the n -> infinity limit is proxied by max/min over the largest third of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .counting import CurveOptions, EntropyCurve, entropy_curve
from .groups import FolnerSchedule
from .metric import tail_window
from .shift import ShiftSystem, product_system

TAU_HI = 5.0
TAU_LO = 0.2
MAX_EPS = 1 / math.e


@dataclass(frozen=True)
class DimensionEstimate:
    upper: float
    lower: float
    scaling_exponent_s: float = 1.0
    per_eps: tuple[tuple[float, float, float], ...] = ()
    fit_window: tuple[int, int] = (0, 0)
    diagnostics: str = ""
    lsq_slope: float = float("nan")
    quantity: str = "mdim"

    def to_json(self) -> dict:
        return {"quantity": self.quantity, "s": self.scaling_exponent_s, "upper": self.upper,
                "lower": self.lower, "fit_window": list(self.fit_window),
                "per_eps": [list(r) for r in self.per_eps], "lsq_slope": self.lsq_slope,
                "diagnostics": self.diagnostics}


def ratios_from_stats(stats: Sequence[tuple[float, float, float]], s: float = 1.0,
                      window_fraction: float = 1 / 3, min_eps: int = 6,
                      quantity: str = "mdim", note: str = "") -> DimensionEstimate:
    """Aggregate per-eps (eps, tail_max, tail_min) entropy proxies into an estimate."""
    stats = sorted(stats, key=lambda r: -r[0])
    if len(stats) < min_eps:
        raise ValueError(f"need at least {min_eps} distinct epsilon values, got {len(stats)}")
    if stats[0][0] >= MAX_EPS:
        raise ValueError("largest epsilon must be below 1/e so that (log 1/eps)^s increases in s")
    lo, hi = tail_window(len(stats), window_fraction)
    diag = [note] if note else []
    window = stats[lo:hi]
    if all(mx == 0 and mn == 0 for _, mx, mn in stats):
        return DimensionEstimate(0.0, 0.0, s, tuple(stats), (lo, hi),
                                 "; ".join(diag + ["degenerate curve: all entropy proxies are zero"]),
                                 0.0, quantity)
    ups = [mx / math.log(1 / e) ** s for e, mx, _ in window]
    lows = [mn / math.log(1 / e) ** s for e, _, mn in window]
    x = np.array([math.log(1 / e) ** s for e, _, _ in window])
    y = np.array([mx for _, mx, _ in window])
    slope = float(np.polyfit(x, y, 1)[0]) if len(window) >= 2 and np.ptp(x) > 0 else float("nan")
    diag.append(f"fit window eps in [{window[-1][0]:.3g}, {window[0][0]:.3g}]; "
                "limit order: n-tail then eps-window (heuristic, no convergence rate known)")
    return DimensionEstimate(max(ups), min(lows), s, tuple(stats), (lo, hi), "; ".join(diag), slope, quantity)


def mdim_estimate(curve: EntropyCurve, s: float = 1.0, window_fraction: float = 1 / 3,
                  tail_fraction: float = 1 / 3) -> DimensionEstimate:
    """Upper/lower (s-scaled) metric mean dimension proxies from an entropy curve."""
    return ratios_from_stats(curve.tail_stats(tail_fraction), s, window_fraction,
                             quantity="mdim" if s == 1 else "smdim",
                             note=f"curve={curve.label}; schedule={curve.schedule}")


@dataclass(frozen=True)
class EntDimEstimate:
    s_grid: tuple[float, ...]
    transition_lo: float
    transition_hi: float
    values_at_s: tuple[float, ...]
    diagnostics: str = ""

    def to_json(self) -> dict:
        return {"quantity": "entdim", "s_grid": list(self.s_grid), "transition_lo": self.transition_lo,
                "transition_hi": self.transition_hi, "values_at_s": list(self.values_at_s),
                "diagnostics": self.diagnostics}


def entdim_estimate(curve: EntropyCurve, s_grid: Sequence[float], tau_hi: float = TAU_HI,
                    tau_lo: float = TAU_LO, window_fraction: float = 1 / 3) -> EntDimEstimate:
    """Bracket the critical s where the s-scaled dimension drops from large to small."""
    s_grid = [float(s) for s in s_grid]
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])) or s_grid[0] <= 0 or s_grid[-1] > 2:
        raise ValueError("s_grid must be increasing inside (0, 2]")
    vals = [mdim_estimate(curve, s, window_fraction).upper for s in s_grid]
    notes = []
    above = [s for s, v in zip(s_grid, vals) if v > tau_hi]
    below = [s for s, v in zip(s_grid, vals) if v < tau_lo]
    if above:
        t_lo = max(above)
    else:
        t_lo = 0.0
        notes.append(f"no s in grid exceeds tau_hi={tau_hi:g}; lower end set to 0")
    if below:
        t_hi = min(below)
    else:
        t_hi = s_grid[-1]
        notes.append(f"no transition found: no s in grid falls below tau_lo={tau_lo:g}")
    return EntDimEstimate(tuple(s_grid), t_lo, t_hi, tuple(vals), "; ".join(notes))


def power_rule_experiment(sys: ShiftSystem, m: int, eps_grid: Sequence[float], n_grid: Sequence[int],
                          opts: CurveOptions | None = None) -> tuple[DimensionEstimate, DimensionEstimate, float]:
    """mdim over boxes F_n versus over L_n = {0, m, ..., (n-1)m}, each normalised by its own size."""
    if sys.group.rank != 1:
        raise ValueError("the power-rule experiment needs a rank-1 group")
    opts = opts or CurveOptions()
    full = mdim_estimate(entropy_curve(sys, FolnerSchedule.boxes(sys.group), eps_grid, n_grid, opts.mode, opts))
    sub = mdim_estimate(entropy_curve(sys, FolnerSchedule.subgroup(sys.group, m), eps_grid, n_grid,
                                      opts.mode, opts))
    ratio = sub.upper / full.upper if full.upper else float("nan")
    return full, sub, ratio


def product_experiment(a: ShiftSystem, eps_grid: Sequence[float], n_grid: Sequence[int],
                       opts: CurveOptions | None = None) -> tuple[DimensionEstimate, DimensionEstimate]:
    """Estimates for a system and for its self-product with the max metric."""
    opts = opts or CurveOptions()
    sched = FolnerSchedule.boxes(a.group)
    single = mdim_estimate(entropy_curve(a, sched, eps_grid, n_grid, opts.mode, opts))
    squared = mdim_estimate(entropy_curve(product_system(a, a), sched, eps_grid, n_grid, opts.mode, opts))
    return single, squared


def local_mdim_estimate(sys: ShiftSystem, constraints: Mapping, eps_grid: Sequence[float],
                        n_grid: Sequence[int], opts: CurveOptions | None = None) -> DimensionEstimate:
    """mdim estimate of the cylinder fixing the given coordinates."""
    opts = opts or CurveOptions()
    cons = tuple(sorted((tuple(k) if not isinstance(k, int) else (k,), int(v)) for k, v in constraints.items()))
    opts = replace(opts, constraints=cons)
    curve = entropy_curve(sys, FolnerSchedule.boxes(sys.group), eps_grid, n_grid, opts.mode, opts)
    est = mdim_estimate(curve)
    return replace(est, quantity="localmdim")
