"""Topological pressure at scale eps for constant-plus-coordinate potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .counting import (CurveOptions, _enum_net, _pack_counts, run_cells, shift_lower_log, window_bowen)
from .dimensions import DimensionEstimate, ratios_from_stats
from .groups import FolnerSchedule, FolnerSet
from .metric import OracleTooLarge
from .shift import CapExceeded, Configuration, ShiftSystem


@dataclass(frozen=True)
class Potential:
    """f(x) = c + phi[x_e]; ``phi`` None means the coordinate part vanishes."""

    c: float = 0.0
    phi: tuple[float, ...] | None = None
    label: str = ""

    @classmethod
    def constant(cls, c: float) -> "Potential":
        return cls(float(c), None, f"const({c:g})")

    @classmethod
    def coordinate(cls, phi: Sequence[float], label: str = "coord") -> "Potential":
        return cls(0.0, tuple(float(v) for v in phi), label)

    @property
    def kind(self) -> str:
        if self.phi is None:
            return "constant"
        return "coordinate" if self.c == 0 else "sum"

    @property
    def has_coordinate(self) -> bool:
        return self.phi is not None and any(v != 0 for v in self.phi)

    def __add__(self, other: "Potential") -> "Potential":
        if self.phi is None or other.phi is None:
            phi = self.phi if other.phi is None else other.phi
        else:
            phi = tuple(a + b for a, b in zip(self.phi, other.phi))
        return Potential(self.c + other.c, phi, f"{self.label}+{other.label}")

    def scaled(self, k: float) -> "Potential":
        phi = None if self.phi is None else tuple(k * v for v in self.phi)
        return Potential(self.c * k, phi, f"{k:g}*{self.label}")

    def table(self, sys: ShiftSystem) -> np.ndarray:
        """phi as an array over the alphabet (zeros when absent)."""
        n = len(sys.alphabet)
        if self.phi is None:
            return np.zeros(n)
        if len(self.phi) != n:
            raise ValueError("phi must have one value per alphabet point")
        return np.asarray(self.phi)

    def sup_norm(self, sys: ShiftSystem) -> float:
        """||f|| = max |c + phi|."""
        return float(np.max(np.abs(self.c + self.table(sys))))

    def __call__(self, sys: ShiftSystem, x: Configuration) -> float:
        return self.c + float(self.table(sys)[x.value(sys.group.identity)])

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "c": self.c}
        if self.phi is not None:
            doc["phi"] = list(self.phi)
        return doc


def potential_from_json(doc: Mapping) -> Potential:
    kind = doc.get("kind", "constant")
    if kind not in ("constant", "coordinate", "sum"):
        raise ValueError(f"potential.kind: unknown kind {kind!r}")
    c = float(doc.get("c", 0.0)) if kind != "coordinate" else 0.0
    phi = doc.get("phi")
    if kind != "constant" and phi is None:
        raise ValueError("potential.phi: required for coordinate and sum potentials")
    return Potential(c, None if kind == "constant" else tuple(float(v) for v in phi), kind)


def birkhoff_sum(sys: ShiftSystem, F: FolnerSet, f: Potential, x: Configuration) -> float:
    """S_F f(x) = sum over g in F of f(g x); (g x) at the identity is x_g."""
    table = f.table(sys)
    return f.c * len(F) + float(sum(table[x.value(g)] for g in F))


def _window_log_pressure(sys, F, f, eps, mode, net, exact_threshold, cap) -> tuple[float, bool]:
    enum, arr, dist = window_bowen(sys, F, net, None, cap)
    const = f.c * len(F)
    if not f.has_coordinate:
        count, exact = _pack_counts(dist, eps, mode, exact_threshold)
        return math.log(count) + const, exact
    cols = [enum.sites.index(g) for g in F]
    log_w = f.table(sys)[arr[:, cols]].sum(axis=1)
    val, exact = _pack_counts(dist, eps, mode, exact_threshold, log_w)
    return val + const, exact


def pressure_count(sys: ShiftSystem, F: FolnerSet, f: Potential, epsilon: float, mode: str = "auto",
                   net: Sequence[int] | None = None, exact_threshold: int | None = None,
                   cap: int | None = None) -> float:
    """log of the largest sum of exp(S_F f) over (d_F, eps)-separated window configurations.

    The constant part of f multiplies every weight by the same factor, so it is
    added after the search; exact mode solves the max-weight packing by branch and bound.
    """
    opts = CurveOptions()
    return _window_log_pressure(sys, F, f, epsilon, mode, net, exact_threshold or opts.exact_threshold,
                                cap or opts.cap)[0]


@dataclass(frozen=True)
class PressureRow:
    epsilon: float
    n: int
    folner_size: int
    log_pressure: float
    method: str

    @property
    def normalized(self) -> float:
        return self.log_pressure / self.folner_size


@dataclass(frozen=True)
class PressureCurve:
    rows: tuple[PressureRow, ...]
    potential_label: str = ""

    def tail_stats(self, tail_fraction: float = 1 / 3) -> list[tuple[float, float, float]]:
        out = []
        for eps in sorted({r.epsilon for r in self.rows}, reverse=True):
            rows = sorted((r for r in self.rows if r.epsilon == eps), key=lambda r: r.n)
            k = max(1, math.ceil(tail_fraction * len(rows)))
            vals = [r.normalized for r in rows[-k:]]
            out.append((eps, max(vals), min(vals)))
        return out

    def to_json(self) -> list[dict]:
        return [{"epsilon": r.epsilon, "n": r.n, "folner_size": r.folner_size,
                 "log_pressure": r.log_pressure, "method": r.method} for r in self.rows]


def pressure_cell(sys: ShiftSystem, schedule: FolnerSchedule, eps: float, n: int, f: Potential,
                  opts: CurveOptions) -> PressureRow:
    """Same routing as the entropy curve: enumeration for small n, product bound otherwise."""
    F = schedule(n)
    if n <= opts.enum_n_max:
        net = _enum_net(sys, F, eps, opts, len(sys.window.product(F)))
        if net is not None:
            try:
                val, exact = _window_log_pressure(sys, F, f, eps, opts.mode, net, opts.exact_threshold,
                                                  opts.cap)
                full = len(net) == len(sys.alphabet)
                return PressureRow(eps, n, len(F), val, "exact" if exact and full else "greedy")
            except (CapExceeded, OracleTooLarge):
                pass
    log_w = f.table(sys) if f.has_coordinate else None
    val = shift_lower_log(sys, F, eps, log_w) + f.c * len(F)
    return PressureRow(eps, n, len(F), val, "closed-form-lower")


def pressure_curve(sys: ShiftSystem, schedule: FolnerSchedule, f: Potential, eps_grid: Sequence[float],
                   n_grid: Sequence[int], opts: CurveOptions | None = None,
                   rescale: bool = False) -> PressureCurve:
    """Rows of log P_{F_n}(f, eps); with ``rescale`` the potential at eps is f * log(1/eps)."""
    opts = opts or CurveOptions()
    cells = []
    for e in eps_grid:
        fe = f.scaled(math.log(1 / e)) if rescale else f
        cells.extend((sys, schedule, float(e), int(n), fe, opts) for n in n_grid)
    rows = run_cells(pressure_cell, cells, opts.workers)
    return PressureCurve(tuple(rows), f.label)


def pressure_mdim(sys: ShiftSystem, schedule: FolnerSchedule, f: Potential, eps_grid: Sequence[float],
                  n_grid: Sequence[int], opts: CurveOptions | None = None) -> DimensionEstimate:
    """(1/log(1/eps)) P(f log(1/eps), eps), aggregated like the plain estimate."""
    curve = pressure_curve(sys, schedule, f, eps_grid, n_grid, opts, rescale=True)
    return ratios_from_stats(curve.tail_stats(), 1.0, quantity="pressure-mdim",
                             note=f"potential={f.label}; order: rescale, n-tail, eps-window")
