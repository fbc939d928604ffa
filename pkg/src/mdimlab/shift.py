"""Full shifts X^G over a finite alphabet with the summable product metric.

A configuration is finitely supported: it carries explicit symbols on a finite set
of sites and the system's default symbol everywhere else. The product metric
between two configurations is therefore an exact finite sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .groups import Element, FolnerSet, GroupSpec, add, box, neg, norm
from .metric import Alphabet, alphabet_from_json, product_alphabet

ENUMERATION_CAP = 2_000_000
PAIRWISE_CAP = 4096


class CapExceeded(RuntimeError):
    """An enumeration or materialisation would exceed a configured cap."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what}: {required} required, cap is {cap}")
        self.what = what
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class WeightFunction:
    """alpha_g = base ** |g| with the sup-norm |g|; alpha at the identity is 1."""

    base: float = 0.5
    kind: str = "geometric"

    def __post_init__(self):
        if self.kind != "geometric":
            raise ValueError("only geometric weights are supported")
        if not 0 < self.base < 1:
            raise ValueError("base must lie in (0, 1)")

    def __call__(self, g: Sequence[int]) -> float:
        return self.base ** norm(g)

    def shell(self, rank: int, k: int) -> int:
        """Number of elements of sup-norm exactly k in Z^rank."""
        return 1 if k == 0 else (2 * k + 1) ** rank - (2 * k - 1) ** rank

    def tail_outside_box(self, rank: int, k: int) -> float:
        """Sum of alpha_g over |g| > k."""
        if rank == 1:
            return 2 * self.base ** (k + 1) / (1 - self.base)
        total, j = 0.0, k + 1
        while True:
            term = self.shell(rank, j) * self.base ** j
            total += term
            if term < 1e-18 * max(total, 1e-300):
                return total
            j += 1

    def total(self, rank: int) -> float:
        """M = sum over all g of alpha_g."""
        return 1.0 + self.tail_outside_box(rank, 0)

    def mass_on(self, S: FolnerSet) -> float:
        return float(sum(self(g) for g in S))


def auto_window(group: GroupSpec, weights: WeightFunction, diameter: float, eps: float) -> FolnerSet:
    """Smallest centred box S with (sum of alpha_g outside S) * diam < eps / 2."""
    k = 0
    while weights.tail_outside_box(group.rank, k) * diameter >= eps / 2:
        k += 1
    return box(group.rank, -k, k)


@dataclass(frozen=True, eq=False)
class ShiftSystem:
    alphabet: Alphabet
    group: GroupSpec = GroupSpec(1)
    weights: WeightFunction = WeightFunction()
    window: FolnerSet | None = None
    default_symbol: int = 0
    label: str = ""

    def __post_init__(self):
        if self.window is None:
            object.__setattr__(self, "window", FolnerSet([self.group.identity]))
        if self.window.rank != self.group.rank:
            raise ValueError("window rank does not match the group")
        if self.group.identity not in self.window:
            raise ValueError("the truncation window must contain the identity")
        if not 0 <= self.default_symbol < max(len(self.alphabet), 1):
            raise ValueError("default symbol out of range")

    @property
    def total_weight(self) -> float:
        return self.weights.total(self.group.rank)

    @property
    def tail_bound(self) -> float:
        """(sum of alpha_g over g outside the window) * diam(X, d)."""
        return max(0.0, self.total_weight - self.weights.mass_on(self.window)) * self.alphabet.diameter

    def with_window(self, window: FolnerSet) -> "ShiftSystem":
        return ShiftSystem(self.alphabet, self.group, self.weights, window, self.default_symbol, self.label)

    def config(self, support: Mapping | None = None) -> "Configuration":
        return Configuration.of(self, support or {})


@dataclass(frozen=True)
class Configuration:
    """Symbols (alphabet indices) on finitely many sites; the default symbol elsewhere."""

    support: tuple[tuple[Element, int], ...]
    default: int

    @classmethod
    def of(cls, sys: ShiftSystem, support: Mapping) -> "Configuration":
        items = []
        for g, v in support.items():
            g = sys.group.element(g if not isinstance(g, int) else (g,))
            if not 0 <= int(v) < len(sys.alphabet):
                raise ValueError(f"symbol {v} outside the alphabet")
            if int(v) != sys.default_symbol:
                items.append((g, int(v)))
        return cls(tuple(sorted(items)), sys.default_symbol)

    def value(self, g: Element) -> int:
        return dict(self.support).get(tuple(g), self.default)

    def sites(self) -> set[Element]:
        return {g for g, _ in self.support}


def _check(sys: ShiftSystem, *xs: Configuration) -> None:
    n = len(sys.alphabet)
    for x in xs:
        if x.default != sys.default_symbol or any(not 0 <= v < n for _, v in x.support):
            raise ValueError("configuration does not belong to this system's alphabet")


def product_metric(sys: ShiftSystem, x: Configuration, y: Configuration) -> float:
    """D(x, y) = sum_g alpha_g d(x_g, y_g), exact for finitely supported configurations."""
    _check(sys, x, y)
    a = sys.alphabet
    total = 0.0
    for g in sorted(x.sites() | y.sites()):
        i, j = x.value(g), y.value(g)
        if i != j:
            total += sys.weights(g) * a.pairwise_distance(i, j)
    return total


def shift_apply(sys: ShiftSystem, h: Sequence[int], x: Configuration) -> Configuration:
    """(sigma_h x)_g = x_{g+h}."""
    h = sys.group.element(h if not isinstance(h, int) else (h,))
    return Configuration(tuple(sorted((add(g, neg(h)), v) for g, v in x.support)), x.default)


@dataclass(frozen=True)
class BowenContext:
    system: ShiftSystem
    F: FolnerSet
    mode: str = "sup"

    def __post_init__(self):
        if self.mode not in ("sup", "average"):
            raise ValueError("mode must be 'sup' or 'average'")
        if len(self.F) == 0:
            raise ValueError("F must be non-empty")


def bowen_distance(ctx: BowenContext, x: Configuration, y: Configuration) -> float:
    """max (sup mode) or mean (average mode) over h in F of D(sigma_h x, sigma_h y)."""
    vals = [product_metric(ctx.system, shift_apply(ctx.system, h, x), shift_apply(ctx.system, h, y))
            for h in ctx.F]
    return max(vals) if ctx.mode == "sup" else sum(vals) / len(vals)


class WindowEnumeration:
    """All configurations on the sites S*F with symbols from ``net``, in lexicographic order.

    Positionally indexed and restartable: ``enum[i]`` is the i-th configuration and
    iteration always starts from the beginning.
    """

    def __init__(self, sys: ShiftSystem, net: Sequence[int], F: FolnerSet,
                 cap: int = ENUMERATION_CAP, constraints: Mapping | None = None):
        self.system = sys
        if len(net) == 0:
            raise ValueError("net must be non-empty")
        self.F = F
        self.sites: tuple[Element, ...] = tuple(sys.window.product(F))
        self.constraints: dict[Element, int] = {}
        for g, v in (constraints or {}).items():
            g = sys.group.element(g if not isinstance(g, int) else (g,))
            if g not in self.sites:
                raise ValueError(f"constraint site {g} lies outside the window S*F")
            self.constraints[g] = int(v)
        free = [s for s in self.sites if s not in self.constraints]
        self.free_sites = tuple(free)
        self.size = len(net) ** len(free)
        if self.size > cap:
            raise CapExceeded("window configurations", self.size, cap)
        self.net = tuple(int(i) for i in net)

    def __len__(self) -> int:
        return self.size

    def array(self) -> np.ndarray:
        """(N, |S*F|) alphabet indices, one row per configuration, columns in site order."""
        k = len(self.free_sites)
        net = np.asarray(self.net)
        if k:
            digits = np.indices((len(net),) * k).reshape(k, -1).T
            free_vals = net[digits]
        else:
            free_vals = np.zeros((1, 0), dtype=int)
        out = np.empty((self.size, len(self.sites)), dtype=int)
        fi = 0
        for col, s in enumerate(self.sites):
            if s in self.constraints:
                out[:, col] = self.constraints[s]
            else:
                out[:, col] = free_vals[:, fi]
                fi += 1
        return out

    def __getitem__(self, i: int) -> Configuration:
        if not 0 <= i < self.size:
            raise IndexError(i)
        vals = {}
        rem = i
        base = len(self.net)
        free_syms = []
        for _ in self.free_sites:
            rem, d = divmod(rem, base)
            free_syms.append(self.net[d])
        free_syms.reverse()
        it = iter(free_syms)
        for s in self.sites:
            vals[s] = self.constraints[s] if s in self.constraints else next(it)
        return Configuration.of(self.system, vals)

    def __iter__(self) -> Iterator[Configuration]:
        for i in range(self.size):
            yield self[i]


def window_configurations(sys: ShiftSystem, net: Sequence[int], F: FolnerSet,
                          cap: int = ENUMERATION_CAP) -> WindowEnumeration:
    return WindowEnumeration(sys, net, F, cap)


def bowen_matrices(sys: ShiftSystem, configs: np.ndarray, sites: Sequence[Element],
                   F: FolnerSet) -> np.ndarray:
    """Stack over h in F of the matrices D(sigma_h x, sigma_h y) for all configuration pairs.

    Configurations agree (default symbol) outside ``sites``, so each entry is exact.
    """
    n = len(configs)
    if n > PAIRWISE_CAP:
        raise CapExceeded("pairwise Bowen distances", n, PAIRWISE_CAP)
    used = np.unique(configs)
    dsym = sys.alphabet.distance_matrix(used)
    pos = np.searchsorted(used, configs)
    out = np.zeros((len(F), n, n))
    for k, c in enumerate(sites):
        col = pos[:, k]
        dk = dsym[np.ix_(col, col)]
        for t, h in enumerate(F):
            w = sys.weights(add(c, neg(h)))
            out[t] += w * dk
    return out


def bowen_matrix(sys: ShiftSystem, configs: np.ndarray, sites: Sequence[Element],
                 F: FolnerSet, mode: str = "sup") -> np.ndarray:
    stack = bowen_matrices(sys, configs, sites, F)
    return stack.max(axis=0) if mode == "sup" else stack.mean(axis=0)


def product_system(a: ShiftSystem, b: ShiftSystem) -> ShiftSystem:
    """Shift over the product alphabet with the max metric; symbol (i, j) has index i*|B| + j."""
    if a.group != b.group or a.weights != b.weights:
        raise ValueError("product systems need the same group and weights")
    A, B = a.alphabet, b.alphabet
    if {A.metric_kind, B.metric_kind} <= {"abs1d", "supmd"} and \
            (A.factors is not None or A.metric_kind == "abs1d") and \
            (B.factors is not None or B.metric_kind == "abs1d"):
        alph = product_alphabet(A, B)
    else:
        da, db = A.distance_matrix(), B.distance_matrix()
        mat = np.maximum(da[:, None, :, None], db[None, :, None, :]).reshape(len(A) * len(B), -1)
        labels = np.arange(len(A) * len(B), dtype=float)
        alph = Alphabet(labels, "matrix", f"{A.label} x {B.label}", matrix=mat)
    window = FolnerSet(set(a.window) | set(b.window))
    default = a.default_symbol * len(B) + b.default_symbol
    return ShiftSystem(alph, a.group, a.weights, window, default, f"{a.label} x {b.label}")


def coordinate_scaling(sys: ShiftSystem, factor: float) -> ShiftSystem:
    """Multiply every alphabet point by ``factor``: a bi-Lipschitz conjugacy of full shifts."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    return ShiftSystem(sys.alphabet.scaled(factor), sys.group, sys.weights, sys.window,
                       sys.default_symbol, f"{sys.label}*{factor:g}")


def system_from_json(doc: dict) -> ShiftSystem:
    """{"group": {"rank": d}, "alphabet": {...}, "weights": {"base": b}, "default_symbol": i}."""
    if "alphabet" not in doc:
        raise ValueError("system.alphabet: missing")
    rank = int(doc.get("group", {}).get("rank", 1))
    group = GroupSpec(rank)
    weights = WeightFunction(float(doc.get("weights", {}).get("base", 0.5)))
    alph = alphabet_from_json(doc["alphabet"])
    window = None
    if "window_radius" in doc:
        r = int(doc["window_radius"])
        window = box(rank, -r, r)
    return ShiftSystem(alph, group, weights, window, int(doc.get("default_symbol", 0)),
                       doc.get("label", alph.label))
