"""The acting group Z^d, box Foelner sets and their defect checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Element = tuple[int, ...]


@dataclass(frozen=True)
class GroupSpec:
    """The group Z^rank under coordinatewise addition."""

    rank: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")

    @property
    def identity(self) -> Element:
        return (0,) * self.rank

    def element(self, *coords: int) -> Element:
        if len(coords) == 1 and not isinstance(coords[0], int):
            coords = tuple(coords[0])
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(coords)}")
        return tuple(int(c) for c in coords)


def add(g: Element, h: Element) -> Element:
    return tuple(a + b for a, b in zip(g, h))


def neg(g: Element) -> Element:
    return tuple(-a for a in g)


def norm(g: Element) -> int:
    """Sup-norm of a group element."""
    return max((abs(a) for a in g), default=0)


class FolnerSet(tuple):
    """A non-empty finite subset of Z^d, deduplicated and lexicographically sorted."""

    def __new__(cls, elements: Iterable[Sequence[int]]):
        elems = sorted({tuple(int(c) for c in e) for e in elements})
        if not elems:
            raise ValueError("a Foelner set must be non-empty")
        ranks = {len(e) for e in elems}
        if len(ranks) != 1:
            raise ValueError("mixed-rank elements")
        return super().__new__(cls, elems)

    @property
    def rank(self) -> int:
        return len(self[0])

    def translate(self, g: Element) -> "FolnerSet":
        return FolnerSet(add(x, g) for x in self)

    def inverse(self) -> "FolnerSet":
        return FolnerSet(neg(x) for x in self)

    def product(self, other: "FolnerSet") -> "FolnerSet":
        """The set {a + b : a in self, b in other}."""
        return FolnerSet(add(a, b) for a in self for b in other)

    def bounding_box(self) -> tuple[Element, Element]:
        lo = tuple(min(e[i] for e in self) for i in range(self.rank))
        hi = tuple(max(e[i] for e in self) for i in range(self.rank))
        return lo, hi


def box(rank: int, lo: int, hi: int) -> FolnerSet:
    """All elements with every coordinate in [lo, hi]."""
    return FolnerSet(itertools.product(range(lo, hi + 1), repeat=rank))


def folner_boxes(group: GroupSpec, n: int) -> FolnerSet:
    """The box {0, ..., n-1}^rank."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return box(group.rank, 0, n - 1)


def subgroup_boxes(group: GroupSpec, m: int, n: int) -> FolnerSet:
    """L_n = {0, m, 2m, ..., (n-1)m} inside mZ (rank 1 only)."""
    if group.rank != 1:
        raise ValueError("subgroup boxes are only defined for Z (rank 1)")
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return FolnerSet((j * m,) for j in range(n))


@dataclass(frozen=True)
class FolnerSchedule:
    """A lazily indexed family n -> F_n with a label reported alongside results."""

    group: GroupSpec
    label: str
    builder: Callable[[int], FolnerSet] = field(compare=False, repr=False)
    index_step: int = 1  # subgroup index [G:H]; 1 for the full group
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, n: int) -> FolnerSet:
        if n not in self._cache:
            self._cache[n] = self.builder(n)
        return self._cache[n]

    @classmethod
    def boxes(cls, group: GroupSpec) -> "FolnerSchedule":
        return cls(group, f"boxes-Z{group.rank}", lambda n: folner_boxes(group, n))

    @classmethod
    def subgroup(cls, group: GroupSpec, m: int) -> "FolnerSchedule":
        return cls(group, f"subgroup-{m}Z", lambda n: subgroup_boxes(group, m, n), index_step=m)


def folner_defect(schedule: FolnerSchedule, g: Sequence[int], n: int) -> Fraction:
    """|gF_n symmetric-difference F_n| / |F_n|, exactly."""
    F = schedule(n)
    g = schedule.group.element(g)
    shifted = {add(g, x) for x in F}
    return Fraction(len(shifted.symmetric_difference(F)), len(F))


def two_sided_defect(schedule: FolnerSchedule, g: Sequence[int], n: int) -> Fraction:
    """|F_n g symmetric-difference F_n| / |F_n|; equals the left defect for Z^d."""
    F = schedule(n)
    g = schedule.group.element(g)
    shifted = {add(x, g) for x in F}
    return Fraction(len(shifted.symmetric_difference(F)), len(F))


def tempered_constant(schedule: FolnerSchedule, up_to_n: int) -> Fraction:
    """max over 2 <= n <= up_to_n of |U_{j<n} F_j^{-1} F_n| / |F_n|."""
    if up_to_n < 2:
        raise ValueError("up_to_n must be >= 2")
    best = Fraction(0)
    union_inv: set[Element] = set(schedule(1).inverse())
    for n in range(2, up_to_n + 1):
        F = schedule(n)
        covered = {add(a, b) for a in union_inv for b in F}
        best = max(best, Fraction(len(covered), len(F)))
        union_inv.update(F.inverse())
    return best
