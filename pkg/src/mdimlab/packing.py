"""Packing and covering on finite conflict graphs.

Vertex sets are encoded as Python int bitsets. ``compat[i]`` is the bitset of
vertices that may coexist with ``i`` in a packing (a separated set); ``cover[i]``
is the bitset of vertices lying in the ball around ``i``.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np


class OracleTooLarge(ValueError):
    """Raised when an exact or exhaustive routine is asked to handle too many points."""


def bitsets_from_bool(mat: np.ndarray) -> list[int]:
    """Row i of a boolean matrix as an int bitset."""
    mat = np.asarray(mat, dtype=bool)
    n = mat.shape[1]
    out = []
    # pack via bytes: much faster than summing powers of two per entry
    padded = np.zeros((mat.shape[0], (n + 7) // 8 * 8), dtype=bool)
    padded[:, :n] = mat
    packed = np.packbits(padded, axis=1, bitorder="little")
    for row in packed:
        out.append(int.from_bytes(row.tobytes(), "little"))
    return out


def _members(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


# -- packings -----------------------------------------------------------------

def greedy_packing(compat: Sequence[int], order: Sequence[int] | None = None) -> list[int]:
    """Accept vertices in ``order`` (default: index order) when compatible with all accepted."""
    n = len(compat)
    order = range(n) if order is None else order
    chosen: list[int] = []
    allowed = (1 << n) - 1
    for v in order:
        if allowed >> v & 1:
            chosen.append(v)
            allowed &= compat[v]
    return chosen


def max_weight_packing(compat: Sequence[int], weights: Sequence[float] | None = None) -> tuple[float, list[int]]:
    """Exact maximum-weight packing, i.e. a maximum-weight clique of the compatibility graph.

    Branch and bound with a greedy colouring bound (each colour class can contribute
    at most its heaviest vertex). Unit weights give the maximum separated set.
    """
    n = len(compat)
    if n == 0:
        return 0.0, []
    w = [1.0] * n if weights is None else [float(x) for x in weights]
    if min(w) < 0:
        raise ValueError("weights must be nonnegative")
    # warm start from the greedy heaviest-first packing
    order = sorted(range(n), key=lambda i: (-w[i], i))
    init = greedy_packing(compat, order)
    best_val = sum(w[i] for i in init)
    best_set = sorted(init)

    def colour_bound(P: int) -> list[tuple[int, float]]:
        # returns (vertex, cumulative bound) in colouring order
        seq: list[tuple[int, float]] = []
        cum = 0.0
        remaining = P
        while remaining:
            cls_max = 0.0
            cls: list[int] = []
            avail = remaining
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                cls.append(v)
                avail &= ~compat[v] & ~low  # class members must be mutually incompatible
                remaining &= ~low
                cls_max = max(cls_max, w[v])
            cum += cls_max
            seq.extend((v, cum) for v in cls)
        return seq

    def expand(cur_val: float, cur: list[int], P: int) -> None:
        nonlocal best_val, best_set
        seq = colour_bound(P)
        for v, bound in reversed(seq):
            if cur_val + bound <= best_val:
                return
            nv = cur_val + w[v]
            newP = P & compat[v]
            cur.append(v)
            if nv > best_val:
                best_val, best_set = nv, sorted(cur)
            if newP:
                expand(nv, cur, newP)
            cur.pop()
            P &= ~(1 << v)

    expand(0.0, [], (1 << n) - 1)
    return best_val, best_set


def exhaustive_packing(compat: Sequence[int], weights: Sequence[float] | None = None,
                       limit: int = 12) -> tuple[float, list[int]]:
    """Brute force over all subsets; the independent oracle for :func:`max_weight_packing`."""
    n = len(compat)
    if n > limit:
        raise OracleTooLarge(f"exhaustive oracle limited to {limit} points, got {n}")
    w = [1.0] * n if weights is None else [float(x) for x in weights]
    best_val, best_set = 0.0, []
    for mask in range(1 << n):
        members = _members(mask)
        ok = all(compat[a] >> b & 1 for a, b in itertools.combinations(members, 2))
        if ok:
            val = sum(w[i] for i in members)
            if val > best_val:
                best_val, best_set = val, members
    return best_val, best_set


# -- coverings ----------------------------------------------------------------

def greedy_cover(cover) -> list[int]:
    """Standard greedy set cover; ties go to the lowest index.

    ``cover`` is either a list of bitsets or a square boolean matrix (row i = ball i).
    """
    mat = _as_matrix(cover)
    n = mat.shape[0]
    uncovered = np.ones(n, dtype=bool)
    gains = mat.sum(axis=1).astype(np.int64)
    chosen = []
    while uncovered.any():
        best = int(np.argmax(gains))  # argmax returns the first maximum
        chosen.append(best)
        newly = mat[best] & uncovered
        gains -= mat[:, newly].sum(axis=1)
        uncovered &= ~newly
    return chosen


def _as_matrix(cover) -> np.ndarray:
    if isinstance(cover, np.ndarray):
        return cover.astype(bool, copy=False)
    n = len(cover)
    mat = np.zeros((n, n), dtype=bool)
    for i, c in enumerate(cover):
        mat[i, _members(c)] = True
    return mat


def min_cover(cover: Sequence[int]) -> list[int]:
    """Exact minimum set cover by branch and bound (branch on the rarest uncovered element)."""
    n = len(cover)
    if n == 0:
        return []
    covered_by = [0] * n
    for i, c in enumerate(cover):
        for v in _members(c):
            covered_by[v] |= 1 << i
    best = greedy_cover(cover)
    max_size = max(c.bit_count() for c in cover)

    def rec(uncovered: int, chosen: list[int]) -> None:
        nonlocal best
        if not uncovered:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        lb = math.ceil(uncovered.bit_count() / max_size)
        if len(chosen) + lb >= len(best):
            return
        # element with the fewest candidate balls
        options = None
        for v in _members(uncovered):
            opts = covered_by[v]
            if options is None or opts.bit_count() < options.bit_count():
                options = opts
        cands = sorted(_members(options), key=lambda i: (-(cover[i] & uncovered).bit_count(), i))
        for i in cands:
            chosen.append(i)
            rec(uncovered & ~cover[i], chosen)
            chosen.pop()

    rec((1 << n) - 1, [])
    return sorted(best)


def exhaustive_cover(cover: Sequence[int], limit: int = 12) -> list[int]:
    """Smallest covering subfamily by enumerating subsets in increasing size."""
    n = len(cover)
    if n > limit:
        raise OracleTooLarge(f"exhaustive oracle limited to {limit} points, got {n}")
    full = (1 << n) - 1
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            acc = 0
            for i in combo:
                acc |= cover[i]
            if acc == full:
                return list(combo)
    return list(range(n))


# -- mass coverings (Katok counts) -------------------------------------------

def greedy_mass_cover(cover, mass: Sequence[float], target: float) -> list[int]:
    """Pick balls by largest uncovered mass until the covered mass reaches ``target``.

    Ties go to the lowest index.
    """
    mat = _as_matrix(cover)
    m = np.asarray(mass, dtype=float)
    uncovered = np.ones(len(m), dtype=bool)
    gains = mat.astype(float) @ m
    chosen: list[int] = []
    while float(m[~uncovered].sum()) < target - 1e-12:
        best = int(np.argmax(gains))
        if gains[best] <= 0.0:
            raise RuntimeError("greedy mass cover stalled before reaching the target mass")
        chosen.append(best)
        newly = mat[best] & uncovered
        gains -= mat[:, newly].astype(float) @ m[newly]
        gains[np.abs(gains) < 1e-15] = 0.0
        uncovered &= ~newly
    return chosen


def exhaustive_mass_cover(cover: Sequence[int], mass: Sequence[float], target: float,
                          limit: int = 12) -> list[int]:
    """Fewest balls reaching ``target`` mass, by enumerating subfamilies in increasing size."""
    n = len(cover)
    if n > limit:
        raise OracleTooLarge(f"exhaustive oracle limited to {limit} centres, got {n}")
    m = np.asarray(mass, dtype=float)
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            acc = 0
            for i in combo:
                acc |= cover[i]
            if m[_members(acc)].sum() >= target - 1e-12:
                return list(combo)
    raise RuntimeError("total mass below target")
