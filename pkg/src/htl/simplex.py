"""Simplices of the full simplex on n vertices, addressed by colexicographic rank.

A k-simplex is a strictly increasing tuple of 0-based vertices. Its rank is
sum_i C(v_i, i + 1), which does not depend on n.
"""

from __future__ import annotations

from math import comb
from typing import Iterator, Sequence

import numpy as np

Simplex = tuple[int, ...]

_INT64_MAX = np.iinfo(np.int64).max


class BinomialTable:
    """Pascal triangle C(v, j) for 0 <= v < n_max, 0 <= j <= k_max as int64.

    Grows on demand; raises OverflowError if an entry would not fit 64 bits.
    """

    def __init__(self, n_max: int = 64, k_max: int = 8):
        self.n_max = 0
        self.k_max = 0
        self.table = np.zeros((0, 0), dtype=np.int64)
        self.ensure(n_max, k_max)

    def ensure(self, n_max: int, k_max: int) -> None:
        if n_max <= self.n_max and k_max <= self.k_max:
            return
        n_max = max(n_max, self.n_max)
        k_max = max(k_max, self.k_max)
        t = np.zeros((n_max + 1, k_max + 2), dtype=np.int64)
        t[:, 0] = 1
        for v in range(1, n_max + 1):
            for j in range(1, k_max + 2):
                val = int(t[v - 1, j - 1]) + int(t[v - 1, j])
                if val > _INT64_MAX:
                    raise OverflowError(f"C({v},{j}) does not fit in 64 bits")
                t[v, j] = val
        self.table = t
        self.n_max = n_max
        self.k_max = k_max

    def column(self, j: int, n: int) -> np.ndarray:
        self.ensure(n, j)
        return self.table[:n, j]


BINOM = BinomialTable()


def validate_simplex(s: Sequence[int], n: int) -> Simplex:
    s = tuple(int(v) for v in s)
    for a, b in zip(s, s[1:]):
        if b <= a:
            raise ValueError(f"vertices must be strictly ascending: {s}")
    if s and (s[0] < 0 or s[-1] >= n):
        raise ValueError(f"vertex out of range [0, {n}): {s}")
    return s


def rank_simplex(s: Sequence[int], n: int) -> int:
    s = validate_simplex(s, n)
    return sum(comb(v, i + 1) for i, v in enumerate(s))


def unrank_simplex(r: int, n: int, k: int) -> Simplex:
    """Inverse of rank_simplex for a k-simplex on n vertices."""
    size = k + 1
    total = comb(n, size)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} out of range [0, {total})")
    out = []
    v = n - 1
    for j in range(size, 0, -1):
        while comb(v, j) > r:
            v -= 1
        out.append(v)
        r -= comb(v, j)
        v -= 1
    return tuple(reversed(out))


def boundary_faces(s: Sequence[int]) -> list[tuple[Simplex, int]]:
    """Facets of s with signs (-1)^i, i the position of the deleted vertex.

    A vertex has the empty boundary here; the augmentation map is handled by
    the callers that need reduced homology.
    """
    s = tuple(s)
    if len(s) <= 1:
        return []
    return [(s[:i] + s[i + 1:], -1 if i % 2 else 1) for i in range(len(s))]


def enumerate_simplices(n: int, k: int) -> Iterator[Simplex]:
    """All k-simplices on n vertices in colex order."""
    if k + 1 > n or k < -1:
        raise ValueError(f"no {k}-simplices on {n} vertices")
    yield from _colex(n, k + 1)


def _colex(bound: int, size: int) -> Iterator[Simplex]:
    # size-subsets of range(bound), colex ascending
    if size == 0:
        yield ()
        return
    for top in range(size - 1, bound):
        for rest in _colex(top, size - 1):
            yield rest + (top,)


def count_simplices(n: int, k: int) -> int:
    return comb(n, k + 1)


def rank_array(vertices: np.ndarray) -> np.ndarray:
    """Colex ranks of a (m, k+1) array of ascending vertex rows."""
    vertices = np.asarray(vertices, dtype=np.int64)
    m, size = vertices.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    BINOM.ensure(int(vertices.max()) + 1, size)
    t = BINOM.table
    r = np.zeros(m, dtype=np.int64)
    for i in range(size):
        r += t[vertices[:, i], i + 1]
    return r


def unrank_array(ranks: np.ndarray, n: int, k: int) -> np.ndarray:
    """Vectorized unrank: (m,) ranks of k-simplices -> (m, k+1) vertex array."""
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    size = k + 1
    out = np.zeros((len(ranks), size), dtype=np.int64)
    BINOM.ensure(n, size)
    for j in range(size, 0, -1):
        col = BINOM.table[:n, j]
        # largest v with C(v, j) <= r; col is non-decreasing in v
        v = np.searchsorted(col, ranks, side="right") - 1
        out[:, j - 1] = v
        ranks -= col[v]
    return out


def facet_rank_array(ranks: np.ndarray, n: int, k: int) -> np.ndarray:
    """(m, k+1) colex ranks of the facets of the given k-simplices.

    Column i is the facet deleting the i-th smallest vertex, matching the
    order of boundary_faces.
    """
    verts = unrank_array(ranks, n, k)
    out = np.zeros((len(verts), k + 1), dtype=np.int64)
    for i in range(k + 1):
        out[:, i] = rank_array(np.delete(verts, i, axis=1))
    return out


def all_simplices_array(n: int, k: int) -> np.ndarray:
    """(C(n,k+1), k+1) array of every k-simplex, row i having rank i."""
    return unrank_array(np.arange(comb(n, k + 1), dtype=np.int64), n, k)
