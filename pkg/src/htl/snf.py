"""Smith normal form and rank over the integers, in exact arithmetic."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field


def _as_rows(m) -> list[list[int]]:
    if hasattr(m, "tolist"):
        m = m.tolist()
    return [[int(x) for x in row] for row in m]


@dataclass(frozen=True)
class SnfResult:
    diagonal: tuple[int, ...]
    shape: tuple[int, int] = (0, 0)
    torsion: Counter = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "torsion", Counter(x for x in self.diagonal if x > 1))

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def torsion_list(self) -> list[int]:
        return sorted(self.torsion.elements())


def smith_normal_form(m) -> SnfResult:
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix.

    Pivots on a smallest-magnitude entry of the remaining block, clears its
    row and column by Euclidean steps, and folds in any row whose entries
    the pivot does not divide before moving on.
    """
    A = _as_rows(m)
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            Ai = A[i]
            for j in range(t, cols):
                a = Ai[j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
        while True:
            piv = A[t][t]
            done = True
            for i in range(t + 1, rows):
                a = A[i][t]
                if a:
                    qt = a // piv
                    if qt:
                        Ai, At = A[i], A[t]
                        for j in range(t, cols):
                            if At[j]:
                                Ai[j] -= qt * At[j]
                    if A[i][t]:
                        done = False
            At = A[t]
            for j in range(t + 1, cols):
                a = At[j]
                if a:
                    qt = a // piv
                    if qt:
                        for row in A[t:]:
                            if row[t]:
                                row[j] -= qt * row[t]
                    if At[j]:
                        done = False
            if not done:
                # move the smallest leftover in row/column t onto the pivot
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, rows) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, cols) if A[t][j]]
                _, i, j = min(cand)
                if i != t:
                    A[t], A[i] = A[i], A[t]
                else:
                    for row in A:
                        row[t], row[j] = row[j], row[t]
                continue
            bad = None
            for i in range(t + 1, rows):
                if any(x % piv for x in A[i][t + 1:]):
                    bad = i
                    break
            if bad is None:
                break
            At, Ab = A[t], A[bad]
            for j in range(t, cols):
                At[j] += Ab[j]
        diag.append(abs(A[t][t]))
        t += 1
    return SnfResult(tuple(diag), (rows, cols))


def integer_rank(m) -> int:
    """Rank via fraction-free (Bareiss) elimination."""
    A = _as_rows(m)
    rows = len(A)
    cols = len(A[0]) if rows else 0
    r = 0
    prev = 1
    for j in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if A[i][j]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        Ar = A[r]
        piv = Ar[j]
        for i in range(r + 1, rows):
            Ai = A[i]
            a = Ai[j]
            for k in range(j, cols):
                Ai[k] = (piv * Ai[k] - a * Ar[k]) // prev
        prev = piv
        r += 1
    return r
