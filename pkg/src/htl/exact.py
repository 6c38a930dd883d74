"""Exact enumeration over all subsets of a set of d-simplices.

Both properties enumerated here (a target chain lies in the span of the
chosen columns; the chosen columns are dependent) are monotone under adding
columns, so once one holds every completion is counted in closed form.
The result is a count per subset size, i.e. a polynomial in p.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import comb
from typing import Sequence, Union

DEFAULT_ENUM_CAP = 22


class EnumerationCapExceeded(RuntimeError):
    pass


def enum_cap() -> int:
    return int(os.environ.get("HTL_ENUM_CAP", DEFAULT_ENUM_CAP))


def check_cap(free: int, cap: int | None = None) -> None:
    cap = enum_cap() if cap is None else cap
    if free > cap:
        raise EnumerationCapExceeded(
            f"{free} free simplices exceeds the enumeration cap {cap}; use Monte Carlo"
        )


def _reduce(v: int, basis: dict) -> int:
    while v:
        b = basis.get(v.bit_length() - 1)
        if b is None:
            return v
        v ^= b
    return 0


def span_counts(columns: Sequence[int], target: int) -> list[int]:
    """counts[k] = number of k-subsets of columns whose GF(2) span holds target."""
    N = len(columns)
    counts = [0] * (N + 1)
    if target == 0:
        return [comb(N, k) for k in range(N + 1)]
    basis: dict[int, int] = {}

    def rec(i: int, size: int) -> None:
        if i == N:
            return
        rec(i + 1, size)
        v = _reduce(columns[i], basis)
        if not v:
            rec(i + 1, size + 1)
            return
        h = v.bit_length() - 1
        basis[h] = v
        if _reduce(target, basis) == 0:
            rem = N - i - 1
            for j in range(rem + 1):
                counts[size + 1 + j] += comb(rem, j)
        else:
            rec(i + 1, size + 1)
        del basis[h]

    rec(0, 0)
    return counts


def dependent_counts(columns: Sequence[int]) -> list[int]:
    """counts[k] = number of k-subsets of columns that are linearly dependent."""
    N = len(columns)
    counts = [0] * (N + 1)
    basis: dict[int, int] = {}

    def rec(i: int, size: int) -> None:
        if i == N:
            return
        rec(i + 1, size)
        v = _reduce(columns[i], basis)
        if not v:
            rem = N - i - 1
            for j in range(rem + 1):
                counts[size + 1 + j] += comb(rem, j)
            return
        h = v.bit_length() - 1
        basis[h] = v
        rec(i + 1, size + 1)
        del basis[h]

    rec(0, 0)
    return counts


def evaluate(counts: Sequence[int], p: Union[float, Fraction], absent: int = 0):
    """sum_k counts[k] p^k (1-p)^(N-k) * (1-p)^absent, in exact arithmetic.

    A float p is converted exactly to a Fraction, so the only rounding is the
    final conversion back to float.
    """
    exact = isinstance(p, Fraction)
    P = p if exact else Fraction(p)
    Q = 1 - P
    N = len(counts) - 1
    total = sum(c * P**k * Q ** (N - k) for k, c in enumerate(counts) if c)
    total *= Q**absent
    return total if exact else float(total)
