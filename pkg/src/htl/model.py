"""Sampling from Y(n, p, d) and the plain-text complex file format.

Every trial draws from its own numpy Philox stream whose 128-bit key is
``(master_seed << 64) | trial``. Streams are therefore independent of the
order in which trials are run. Two samplers exist: one Bernoulli draw per
d-simplex, and a geometric-skip sampler used when p < 2**-6.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from math import comb
from typing import Optional, Union

import numpy as np

from .simplex import rank_simplex, unrank_array, validate_simplex

Prob = Union[float, Fraction]

RNG_FAMILY = f"numpy-{np.__version__}/Philox4x64-10"
GEOMETRIC_THRESHOLD = 2.0**-6
MASK64 = (1 << 64) - 1


class ComplexFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_probability(text: Union[str, float, int, Fraction]) -> Prob:
    """Accept decimals or exact fractions "a/b"."""
    if isinstance(text, (Fraction, float)):
        return text
    if isinstance(text, int):
        return Fraction(text)
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


@dataclass(frozen=True)
class ModelParams:
    n: int
    d: int
    p: Prob = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n < self.d + 1:
            raise ValueError(f"need n >= d + 1, got n={self.n}, d={self.d}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def w(self) -> Prob:
        return self.p * self.n

    @property
    def num_top(self) -> int:
        """Number of d-simplices of the full simplex."""
        return comb(self.n, self.d + 1)

    @property
    def num_codim1(self) -> int:
        return comb(self.n, self.d)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(master_seed: int, index: int) -> int:
    """Derive a 64-bit child seed, e.g. one per sweep grid point."""
    return splitmix64(splitmix64(master_seed & MASK64) ^ (index & MASK64))


def trial_generator(master_seed: int, trial: int) -> np.random.Generator:
    key = ((master_seed & MASK64) << 64) | (trial & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def choose_sampler(p: Prob) -> str:
    return "geometric" if 0 < p < GEOMETRIC_THRESHOLD else "bernoulli"


def draw_ranks(num: int, p: Prob, gen: np.random.Generator, sampler: str = "auto") -> np.ndarray:
    """Sorted ranks of the present simplices among ``num`` candidates."""
    if p <= 0 or num == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(num, dtype=np.int64)
    pf = float(p)
    if sampler == "auto":
        sampler = choose_sampler(p)
    if sampler == "bernoulli":
        return np.flatnonzero(gen.random(num) < pf).astype(np.int64)
    if sampler != "geometric":
        raise ValueError(f"unknown sampler {sampler!r}")
    # gaps between successes are Geometric(p) on {1, 2, ...}
    batch = int(num * pf + 6 * np.sqrt(num * pf) + 16)
    chunks = []
    pos = -1
    while True:
        idx = pos + np.cumsum(gen.geometric(pf, size=batch))
        if idx[-1] >= num:
            chunks.append(idx[idx < num])
            break
        chunks.append(idx)
        pos = int(idx[-1])
    return np.concatenate(chunks).astype(np.int64)


@dataclass(frozen=True, eq=False)
class ComplexSample:
    """The d-layer of one complex; the full (d-1)-skeleton is implicit."""

    params: ModelParams
    present: np.ndarray
    seed: Optional[int] = None
    trial: Optional[int] = None
    sampler: Optional[str] = None

    def __post_init__(self):
        present = np.asarray(self.present, dtype=bool)
        if present.shape != (self.params.num_top,):
            raise ValueError(
                f"bitset length {present.shape} != C({self.params.n},{self.params.d + 1})"
            )
        present = present.copy()
        present.flags.writeable = False
        object.__setattr__(self, "present", present)

    @classmethod
    def from_ranks(cls, params: ModelParams, ranks, **kw) -> "ComplexSample":
        present = np.zeros(params.num_top, dtype=bool)
        present[np.asarray(ranks, dtype=np.int64)] = True
        return cls(params, present, **kw)

    @classmethod
    def from_simplices(cls, n: int, d: int, simplices, p: Prob = 0.0) -> "ComplexSample":
        params = ModelParams(n, d, p)
        ranks = []
        for s in simplices:
            s = validate_simplex(s, n)
            if len(s) != d + 1:
                raise ValueError(f"expected {d + 1} vertices, got {s}")
            ranks.append(rank_simplex(s, n))
        return cls.from_ranks(params, ranks)

    @cached_property
    def ranks(self) -> np.ndarray:
        return np.flatnonzero(self.present).astype(np.int64)

    @property
    def size(self) -> int:
        return int(self.ranks.size)

    def simplices(self) -> list[tuple[int, ...]]:
        verts = unrank_array(self.ranks, self.params.n, self.params.d)
        return [tuple(int(v) for v in row) for row in verts]

    def with_simplex(self, rank: int) -> "ComplexSample":
        present = self.present.copy()
        present[rank] = True
        return ComplexSample(self.params, present)

    def __eq__(self, other):
        if not isinstance(other, ComplexSample):
            return NotImplemented
        return (
            self.params.n == other.params.n
            and self.params.d == other.params.d
            and np.array_equal(self.present, other.present)
        )

    def __hash__(self):
        return hash((self.params.n, self.params.d, self.present.tobytes()))


def sample(params: ModelParams, master_seed: int, trial: int = 0, sampler: str = "auto") -> ComplexSample:
    """Draw one complex; deterministic in (params, master_seed, trial, sampler)."""
    if sampler == "auto":
        sampler = choose_sampler(params.p)
    gen = trial_generator(master_seed, trial)
    ranks = draw_ranks(params.num_top, params.p, gen, sampler)
    return ComplexSample.from_ranks(params, ranks, seed=master_seed, trial=trial, sampler=sampler)


def parse_complex(text: str, expected_dim: Optional[int] = None) -> tuple[int, int, list[tuple[int, ...]]]:
    """Parse the "n d" header and the simplex lines; returns (n, d, simplices).

    ``d`` is the dimension of the listed simplices, so a file of edges has d=1.
    """
    header = None
    simplices = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            nums = [int(tok) for tok in line.split()]
        except ValueError:
            raise ComplexFormatError(f"non-integer token in {line!r}", lineno) from None
        if header is None:
            if len(nums) != 2:
                raise ComplexFormatError("header must be 'n d'", lineno)
            n, d = nums
            if n < 1 or d < 0 or d + 1 > n:
                raise ComplexFormatError(f"invalid header n={n} d={d}", lineno)
            if expected_dim is not None and d != expected_dim:
                raise ComplexFormatError(f"expected dimension {expected_dim}, header says {d}", lineno)
            header = (n, d)
            continue
        n, d = header
        if len(nums) != d + 1:
            raise ComplexFormatError(f"expected {d + 1} vertices, got {len(nums)}", lineno)
        try:
            s = validate_simplex(nums, n)
        except ValueError as exc:
            raise ComplexFormatError(str(exc), lineno) from None
        if s in seen:
            raise ComplexFormatError(f"duplicate simplex {s}", lineno)
        seen.add(s)
        simplices.append(s)
    if header is None:
        raise ComplexFormatError("missing 'n d' header")
    return header[0], header[1], simplices


def load_complex(text: str) -> ComplexSample:
    n, d, simplices = parse_complex(text)
    if d < 1:
        raise ComplexFormatError("complex files need d >= 1")
    return ComplexSample.from_simplices(n, d, simplices)


def format_simplices(n: int, d: int, simplices, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{n} {d}")
    lines.extend(" ".join(str(v) for v in s) for s in simplices)
    return "\n".join(lines) + "\n"


def save_complex(cs: ComplexSample, comments=()) -> str:
    """Serialize in colex order of the present simplices."""
    return format_simplices(cs.params.n, cs.params.d, cs.simplices(), comments)
