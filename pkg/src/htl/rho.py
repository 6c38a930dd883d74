"""Bounding probabilities for chains of (d-1)-simplices, and rim counts.

For a GF(2) chain sigma of (d-1)-simplices and a forbidden set S of
d-simplices, rho is the probability that a random complex avoids S and has
sigma among its boundaries (both events jointly). The rim variant asks
instead that the boundary of the chain sum of T be a boundary of the
present simplices outside T.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Optional, Sequence

import numpy as np

from . import exact
from .linalg import ColumnReducer, column_masks
from .model import ModelParams, Prob, sample
from .simplex import boundary_faces, rank_simplex, unrank_simplex
from .stats import Estimate


def chain_mask(ranks: Iterable[int]) -> int:
    m = 0
    for r in ranks:
        m ^= 1 << int(r)
    return m


def mask_ranks(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def chain_boundary(chain: Iterable[int], n: int, k: int) -> frozenset:
    """GF(2) boundary of a k-chain given by simplex ranks.

    k = 0 uses the augmentation, so the boundary is {()}-like: the set {0}
    when the chain has odd size and empty otherwise.
    """
    chain = list(chain)
    if k == 0:
        return frozenset({0}) if len(chain) % 2 else frozenset()
    return frozenset(mask_ranks(chain_mask_of_faces(chain, n, k)))


def chain_mask_of_faces(chain: Iterable[int], n: int, k: int) -> int:
    m = 0
    for c in column_masks(n, k, np.asarray(list(chain), dtype=np.int64)):
        m ^= c
    return m


@dataclass(frozen=True)
class RhoQuery:
    params: ModelParams
    sigma: frozenset  # ranks of (d-1)-simplices
    S: frozenset = frozenset()  # ranks of forbidden d-simplices
    lam: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sigma", frozenset(int(x) for x in self.sigma))
        object.__setattr__(self, "S", frozenset(int(x) for x in self.S))
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        n, d = self.params.n, self.params.d
        if any(not 0 <= x < comb(n, d) for x in self.sigma):
            raise ValueError("sigma has a rank outside the (d-1)-simplices")
        if any(not 0 <= x < comb(n, d + 1) for x in self.S):
            raise ValueError("S has a rank outside the d-simplices")

    @property
    def sigma_is_cycle(self) -> bool:
        return not chain_boundary(self.sigma, self.params.n, self.params.d - 1)


@dataclass(frozen=True)
class RimQuery:
    params: ModelParams
    T: frozenset
    S: frozenset = frozenset()
    lam: int = 0

    def __post_init__(self):
        object.__setattr__(self, "T", frozenset(int(x) for x in self.T))
        object.__setattr__(self, "S", frozenset(int(x) for x in self.S))
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")


def sigma_member(q: RhoQuery) -> bool:
    return len(q.sigma) > (q.lam - 1) * (q.params.d + 1)


def rim_count(T: Iterable[int], n: int, d: int) -> int:
    """Number of (d-1)-simplices that lie in the boundary of exactly one member of T."""
    hits = Counter()
    for r in T:
        for face, _ in boundary_faces(unrank_simplex(int(r), n, d)):
            hits[face] += 1
    return sum(1 for c in hits.values() if c == 1)


def rim_member(q: RimQuery) -> bool:
    n, d = q.params.n, q.params.d
    return rim_count(q.T, n, d) > (q.lam - 1) * (d + 1)


def _free_columns(params: ModelParams, excluded: frozenset) -> list[int]:
    n, d = params.n, params.d
    free = np.array([r for r in range(params.num_top) if r not in excluded], dtype=np.int64)
    return column_masks(n, d, free)


def rho_exact(q: RhoQuery, cap: Optional[int] = None) -> Prob:
    """Exact rho by enumerating the complexes that avoid S."""
    params = q.params
    if q.sigma and not q.sigma_is_cycle:
        return Fraction(0) if isinstance(params.p, Fraction) else 0.0
    free = params.num_top - len(q.S)
    exact.check_cap(free, cap)
    counts = exact.span_counts(_free_columns(params, q.S), chain_mask(q.sigma))
    return exact.evaluate(counts, params.p, absent=len(q.S))


def rho_estimate(q: RhoQuery, trials: int, seed: int) -> Estimate:
    """Monte Carlo rho: avoid S first, then test sigma against the span."""
    params = q.params
    n, d = params.n, params.d
    S = np.array(sorted(q.S), dtype=np.int64)
    target = chain_mask(q.sigma)
    hits = 0
    for t in range(trials):
        cs = sample(params, seed, t)
        if S.size and cs.present[S].any():
            continue
        red = ColumnReducer()
        for v in column_masks(n, d, cs.ranks):
            red.add(v)
        if red.contains(target):
            hits += 1
    return Estimate(hits, trials)


def _tilde_target(q: RimQuery) -> int:
    n, d = q.params.n, q.params.d
    return chain_mask_of_faces(sorted(q.T), n, d)


def rho_tilde_exact(q: RimQuery, cap: Optional[int] = None) -> Prob:
    """Exact rim probability; simplices of T outside S are summed out."""
    params = q.params
    excluded = q.S | q.T
    free = params.num_top - len(excluded)
    exact.check_cap(free, cap)
    counts = exact.span_counts(_free_columns(params, excluded), _tilde_target(q))
    return exact.evaluate(counts, params.p, absent=len(q.S))


def rho_tilde_estimate(q: RimQuery, trials: int, seed: int) -> Estimate:
    params = q.params
    n, d = params.n, params.d
    S = np.array(sorted(q.S), dtype=np.int64)
    T = np.array(sorted(q.T), dtype=np.int64)
    target = _tilde_target(q)
    hits = 0
    for t in range(trials):
        cs = sample(params, seed, t)
        if S.size and cs.present[S].any():
            continue
        ranks = cs.ranks if not T.size else np.setdiff1d(cs.ranks, T, assume_unique=True)
        red = ColumnReducer()
        for v in column_masks(n, d, ranks):
            red.add(v)
        if red.contains(target):
            hits += 1
    return Estimate(hits, trials)


def rho_bound(d: int, lam: int, p: Prob, w: Prob) -> Prob:
    """(d+1)^lam * lam! * p^lam / (1-w)^lam, defined for w < 1."""
    if w >= 1:
        raise ValueError(f"bound needs w < 1, got w={w}")
    if d < 2:
        warnings.warn("rho bound is stated for d >= 2; evaluating anyway", stacklevel=2)
    c = (d + 1) ** lam * factorial(lam)
    return c * p**lam / (1 - w) ** lam


@dataclass(frozen=True)
class Constellation:
    """A base d-simplex t0 plus one cofacet t_i through each facet e_i of t0."""

    n: int
    d: int
    t0: tuple[int, ...]
    facets: tuple[tuple[int, ...], ...]
    apexes: tuple[int, ...]
    cofacets: tuple[tuple[int, ...], ...]
    blocks: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def simplices(self) -> list[tuple[int, ...]]:
        return [self.t0, *self.cofacets]

    @property
    def ranks(self) -> list[int]:
        return [rank_simplex(s, self.n) for s in self.simplices]

    def boundary_support(self) -> int:
        """|supp| of the GF(2) boundary of t0 + t_1 + ... + t_{d+1}."""
        return len(chain_boundary(self.ranks, self.n, self.d))

    def predicted_support(self) -> int:
        return (self.d + 1) ** 2 - sum(len(b) ** 2 for b in self.blocks)

    def rim(self) -> int:
        return rim_count(self.ranks, self.n, self.d)


def generate_constellation(n: int, d: int, apex_choice: Sequence[int], t0: Optional[Sequence[int]] = None) -> Constellation:
    """Build t_i = e_i + {v_i}, e_i the facet of t0 missing its i-th vertex."""
    t0 = tuple(range(d + 1)) if t0 is None else tuple(sorted(int(v) for v in t0))
    if len(t0) != d + 1 or len(set(t0)) != d + 1:
        raise ValueError(f"t0 must have {d + 1} distinct vertices")
    apexes = tuple(int(v) for v in apex_choice)
    if len(apexes) != d + 1:
        raise ValueError(f"need {d + 1} apex vertices, got {len(apexes)}")
    for v in apexes:
        if v in t0:
            raise ValueError(f"apex {v} lies in t0")
        if not 0 <= v < n:
            raise ValueError(f"apex {v} outside [0, {n})")
    facets = tuple(f for f, _ in boundary_faces(t0))
    cofacets = tuple(tuple(sorted(e + (v,))) for e, v in zip(facets, apexes))
    groups: dict[int, list[int]] = {}
    for i, v in enumerate(apexes):
        groups.setdefault(v, []).append(i)
    blocks = tuple(tuple(g) for g in groups.values())
    return Constellation(n, d, t0, facets, apexes, cofacets, blocks)


def random_constellation(rng: np.random.Generator, n: int, d: int) -> Constellation:
    """Random t0 and apexes; apexes come from a small random pool so blocks merge often."""
    t0 = sorted(rng.choice(n, size=d + 1, replace=False).tolist())
    outside = [v for v in range(n) if v not in t0]
    pool_size = int(rng.integers(1, min(len(outside), d + 1) + 1))
    pool = rng.choice(outside, size=pool_size, replace=False)
    apexes = rng.choice(pool, size=d + 1, replace=True).tolist()
    return generate_constellation(n, d, apexes, t0)
