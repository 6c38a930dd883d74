"""Betti numbers of the top two degrees of a complex from Y(n, p, d).

Reduced homology throughout. With the full (d-1)-skeleton present,
nullity of the (d-1)-boundary is C(n-1, d), so both Betti numbers follow
from the rank of the d-boundary alone:

    beta_d     = |Delta(d)|  - rank
    beta_{d-1} = C(n-1, d)   - rank

Unreduced beta_0 is the reduced value plus one. Coefficients other than
prime fields and Z reduce to these by the structure theorem for finite
abelian groups, so only gf2, gfp:q and int are offered.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional

import numpy as np

from . import linalg
from .model import ComplexSample
from .simplex import facet_rank_array
from .snf import integer_rank, smith_normal_form


@dataclass(frozen=True)
class CoefficientSpec:
    kind: str  # "gf2" | "gfp" | "int"
    q: Optional[int] = None

    def __post_init__(self):
        if self.kind == "gfp":
            if self.q is None or not linalg.is_prime(self.q) or self.q >= 2**31:
                raise ValueError(f"gfp needs a prime modulus below 2^31, got {self.q}")
        elif self.kind == "gf2":
            object.__setattr__(self, "q", 2)
        elif self.kind == "int":
            if self.q is not None:
                raise ValueError("int coefficients take no modulus")
        else:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def parse(cls, text: "str | CoefficientSpec") -> "CoefficientSpec":
        if isinstance(text, CoefficientSpec):
            return text
        text = text.strip().lower()
        if text == "gf2":
            return cls("gf2")
        if text == "int":
            return cls("int")
        if text.startswith("gfp:"):
            q = int(text[4:])
            return cls("gf2") if q == 2 else cls("gfp", q)
        raise ValueError(f"coefficients must be gf2, gfp:Q or int, got {text!r}")

    def __str__(self):
        return "int" if self.kind == "int" else ("gf2" if self.kind == "gf2" else f"gfp:{self.q}")


GF2 = CoefficientSpec("gf2")
INT = CoefficientSpec("int")


@dataclass(frozen=True)
class HomologyReport:
    coeff: str
    beta_top: int
    beta_codim1: int
    rank_top: int
    nullity_codim1: int
    num_top: int
    torsion_codim1: Optional[tuple[int, ...]] = None

    def to_dict(self) -> dict:
        out = {
            "coeff": self.coeff,
            "beta_top": self.beta_top,
            "beta_codim1": self.beta_codim1,
            "rank_boundary_top": self.rank_top,
            "nullity_boundary_codim1": self.nullity_codim1,
            "num_top_simplices": self.num_top,
        }
        if self.torsion_codim1 is not None:
            out["torsion_codim1"] = list(self.torsion_codim1)
        return out


def _max_rank(cs: ComplexSample) -> int:
    n, d = cs.params.n, cs.params.d
    return min(cs.size, comb(n - 1, d))


def top_rank(cs: ComplexSample, coeff=GF2) -> int:
    """Rank of the d-boundary on the present d-simplices."""
    coeff = CoefficientSpec.parse(coeff)
    n, d = cs.params.n, cs.params.d
    if cs.size == 0:
        return 0
    if coeff.kind == "gf2":
        if comb(n, d) > linalg.STREAM_ROW_THRESHOLD:
            return linalg.stream_rank_gf2(n, d, cs.ranks, max_rank=_max_rank(cs))
        return linalg.rank(linalg.boundary_matrix(cs, d, "gf2"))
    if coeff.kind == "gfp":
        return linalg.rank(linalg.boundary_matrix(cs, d, coeff.q))
    return integer_rank(signed_boundary(cs, d))


def signed_boundary(cs: ComplexSample, k: Optional[int] = None) -> list[list[int]]:
    """Integer matrix of the k-boundary (default k = d) with signs (-1)^i."""
    n, d = cs.params.n, cs.params.d
    k = d if k is None else k
    cols = cs.ranks if k == d else np.arange(comb(n, k + 1), dtype=np.int64)
    rows = comb(n, k) if k else 1
    A = [[0] * len(cols) for _ in range(rows)]
    if k == 0:
        for j in range(len(cols)):
            A[0][j] = 1
        return A
    for j, faces in enumerate(facet_rank_array(cols, n, k).tolist()):
        for i, f in enumerate(faces):
            A[f][j] = -1 if i % 2 else 1
    return A


def betti_top(cs: ComplexSample, coeff=GF2) -> int:
    return cs.size - top_rank(cs, coeff)


def betti_codim1(cs: ComplexSample, coeff=GF2) -> int:
    """Reduced Betti number in degree d-1 (free rank for int)."""
    n, d = cs.params.n, cs.params.d
    return comb(n - 1, d) - top_rank(cs, coeff)


def torsion_codim1(cs: ComplexSample) -> tuple[int, ...]:
    """Torsion coefficients of H_{d-1}(Delta; Z), ascending."""
    if cs.size == 0:
        return ()
    return tuple(smith_normal_form(signed_boundary(cs)).torsion_list())


def homology_nonzero_top(cs: ComplexSample, coeff=GF2) -> bool:
    return betti_top(cs, coeff) > 0


def homology_nonzero_codim1(cs: ComplexSample, coeff=GF2) -> bool:
    coeff = CoefficientSpec.parse(coeff)
    if coeff.kind == "int":
        # free part or torsion
        snf = smith_normal_form(signed_boundary(cs)) if cs.size else None
        r = snf.rank if snf else 0
        n, d = cs.params.n, cs.params.d
        return comb(n - 1, d) - r > 0 or bool(snf and snf.torsion)
    return betti_codim1(cs, coeff) > 0


def homology_report(cs: ComplexSample, coeff=GF2) -> HomologyReport:
    coeff = CoefficientSpec.parse(coeff)
    n, d = cs.params.n, cs.params.d
    torsion = None
    if coeff.kind == "int":
        if cs.size:
            snf = smith_normal_form(signed_boundary(cs))
            r = snf.rank
            torsion = tuple(snf.torsion_list())
        else:
            r, torsion = 0, ()
    else:
        r = top_rank(cs, coeff)
    null = comb(n - 1, d)
    return HomologyReport(str(coeff), cs.size - r, null - r, r, null, cs.size, torsion)
