from itertools import product
from math import comb

import numpy as np
import pytest

from htl import linalg
from htl.homology import (
    CoefficientSpec, betti_codim1, betti_top, homology_nonzero_codim1, homology_nonzero_top,
    homology_report, top_rank, torsion_codim1,
)
from htl.linalg import boundary_matrix
from htl.model import ComplexSample, ModelParams, load_complex, sample
from htl.simplex import rank_simplex

COEFFS = ["gf2", "gfp:3", "gfp:5", "int"]


def full(n, d):
    return ComplexSample(ModelParams(n, d, 1.0), np.ones(comb(n, d + 1), dtype=bool))


def empty(n, d):
    return ComplexSample(ModelParams(n, d, 0.0), np.zeros(comb(n, d + 1), dtype=bool))


@pytest.mark.parametrize("coeff", COEFFS)
def test_betti_top_examples(coeff):
    assert betti_top(empty(6, 2), coeff) == 0
    for d in (1, 2, 3):
        sphere = full(d + 2, d)
        assert sphere.size == d + 2
        assert betti_top(sphere, coeff) == 1


def test_betti_top_full_n5_d2_by_enumeration():
    cs = full(5, 2)
    M = boundary_matrix(cs, 2)
    cycles = sum(1 for x in product([0, 1], repeat=10) if not M.matvec(x).any())
    assert cycles == 16 == 2**4
    for coeff in COEFFS:
        assert betti_top(cs, coeff) == 4 == comb(4, 3)


@pytest.mark.parametrize("coeff", COEFFS)
def test_betti_codim1_examples(coeff):
    assert betti_codim1(empty(6, 1), coeff) == 5
    path = ComplexSample.from_simplices(6, 1, [(i, i + 1) for i in range(5)])
    assert betti_codim1(path, coeff) == 0
    assert top_rank(full(5, 2), coeff) == comb(4, 2)
    assert betti_codim1(full(5, 2), coeff) == 0


def test_torsion_examples(fixture_text):
    assert torsion_codim1(load_complex(fixture_text("tetrahedron.txt"))) == ()
    assert torsion_codim1(load_complex(fixture_text("rp2.txt"))) == (2,)
    assert torsion_codim1(empty(5, 2)) == ()


def test_rp2_coefficients(fixture_text):
    rp2 = load_complex(fixture_text("rp2.txt"))
    assert betti_top(rp2, "gf2") == 1 and betti_codim1(rp2, "gf2") == 1
    assert betti_top(rp2, "gfp:3") == 0 and betti_codim1(rp2, "gfp:3") == 0
    rep = homology_report(rp2, "int")
    assert (rep.beta_top, rep.beta_codim1, rep.torsion_codim1) == (0, 0, (2,))
    assert homology_nonzero_codim1(rp2, "int")
    assert not homology_nonzero_codim1(rp2, "gfp:3")


def test_nonzero_top_examples():
    for n, d in [(4, 2), (6, 1), (6, 3)]:
        assert homology_nonzero_top(full(n, d))
    assert not homology_nonzero_top(empty(6, 2))
    single = ComplexSample.from_simplices(6, 2, [(0, 2, 5)])
    assert not homology_nonzero_top(single)


def test_report_invariants():
    cs = sample(ModelParams(8, 2, 0.4), 3)
    for coeff in COEFFS:
        rep = homology_report(cs, coeff)
        assert rep.beta_top == cs.size - rep.rank_top
        assert rep.beta_codim1 == comb(7, 2) - rep.rank_top
        assert rep.nullity_codim1 == comb(7, 2)
        assert (rep.torsion_codim1 is not None) == (coeff == "int")


def test_field_independence_without_torsion():
    rng = np.random.default_rng(8)
    checked = 0
    for t in range(200):
        n = int(rng.integers(4, 9))
        cs = sample(ModelParams(n, 2, float(rng.uniform(0.1, 0.9))), 77, t)
        if torsion_codim1(cs):
            continue
        values = {betti_top(cs, c) for c in COEFFS}
        assert len(values) == 1
        checked += 1
    assert checked > 150


def test_euler_characteristic_d2():
    for t in range(100):
        n = 4 + t % 6
        cs = sample(ModelParams(n, 2, 0.2 + 0.6 * (t % 7) / 7), 31, t)
        b2, b1 = betti_top(cs), betti_codim1(cs)
        assert cs.size - comb(n, 2) + n == b2 - b1 + 1


def test_monotone_under_insertion():
    rng = np.random.default_rng(4)
    for n, d in [(7, 2), (8, 1), (7, 3)]:
        cs = empty(n, d)
        order = rng.permutation(comb(n, d + 1))
        prev = (betti_top(cs), betti_codim1(cs))
        for r in order:
            cs = cs.with_simplex(int(r))
            cur = (betti_top(cs), betti_codim1(cs))
            assert cur in [(prev[0] + 1, prev[1]), (prev[0], prev[1] - 1)]
            prev = cur
        assert prev == (comb(n - 1, d + 1), 0)


@pytest.mark.parametrize("n", range(3, 11))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_full_skeleton_top_betti(n, d):
    if d + 1 > n:
        pytest.skip("no d-simplices")
    for coeff in COEFFS:
        assert betti_top(full(n, d), coeff) == comb(n - 1, d + 1)


def test_dense_and_streamed_paths_agree(monkeypatch):
    cases = [sample(ModelParams(12, 2, 0.3), 9, t) for t in range(5)]
    streamed = [betti_top(cs) for cs in cases]
    monkeypatch.setattr(linalg, "STREAM_ROW_THRESHOLD", 10**9)
    assert [betti_top(cs) for cs in cases] == streamed


def test_coefficient_parsing():
    assert CoefficientSpec.parse("gfp:2") == CoefficientSpec("gf2")
    assert str(CoefficientSpec.parse("gfp:7")) == "gfp:7"
    for bad in ("gfp:4", "z", "gfp:x"):
        with pytest.raises(ValueError):
            CoefficientSpec.parse(bad)
