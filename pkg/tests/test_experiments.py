from fractions import Fraction
from itertools import combinations
from math import comb, sqrt

import numpy as np
import pytest

from htl.exact import EnumerationCapExceeded
from htl.experiments import (
    CSV_COLUMNS, SweepConfig, bell_number, bound_curve, count_empty_boundaries, dependency_degree,
    exact_prob_top_nonzero, general_bound_constant, lm_sweep, moment_report, sweep,
)
from htl.homology import betti_top
from htl.model import ComplexSample, ModelParams, sample

from oracles import brute_empty_boundaries, brute_prob_top_nonzero


def set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]


class TestBounds:
    @pytest.mark.parametrize("k,want", [(0, 1), (1, 1), (3, 5), (4, 15), (5, 52)])
    def test_bell_examples(self, k, want):
        assert bell_number(k) == want

    def test_bell_by_enumeration(self):
        for k in range(8):
            assert bell_number(k) == sum(1 for _ in set_partitions(list(range(k))))

    def test_bell_overflow_guard(self):
        assert bell_number(30, max_bits=None) > 2**64
        with pytest.raises(OverflowError):
            bell_number(30)

    def test_curve_examples(self):
        assert bound_curve(1, 0.5) == pytest.approx(0.25)
        assert bound_curve(2, 0.3) == pytest.approx(0.29755, abs=1e-5)
        assert general_bound_constant(3) == 5760
        assert bound_curve(3, 0.1) == pytest.approx(0.0790, abs=1e-4)
        assert bound_curve(2, Fraction(1, 2)) == Fraction(18, 16) * 4

    def test_curve_undefined_outside_open_interval(self):
        assert bound_curve(1, 1.0) is None
        assert bound_curve(2, 1.5) is None


class TestEmptyBoundaries:
    def test_examples(self):
        full = ComplexSample(ModelParams(6, 1, 1.0), np.ones(15, dtype=bool))
        assert count_empty_boundaries(full) == 20
        assert count_empty_boundaries(ComplexSample(ModelParams(6, 1, 0.0), np.zeros(15, dtype=bool))) == 0
        tetra = ComplexSample.from_simplices(5, 2, list(combinations(range(4), 3)))
        assert count_empty_boundaries(tetra) == 1

    def test_against_brute_force(self):
        for t in range(60):
            n, d = 5 + t % 5, 1 + t % 3
            cs = sample(ModelParams(n, d, 0.3 + 0.5 * (t % 4) / 4), 13, t)
            assert count_empty_boundaries(cs, batch=7) == brute_empty_boundaries(n, d, cs.simplices())

    def test_witness_soundness(self):
        for t in range(100):
            cs = sample(ModelParams(9, 2, 0.35), 14, t)
            if count_empty_boundaries(cs) > 0:
                assert betti_top(cs) > 0


class TestMoments:
    def test_analytic_examples(self):
        m = moment_report(6, 1, 0.5, 50, seed=1)
        assert m.expected_x == pytest.approx(2.5)
        assert m.xi_star == pytest.approx(3.0)
        assert m.formula_dependency_degree == 12
        assert m.empirical_dependency_degree == 9 == dependency_degree(6, 1)
        assert m.witness_violations == 0

    def test_dependency_degree_formula(self):
        for n in range(5, 12):
            for d in (1, 2, 3):
                if n >= d + 3:
                    assert dependency_degree(n, d) == (d + 2) * (n - d - 2)

    def test_ratio_below_bound(self):
        for n in range(6, 40, 3):
            for d in (1, 2, 3):
                for w in (0.1, 0.5, 2.0):
                    m = moment_report(n, d, w / n, 1, seed=0, check_witness=False)
                    if m.ratio_bound is not None:
                        assert m.xi_ratio < m.ratio_bound

    def test_mean_consistency(self):
        rng = np.random.default_rng(51)
        for i in range(20):
            d = int(rng.integers(1, 3))
            n = int(rng.integers(d + 3, 13))
            p = float(rng.uniform(0.2, 0.8))
            m = moment_report(n, d, p, 400, seed=1000 + i, check_witness=False)
            exp = comb(n, d + 2) * p ** (d + 2)
            assert abs(m.mean - exp) <= 3 * max(m.mean_sigma, 1e-9), (n, d, p)

    def test_fraction_probability(self):
        m = moment_report(6, 1, Fraction(1, 2), 5, seed=2)
        assert m.expected_x == Fraction(5, 2)


class TestExactOracle:
    def test_against_brute_force(self):
        assert exact_prob_top_nonzero(5, 2, Fraction(1, 2)) == Fraction(37, 128)
        for n, d in [(4, 1), (4, 2), (5, 1), (5, 3)]:
            for p in (Fraction(1, 3), Fraction(3, 4)):
                assert exact_prob_top_nonzero(n, d, p) == brute_prob_top_nonzero(n, d, p)

    def test_examples(self):
        assert exact_prob_top_nonzero(5, 2, 1) == 1
        assert exact_prob_top_nonzero(5, 2, 0) == 0
        assert exact_prob_top_nonzero(5, 2, 0.5) == pytest.approx(37 / 128, abs=1e-15)

    def test_cap(self):
        with pytest.raises(EnumerationCapExceeded):
            exact_prob_top_nonzero(7, 2, 0.5)

    def test_monte_carlo_agrees(self):
        cfg = SweepConfig(5, 2, (2.5,), 20000, seed=3)
        pt = sweep(cfg).points[0]
        q = 37 / 128
        assert abs(pt.estimate - q) <= 3 * sqrt(q * (1 - q) / pt.trials)


class TestSweep:
    def test_zero_w(self):
        res = sweep(SweepConfig(100, 1, (0.0,), 50, seed=1))
        assert res.points[0].count == 0 and res.points[0].mean_beta == 0

    def test_estimate_and_ci(self):
        res = sweep(SweepConfig(30, 1, (0.5, 1.0, 2.0), 300, seed=2))
        for pt in res.points:
            lo, hi = pt.ci
            assert pt.estimate == pt.count / pt.trials and lo <= pt.estimate <= hi
            assert pt.bound == bound_curve(1, pt.w)

    def test_monotone_in_w(self):
        res = sweep(SweepConfig(40, 2, (0.5, 1.5, 3.0, 6.0, 12.0), 200, seed=4))
        for a, b in zip(res.points, res.points[1:]):
            assert b.estimate >= a.estimate - 3 * (a.ci_halfwidth + b.ci_halfwidth)

    def test_deterministic_across_threads(self):
        cfg = SweepConfig(20, 1, (0.5, 1.5), 60, seed=7)
        assert sweep(cfg, threads=1).to_csv() == sweep(cfg, threads=2).to_csv()

    def test_csv_layout(self):
        text = sweep(SweepConfig(10, 1, (1.0,), 5, seed=1)).to_csv()
        header, row = text.strip().split("\n")
        assert header.split(",") == CSV_COLUMNS
        assert row.endswith(",")  # seconds blank unless timing is requested

    def test_integer_coefficients_match_gf2_for_graphs(self):
        gf2 = sweep(SweepConfig(25, 1, (1.0, 3.0), 80, seed=5))
        z = sweep(SweepConfig(25, 1, (1.0, 3.0), 80, seed=5, coeff="int"))
        assert [p.count for p in gf2.points] == [p.count for p in z.points]

    def test_codim1_target(self):
        # for graphs, H_0 nonzero means disconnected
        res = sweep(SweepConfig(8, 1, (0.0, 8.0), 20, seed=1, target="codim1"))
        assert [p.estimate for p in res.points] == [1.0, 0.0]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(10, 1, (11.0,), 5, seed=1)
        with pytest.raises(ValueError):
            SweepConfig(10, 1, (1.0,), 0, seed=1)
        with pytest.raises(ValueError):
            SweepConfig(10, 1, (1.0,), 5, seed=1, target="bogus")


def test_connectivity_window():
    res = lm_sweep(200, 1, [-4.0, 0.0, 4.0], 2000, seed=8)
    lo, mid, hi = (pt.estimate for pt in res.points)
    assert hi - lo > 0.5
    assert lo <= mid <= hi
