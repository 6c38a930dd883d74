from fractions import Fraction
from math import comb, sqrt

import numpy as np
import pytest
from scipy import stats

from htl.model import (
    ComplexFormatError, ComplexSample, ModelParams, draw_ranks, load_complex, sample,
    save_complex, trial_generator,
)
from htl.simplex import rank_simplex


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(2, 2, 0.5)
    with pytest.raises(ValueError):
        ModelParams(5, 2, 1.5)
    with pytest.raises(ValueError):
        ModelParams(5, 0, 0.5)
    m = ModelParams(10, 2, Fraction(1, 5))
    assert m.w == 2
    assert m.num_top == 120


def test_degenerate_probabilities():
    assert sample(ModelParams(8, 2, 0.0), 1).size == 0
    full = sample(ModelParams(8, 2, 1.0), 1)
    assert full.size == comb(8, 3)
    assert full.present.all()


def test_deterministic_and_trial_dependent():
    m = ModelParams(12, 2, 0.3)
    a, b = sample(m, 42, 7), sample(m, 42, 7)
    assert np.array_equal(a.present, b.present)
    assert not np.array_equal(a.present, sample(m, 42, 8).present)
    assert not np.array_equal(a.present, sample(m, 43, 7).present)


def test_present_is_read_only():
    cs = sample(ModelParams(6, 2, 0.5), 3)
    with pytest.raises(ValueError):
        cs.present[0] = True


def test_mean_size_n20():
    m = ModelParams(20, 2, 0.3)
    T = 10_000
    sizes = np.array([sample(m, 5, t).size for t in range(T)])
    mean = comb(20, 3) * 0.3
    assert mean == pytest.approx(342)
    sigma = sqrt(comb(20, 3) * 0.3 * 0.7 / T)
    assert abs(sizes.mean() - mean) <= 3 * sigma


def _size_histogram(m, T, seed, sampler="auto"):
    N = m.num_top
    gen_sizes = np.array([draw_ranks(N, m.p, trial_generator(seed, t), sampler).size for t in range(T)])
    return np.bincount(gen_sizes, minlength=N + 1)


def _chisq_binomial(observed, N, p, T):
    expected = T * stats.binom.pmf(np.arange(N + 1), N, p)
    # merge bins with small expectation into their neighbours
    obs_b, exp_b = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs_b.append(acc_o)
            exp_b.append(acc_e)
            acc_o = acc_e = 0.0
    obs_b[-1] += acc_o
    exp_b[-1] += acc_e
    return stats.chisquare(obs_b, exp_b).pvalue


def test_chi_square_size_distribution():
    m = ModelParams(12, 2, 0.2)
    T = 100_000
    hist = _size_histogram(m, T, seed=2024)
    assert _chisq_binomial(hist, m.num_top, 0.2, T) > 0.001


def test_independence_probe():
    m = ModelParams(12, 2, 0.2)
    T = 100_000
    seed = 99
    i, j = 3, 150
    xi = np.empty(T)
    xj = np.empty(T)
    for t in range(T):
        cs = sample(m, seed, t)
        xi[t] = cs.present[i]
        xj[t] = cs.present[j]
    cov = np.mean(xi * xj) - xi.mean() * xj.mean()
    sigma = 0.2 * 0.8 / sqrt(T)
    assert abs(cov) <= 4 * sigma


def test_geometric_and_bernoulli_same_distribution():
    m = ModelParams(12, 2, 0.01)
    T = 20_000
    N = m.num_top
    freq = {}
    hists = {}
    for sampler in ("bernoulli", "geometric"):
        present = np.zeros(N)
        sizes = np.zeros(T, dtype=int)
        for t in range(T):
            r = draw_ranks(N, m.p, trial_generator(11, t), sampler)
            present[r] += 1
            sizes[t] = r.size
        freq[sampler] = present / T
        hists[sampler] = np.bincount(sizes, minlength=N + 1)
        assert _chisq_binomial(hists[sampler], N, 0.01, T) > 0.001
    # per-position marginals agree with p for both samplers
    sigma = sqrt(0.01 * 0.99 / T)
    for f in freq.values():
        assert np.all(np.abs(f - 0.01) <= 5 * sigma)
    # two-sample check on the size distributions
    k = max(np.flatnonzero(hists["bernoulli"] + hists["geometric"])) + 1
    table = np.vstack([hists["bernoulli"][:k], hists["geometric"][:k]])
    table = table[:, table.sum(axis=0) > 0]
    assert stats.chi2_contingency(table).pvalue > 0.001


def test_auto_sampler_choice():
    assert sample(ModelParams(30, 2, 0.01), 1).sampler == "geometric"
    assert sample(ModelParams(30, 2, 0.1), 1).sampler == "bernoulli"


def test_load_single_simplex():
    cs = load_complex("5 2\n0 1 2\n")
    assert cs.ranks.tolist() == [rank_simplex((0, 1, 2), 5)]
    assert load_complex("5 2\n").size == 0
    assert load_complex("# comment\n\n5 2\n# another\n3 4 1\n".replace("3 4 1", "1 3 4")).size == 1


def test_round_trip_text():
    cs = sample(ModelParams(7, 2, 0.5), 17)
    again = load_complex(save_complex(cs))
    assert np.array_equal(again.present, cs.present)
    text = save_complex(cs)
    assert save_complex(load_complex(text)) == text


@pytest.mark.parametrize("text,line", [
    ("5\n0 1 2\n", 1),
    ("5 2\n0 1 5\n", 2),
    ("5 2\n0 1 2\n0 1 2\n", 3),
    ("5 2\n0 2 1\n", 2),
    ("5 2\n0 1\n", 2),
    ("5 2\n0 x 2\n", 2),
])
def test_malformed(text, line):
    with pytest.raises(ComplexFormatError) as exc:
        load_complex(text)
    assert exc.value.line == line


def test_missing_header():
    with pytest.raises(ComplexFormatError):
        load_complex("# nothing\n")


def test_with_simplex_and_equality():
    cs = ComplexSample.from_simplices(5, 2, [(0, 1, 2)])
    bigger = cs.with_simplex(rank_simplex((0, 1, 3), 5))
    assert bigger.size == 2 and cs.size == 1
    assert cs == ComplexSample.from_simplices(5, 2, [(0, 1, 2)])
