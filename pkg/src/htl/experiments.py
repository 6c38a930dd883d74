"""Threshold sweeps, analytic bound curves and second-moment statistics."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, log, sqrt
from typing import Optional, Sequence

import numpy as np

from . import __version__, exact
from .homology import CoefficientSpec, homology_nonzero_codim1, top_rank
from .linalg import column_masks
from .model import (
    RNG_FAMILY,
    ComplexSample,
    ModelParams,
    Prob,
    choose_sampler,
    draw_ranks,
    mix_seed,
    sample,
    trial_generator,
)
from .simplex import BINOM, boundary_faces, facet_rank_array
from .stats import Z95, wilson_interval

CSV_COLUMNS = ["w", "p", "trials", "count_positive", "estimate", "ci_low", "ci_high",
               "bound", "mean_beta", "seconds"]

# sample bitsets this small are cached by content inside a sweep chunk
MEMO_MAX_SIMPLICES = 32


def bell_number(k: int, max_bits: Optional[int] = 64) -> int:
    """Number of set partitions of a k-element set (Bell triangle)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    if max_bits is not None and row[0].bit_length() > max_bits:
        raise OverflowError(f"Bell({k}) does not fit in {max_bits} bits")
    return row[0]


def general_bound_constant(d: int) -> int:
    return (d + 1) ** d * factorial(d) * bell_number(d + 1)


def bound_curve(d: int, w: Prob) -> Optional[Prob]:
    """Upper bound on Prob(beta_d > 0) at w = pn; None outside 0 < w < 1.

    d = 1 and d = 2 use their sharper dedicated constants.
    """
    if not 0 < w < 1:
        return None
    if d == 1:
        return w**3 / (1 - w)
    if d == 2:
        return 18 * w**4 / (1 - w) ** 2
    return general_bound_constant(d) * w ** (d + 2) / (1 - w) ** d


# ---------------------------------------------------------------- exact oracle


@lru_cache(maxsize=64)
def top_nonzero_counts(n: int, d: int, cap: Optional[int] = None) -> tuple[int, ...]:
    """counts[k] = number of k-sets of d-simplices with a nonzero GF(2) d-cycle."""
    N = comb(n, d + 1)
    exact.check_cap(N, cap)
    cols = column_masks(n, d, np.arange(N, dtype=np.int64))
    return tuple(exact.dependent_counts(cols))


def exact_prob_top_nonzero(n: int, d: int, p: Prob, cap: Optional[int] = None) -> Prob:
    ModelParams(n, d, p)
    return exact.evaluate(top_nonzero_counts(n, d, exact.enum_cap() if cap is None else cap), p)


# ---------------------------------------------------------------- sweeps


TARGETS = ("top", "codim1", "codim1_vanishes")


@dataclass(frozen=True)
class SweepConfig:
    n: int
    d: int
    w_grid: tuple
    trials: int
    seed: int
    coeff: str = "gf2"
    target: str = "top"
    sampler: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "w_grid", tuple(self.w_grid))
        object.__setattr__(self, "coeff", str(CoefficientSpec.parse(self.coeff)))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        for w in self.w_grid:
            p = w / self.n
            if not 0 <= p <= 1:
                raise ValueError(f"w={w} gives p={p} outside [0, 1]")
            ModelParams(self.n, self.d, p)

    def params(self, i: int) -> ModelParams:
        return ModelParams(self.n, self.d, self.w_grid[i] / self.n)


@dataclass
class SweepPoint:
    w: Prob
    p: Prob
    trials: int
    count: int
    beta_sum: int
    bound: Optional[Prob] = None
    seconds: Optional[float] = None
    sampler: str = ""
    c: Optional[float] = None

    @property
    def estimate(self) -> float:
        return self.count / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.count, self.trials)

    @property
    def ci_halfwidth(self) -> float:
        lo, hi = self.ci
        return (hi - lo) / 2

    @property
    def mean_beta(self) -> float:
        return self.beta_sum / self.trials

    def row(self, timing: bool = False) -> dict:
        lo, hi = self.ci
        out = {
            "w": _num(self.w), "p": _num(self.p), "trials": self.trials,
            "count_positive": self.count, "estimate": self.estimate,
            "ci_low": lo, "ci_high": hi,
            "bound": None if self.bound is None else _num(self.bound),
            "mean_beta": self.mean_beta,
            "seconds": self.seconds if timing else None,
        }
        if self.c is not None:
            out["c"] = self.c
        return out


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


@dataclass
class SweepResult:
    n: int
    d: int
    event: str
    coeff: str
    seed: int
    points: list[SweepPoint] = field(default_factory=list)
    kind: str = "sweep"

    def metadata(self) -> dict:
        return {
            "kind": self.kind, "n": self.n, "d": self.d, "event": self.event,
            "coeff": self.coeff, "seed": self.seed,
            "samplers": [pt.sampler for pt in self.points],
            "version": __version__, "rng": RNG_FAMILY,
        }

    def to_csv(self, timing: bool = False) -> str:
        cols = CSV_COLUMNS + (["c"] if self.kind == "lm_sweep" else [])
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for pt in self.points:
            row = pt.row(timing)
            wr.writerow(["" if row.get(c) is None else repr(row[c]) for c in cols])
        return buf.getvalue()

    def to_json(self, timing: bool = False) -> str:
        doc = {"metadata": self.metadata(), "data": [pt.row(timing) for pt in self.points]}
        return json.dumps(doc, indent=2) + "\n"


def _trial_outcome(params: ModelParams, ranks: np.ndarray, coeff: CoefficientSpec, target: str) -> tuple[bool, int]:
    cs = ComplexSample.from_ranks(params, ranks)
    if target == "top":
        beta = cs.size - top_rank(cs, coeff)
        return beta > 0, beta
    beta = comb(params.n - 1, params.d) - top_rank(cs, coeff)
    nonzero = homology_nonzero_codim1(cs, coeff) if coeff.kind == "int" else beta > 0
    return (nonzero if target == "codim1" else not nonzero), beta


def _run_chunk(task) -> tuple[int, int, int, float]:
    """Trials [lo, hi) of one grid point; returns (point, count, beta_sum, seconds)."""
    idx, n, d, p, point_seed, lo, hi, coeff, target, sampler = task
    t0 = time.perf_counter()
    params = ModelParams(n, d, p)
    coeff = CoefficientSpec.parse(coeff)
    N = params.num_top
    memo: dict[bytes, tuple[bool, int]] = {}
    count = beta_sum = 0
    for t in range(lo, hi):
        ranks = draw_ranks(N, p, trial_generator(point_seed, t), sampler)
        if N <= MEMO_MAX_SIMPLICES:
            key = ranks.tobytes()
            out = memo.get(key)
            if out is None:
                out = memo[key] = _trial_outcome(params, ranks, coeff, target)
        else:
            out = _trial_outcome(params, ranks, coeff, target)
        count += out[0]
        beta_sum += out[1]
    return idx, count, beta_sum, time.perf_counter() - t0


def _execute(tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [_run_chunk(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_run_chunk, tasks))


def _chunks(trials: int, threads: int) -> list[tuple[int, int]]:
    parts = 1 if threads <= 1 else threads * 4
    size = max(1, -(-trials // parts))
    return [(lo, min(trials, lo + size)) for lo in range(0, trials, size)]


def _run_points(n, d, probs, trials, seed, coeff, target, sampler, threads):
    tasks = []
    samplers = []
    for i, p in enumerate(probs):
        s = choose_sampler(p) if sampler == "auto" else sampler
        samplers.append(s)
        point_seed = mix_seed(seed, i)
        for lo, hi in _chunks(trials, threads):
            tasks.append((i, n, d, p, point_seed, lo, hi, coeff, target, s))
    totals = [[0, 0, 0.0] for _ in probs]
    for i, c, b, sec in _execute(tasks, threads):
        totals[i][0] += c
        totals[i][1] += b
        totals[i][2] += sec
    return totals, samplers


def sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Monte Carlo estimate of the target event at every grid point.

    Trial t at grid point i uses stream (mix_seed(seed, i), t), so the output
    does not depend on ``threads``.
    """
    n, d = config.n, config.d
    probs = [w / n for w in config.w_grid]
    totals, samplers = _run_points(n, d, probs, config.trials, config.seed, config.coeff,
                                   config.target, config.sampler, threads)
    event = {"top": "beta_top>0", "codim1": "H_codim1!=0", "codim1_vanishes": "H_codim1=0"}[config.target]
    res = SweepResult(n, d, event, config.coeff, config.seed)
    for w, p, (c, b, sec), s in zip(config.w_grid, probs, totals, samplers):
        bound = bound_curve(d, w) if config.target == "top" else None
        res.points.append(SweepPoint(w, p, config.trials, c, b, bound, sec, s))
    return res


def lm_probability(n: int, d: int, c: float) -> float:
    return (d * log(n) + c) / n


def lm_sweep(n: int, d: int, c_grid: Sequence[float], trials: int, seed: int, threads: int = 1) -> SweepResult:
    """Prob(H_{d-1}(Delta; GF(2)) = 0) at p = (d log n + c) / n."""
    probs = []
    for c in c_grid:
        p = lm_probability(n, d, c)
        if not 0 <= p <= 1:
            raise ValueError(f"c={c} gives p={p} outside [0, 1]")
        probs.append(p)
    ModelParams(n, d, 0.0)
    totals, samplers = _run_points(n, d, probs, trials, seed, "gf2", "codim1_vanishes", "auto", threads)
    res = SweepResult(n, d, "H_codim1=0", "gf2", seed, kind="lm_sweep")
    for c, p, (cnt, b, sec), s in zip(c_grid, probs, totals, samplers):
        res.points.append(SweepPoint(p * n, p, trials, cnt, b, None, sec, s, c=float(c)))
    return res


# ---------------------------------------------------------------- second moment


def count_empty_boundaries(cs: ComplexSample, batch: int = 4096) -> int:
    """Number of (d+1)-vertex sets all of whose d+2 facets are present.

    Each such set is found once, from its facet omitting the largest vertex.
    """
    n, d = cs.params.n, cs.params.d
    ranks = cs.ranks
    if ranks.size < d + 2:
        return 0
    present = cs.present
    BINOM.ensure(n, d + 1)
    shift = BINOM.table[:n, d + 1]  # colex offset of appending vertex x on top
    xs = np.arange(n)
    total = 0
    for start in range(0, ranks.size, batch):
        r = ranks[start : start + batch]
        faces = facet_rank_array(r, n, d)  # ranks of the (d-1)-faces of each s
        top = np.searchsorted(BINOM.table[:n, d + 1], r, side="right") - 1  # max vertex of s
        ok = xs[None, :] > top[:, None]
        for i in range(d + 1):
            cand = faces[:, i : i + 1] + shift[None, :]
            cand = np.where(ok, cand, 0)
            ok &= present[cand]
        total += int(ok.sum())
    return total


def dependency_degree(n: int, d: int) -> int:
    """Number of (d+1)-simplices sharing exactly one d-face with {0, ..., d+1}."""
    tau = tuple(range(d + 2))
    neighbours = set()
    for face, _ in boundary_faces(tau):
        for x in range(n):
            if x not in tau:
                other = tuple(sorted(face + (x,)))
                if len(set(other) & set(tau)) == d + 1:
                    neighbours.add(other)
    return len(neighbours)


@dataclass
class MomentStats:
    n: int
    d: int
    p: Prob
    trials: int
    mean: float
    variance: float
    positive_trials: int = 0
    witness_violations: Optional[int] = None
    empirical_dependency_degree: int = 0
    seed: Optional[int] = None

    @property
    def w(self) -> Prob:
        return self.p * self.n

    @property
    def expected_x(self) -> Prob:
        return comb(self.n, self.d + 2) * self.p ** (self.d + 2)

    @property
    def formula_dependency_degree(self) -> int:
        # closed-form valency used by xi_star; the enumerated count is (d+2)(n-d-2)
        return (self.d + 2) * (self.n - self.d - 1)

    @property
    def xi_star(self) -> Prob:
        return self.formula_dependency_degree * self.p ** (self.d + 1)

    @property
    def ratio_bound(self) -> Optional[Prob]:
        if self.w == 0 or self.n - self.d - 1 <= 0:
            return None
        d = self.d
        return (d + 2) * factorial(d + 2) / (self.w * (self.n - d - 1) ** d)

    @property
    def xi_ratio(self) -> Optional[float]:
        e = self.expected_x
        return float(self.xi_star / e) if e else None

    @property
    def mean_sigma(self) -> float:
        return sqrt(self.variance / self.trials)

    @property
    def mean_ci(self) -> tuple[float, float]:
        h = Z95 * self.mean_sigma
        return self.mean - h, self.mean + h

    def to_dict(self) -> dict:
        lo, hi = self.mean_ci
        rb = self.ratio_bound
        return {
            "n": self.n, "d": self.d, "p": _num(self.p), "w": _num(self.w),
            "trials": self.trials, "seed": self.seed,
            "mean_x": self.mean, "var_x": self.variance, "mean_ci_low": lo, "mean_ci_high": hi,
            "expected_x": _num(self.expected_x), "xi_star": _num(self.xi_star),
            "xi_ratio": self.xi_ratio, "ratio_bound": None if rb is None else _num(rb),
            "formula_dependency_degree": self.formula_dependency_degree,
            "empirical_dependency_degree": self.empirical_dependency_degree,
            "positive_trials": self.positive_trials,
            "witness_violations": self.witness_violations,
        }


def moment_report(n: int, d: int, p: Prob, trials: int, seed: int, check_witness: bool = True) -> MomentStats:
    """Empirical X = number of empty (d+1)-simplex boundaries, beside its analytic moments.

    With check_witness, every trial with X > 0 is also checked for beta_d > 0.
    """
    params = ModelParams(n, d, p)
    xs = np.zeros(trials, dtype=np.int64)
    violations = 0
    for t in range(trials):
        cs = sample(params, seed, t)
        x = count_empty_boundaries(cs)
        xs[t] = x
        if check_witness and x > 0 and cs.size - top_rank(cs) == 0:
            violations += 1
    var = float(xs.var(ddof=1)) if trials > 1 else 0.0
    return MomentStats(n, d, p, trials, float(xs.mean()), var, int((xs > 0).sum()),
                       violations if check_witness else None, dependency_degree(n, d), seed)
