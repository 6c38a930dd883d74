from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

Z95 = 1.959963984540054


def wilson_interval(count: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = count / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard rounding at the endpoints so the interval always holds phat
    return min(lo, phat), max(hi, phat)


@dataclass(frozen=True)
class Estimate:
    count: int
    trials: int

    @property
    def value(self) -> float:
        return self.count / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.count, self.trials)

    @property
    def ci_halfwidth(self) -> float:
        lo, hi = self.ci
        return (hi - lo) / 2

    def to_dict(self) -> dict:
        lo, hi = self.ci
        return {"count": self.count, "trials": self.trials, "estimate": self.value,
                "ci_low": lo, "ci_high": hi}
