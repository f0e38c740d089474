"""Replicate summaries: point estimates, variance-of-estimate and 95% intervals."""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

Z95 = 1.96  # fixed normal critical value; replicate counts here are large


class DegenerateSampleError(ValueError):
    """All replicates identical where spread was required (e.g. p in {0, 1})."""


@dataclass(frozen=True)
class EstimateSummary:
    """A Monte Carlo point estimate with its sampling uncertainty."""

    point: float
    variance_of_point: float
    stderr: float
    ci95: tuple[float, float]
    replicates: int
    master_seed: int

    def scaled(self, factor: float) -> "EstimateSummary":
        return _summary(self.point * factor, self.variance_of_point * factor**2,
                        self.replicates, self.master_seed)


def _summary(point: float, variance_of_point: float, replicates: int, seed: int) -> EstimateSummary:
    variance_of_point = max(float(variance_of_point), 0.0)
    stderr = float(np.sqrt(variance_of_point))
    return EstimateSummary(
        point=float(point),
        variance_of_point=variance_of_point,
        stderr=stderr,
        ci95=(float(point - Z95 * stderr), float(point + Z95 * stderr)),
        replicates=replicates,
        master_seed=seed,
    )


def mean_summary(values: np.ndarray, master_seed: int) -> EstimateSummary:
    """Sample mean with stderr = s/sqrt(R) (Bessel-corrected s)."""
    values = np.asarray(values, dtype=np.float64)
    r = values.size
    if r < 2:
        raise ValueError("need at least 2 replicates for a mean with uncertainty")
    return _summary(values.mean(), values.var(ddof=1) / r, r, master_seed)


def variance_summary(values: np.ndarray, master_seed: int) -> EstimateSummary:
    """Bessel-corrected sample variance; its own variance via the fourth central moment.

    Var(s^2) is estimated by (m4 - m2^2 (R-3)/(R-1)) / R with m2, m4 the biased
    central moments; nonnegative since m4 >= m2^2.
    """
    values = np.asarray(values, dtype=np.float64)
    r = values.size
    if r < 2:
        raise ValueError("need at least 2 replicates for a variance")
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    s2 = values.var(ddof=1)
    var_s2 = (m4 - m2 * m2 * (r - 3) / (r - 1)) / r
    return _summary(s2, var_s2, r, master_seed)


def ks_distance_to_normal(values: np.ndarray) -> float:
    """Sup-norm distance between the standardized empirical CDF and the normal CDF."""
    values = np.asarray(values, dtype=np.float64)
    std = values.std(ddof=1)
    if std == 0:
        raise DegenerateSampleError("sample has zero spread; cannot standardize")
    z = np.sort((values - values.mean()) / std)
    r = z.size
    cdf = ndtr(z)
    upper = np.arange(1, r + 1) / r - cdf
    lower = cdf - np.arange(0, r) / r
    return float(max(upper.max(), lower.max()))
