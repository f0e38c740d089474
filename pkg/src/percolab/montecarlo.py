"""Replicated Monte Carlo estimation of cluster-count moments and the variance
density, the clusters-per-vertex derivative via growing boxes, and a normality
check of the standardized counts.

Replicate r of an experiment always draws from ReplicateStream(master_seed, r),
and reductions run in replicate order, so every estimator here returns
bit-identical numbers for any worker count.
"""

from dataclasses import dataclass

import numpy as np

from . import clusters
from .events import RadiusEstimate, no_bypass_estimate
from .lattice import BoxSpec, ReplicateStream, build_box, sample_config
from .parallel import run_replicate_chunks
from .stats import EstimateSummary, ks_distance_to_normal, mean_summary, variance_summary

DEFAULT_KAPPA_RADII = (8, 16, 32, 64, 128)
DEFAULT_KAPPA_EPSILON = 0.005


class ConvergenceError(RuntimeError):
    """Growing-box estimates did not stabilize at the largest radius."""


class ClusterBookkeepingError(RuntimeError):
    """Per-configuration identity sum_v 1/|C(v)| == cluster count failed."""


def _cluster_count_chunk(d: int, n: int, p: float, seed: int, start: int, stop: int) -> np.ndarray:
    spec = build_box(d, n)
    out = np.empty(stop - start, dtype=np.int64)
    for r in range(start, stop):
        config = sample_config(spec, p, ReplicateStream(seed, r))
        out[r - start] = clusters.count_clusters(config).count
    return out


def _inverse_density_chunk(d: int, n: int, p: float, seed: int, start: int, stop: int) -> np.ndarray:
    spec = build_box(d, n)
    out = np.empty(stop - start, dtype=np.float64)
    for r in range(start, stop):
        config = sample_config(spec, p, ReplicateStream(seed, r))
        labeling = clusters.count_clusters(config)
        inverse_sum = float(np.sum(1.0 / labeling.sizes[labeling.component_id]))
        # each cluster contributes size * (1/size) = 1, so the sum is the count
        if abs(inverse_sum - labeling.count) > 1e-6 * spec.vertex_count:
            raise ClusterBookkeepingError(
                f"replicate {r}: sum of inverse cluster sizes {inverse_sum} "
                f"!= cluster count {labeling.count}"
            )
        out[r - start] = inverse_sum / spec.vertex_count
    return out


def sample_cluster_counts(spec: BoxSpec, p: float, replicates: int, master_seed: int,
                          workers: int = 1) -> np.ndarray:
    """Cluster counts of `replicates` independent configurations, replicate order."""
    return run_replicate_chunks(
        _cluster_count_chunk, (spec.d, spec.n, p, master_seed), replicates, workers
    )


def estimate_moments(spec: BoxSpec, p: float, replicates: int, master_seed: int,
                     workers: int = 1) -> tuple[EstimateSummary, EstimateSummary]:
    """Sample mean and Bessel-corrected sample variance of the cluster count.

    The variance summary's own uncertainty comes from the fourth central moment.
    """
    if replicates < 2:
        raise ValueError("moment estimation needs at least 2 replicates")
    values = sample_cluster_counts(spec, p, replicates, master_seed, workers)
    return mean_summary(values, master_seed), variance_summary(values, master_seed)


def variance_density(spec: BoxSpec, p: float, replicates: int, master_seed: int,
                     workers: int = 1) -> EstimateSummary:
    """Sample variance of the cluster count divided by the vertex count."""
    _, var = estimate_moments(spec, p, replicates, master_seed, workers)
    return var.scaled(1.0 / spec.vertex_count)


@dataclass(frozen=True)
class KappaPrimeEstimate:
    """Derivative of clusters-per-vertex via -d * P(no bypass), growing boxes."""

    summary: EstimateSummary
    radius: int
    converged: bool
    sequence: list[RadiusEstimate]


def estimate_kappa_prime(d: int, p: float, replicates: int, master_seed: int,
                         radii=DEFAULT_KAPPA_RADII, epsilon: float = DEFAULT_KAPPA_EPSILON,
                         workers: int = 1, strict: bool = True) -> KappaPrimeEstimate:
    """Estimate the derivative of the clusters-per-vertex density.

    The derivative equals -d times the probability that the origin bond has no
    open bypass on the infinite lattice; that event has no finite witness, so it
    is approximated through the nested box events on a growing radius schedule,
    stopping once consecutive estimates differ by less than `epsilon`. The
    schedule is evaluated lazily: radii after the stopping radius are not run.

    With strict=True an unmet stopping rule raises ConvergenceError; otherwise
    the largest-radius estimate is returned flagged converged=False.
    """
    radii = [int(m) for m in radii]
    if len(radii) < 1 or sorted(radii) != radii:
        raise ValueError("radii must be a non-empty increasing schedule")
    sequence: list[RadiusEstimate] = []
    converged = False
    for m in radii:
        sequence.append(RadiusEstimate(m, no_bypass_estimate(d, m, p, replicates, master_seed, workers)))
        if len(sequence) >= 2 and abs(sequence[-1].summary.point - sequence[-2].summary.point) < epsilon:
            converged = True
            break
    if not converged and strict:
        gap = abs(sequence[-1].summary.point - sequence[-2].summary.point) if len(sequence) > 1 else float("nan")
        raise ConvergenceError(
            f"no-bypass estimates not within {epsilon} at radius {radii[-1]} (last gap {gap:.4g})"
        )
    last = sequence[-1]
    return KappaPrimeEstimate(
        summary=last.summary.scaled(-float(d)),
        radius=last.radius,
        converged=converged,
        sequence=sequence,
    )


@dataclass(frozen=True)
class VarianceComparison:
    """Empirical variance density next to the pivotal-bond prediction
    -(p^2(1-p) + p(1-p)^2) * kappa'(p)."""

    d: int
    n: int
    p: float
    replicates: int
    master_seed: int
    mean: EstimateSummary
    variance: EstimateSummary
    density: EstimateSummary
    kappa: KappaPrimeEstimate
    empirical_density: float
    predicted_limit: float
    gap: float
    gap_in_stderr: float


def compare_to_prediction(spec: BoxSpec, p: float, replicates: int, master_seed: int,
                          workers: int = 1, radii=DEFAULT_KAPPA_RADII,
                          epsilon: float = DEFAULT_KAPPA_EPSILON) -> VarianceComparison:
    """Join the variance density with the pivotal-bond prediction for its limit.

    The growing-box derivative estimate may stop unconverged at the largest
    radius; the comparison still reports it (kappa.converged says which) so the
    headline pipeline always emits a full row.
    """
    mean, variance = estimate_moments(spec, p, replicates, master_seed, workers)
    density = variance.scaled(1.0 / spec.vertex_count)
    kappa = estimate_kappa_prime(spec.d, p, replicates, master_seed, radii=radii,
                                 epsilon=epsilon, workers=workers, strict=False)
    prefactor = p * p * (1.0 - p) + p * (1.0 - p) ** 2
    assert abs(prefactor - p * (1.0 - p)) < 1e-12  # symmetric in p <-> 1-p
    predicted = -prefactor * kappa.summary.point
    gap = density.point - predicted
    combined = float(np.hypot(density.stderr, prefactor * kappa.summary.stderr))
    gap_in_stderr = abs(gap) / combined if combined > 0 else (0.0 if gap == 0 else float("inf"))
    return VarianceComparison(
        d=spec.d, n=spec.n, p=p, replicates=replicates, master_seed=master_seed,
        mean=mean, variance=variance, density=density, kappa=kappa,
        empirical_density=density.point, predicted_limit=predicted,
        gap=gap, gap_in_stderr=gap_in_stderr,
    )


def estimate_kappa_inverse(spec: BoxSpec, p: float, replicates: int, master_seed: int,
                           workers: int = 1) -> EstimateSummary:
    """Clusters-per-vertex via the mean inverse cluster size.

    Per configuration, sum_v 1/|C(v) in box| counts each cluster once, so the
    estimate equals the cluster-count density identically; the per-replicate
    equality is asserted as a bookkeeping self-check on the size table.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    values = run_replicate_chunks(
        _inverse_density_chunk, (spec.d, spec.n, p, master_seed), replicates, workers
    )
    return mean_summary(values, master_seed)


@dataclass(frozen=True)
class CltResult:
    ks_distance: float
    passed: bool
    threshold: float
    replicates: int
    master_seed: int


def clt_check(spec: BoxSpec, p: float, replicates: int, master_seed: int,
              workers: int = 1, threshold: float = 0.05) -> CltResult:
    """Kolmogorov-Smirnov distance between standardized cluster counts and the
    standard normal CDF. Raises DegenerateSampleError when the counts have zero
    spread (p in {0, 1})."""
    if replicates < 500:
        raise ValueError("normality check needs at least 500 replicates")
    values = sample_cluster_counts(spec, p, replicates, master_seed, workers)
    distance = ks_distance_to_normal(values)
    return CltResult(
        ks_distance=distance,
        passed=distance < threshold,
        threshold=threshold,
        replicates=replicates,
        master_seed=master_seed,
    )
