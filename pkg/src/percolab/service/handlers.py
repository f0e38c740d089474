"""Request handlers shared by the HTTP endpoints and the command line."""

from .. import clusters, exact, montecarlo
from ..events import scan_two_arm
from ..lattice import BoxSpec, ReplicateStream, build_box, sample_config
from . import schemas


def _radius_rows(sequence, master_seed: int) -> list[schemas.RadiusEstimateOut]:
    # rows carry the run's master seed: rerunning it reproduces every row
    return [
        schemas.RadiusEstimateOut(
            radius=row.radius,
            estimate=row.summary.point,
            stderr=row.summary.stderr,
            replicates=row.summary.replicates,
            seed=master_seed,
        )
        for row in sequence
    ]


def run_count(req: schemas.CountRequest) -> schemas.CountResponse:
    spec = build_box(req.dim, req.n)
    config = sample_config(spec, req.p, ReplicateStream(req.seed, req.replicate))
    labeling = clusters.count_clusters(config)
    return schemas.CountResponse(
        dim=req.dim, n=req.n, p=req.p, seed=req.seed, replicate=req.replicate,
        vertices=spec.vertex_count, bonds=spec.bond_count,
        open_bonds=config.open_count(), clusters=labeling.count,
    )


def run_moments(req: schemas.MomentsRequest) -> schemas.MomentsResponse:
    spec = build_box(req.dim, req.n)
    mean, variance = montecarlo.estimate_moments(spec, req.p, req.replicates, req.seed, req.workers)
    density = variance.scaled(1.0 / spec.vertex_count)
    return schemas.MomentsResponse(
        dim=req.dim, n=req.n, p=req.p, replicates=req.replicates, seed=req.seed,
        mean=schemas.EstimateOut.from_core(mean),
        variance=schemas.EstimateOut.from_core(variance),
        density=schemas.EstimateOut.from_core(density),
    )


def _report_out(report: exact.IdentityReport) -> schemas.IdentityReportOut:
    raw = report.to_json_dict()
    aux = {k: v for k, v in raw.items()
           if k not in ("name", "ok", "first_mismatch", "lhs_coefficients", "rhs_coefficients")}
    return schemas.IdentityReportOut(
        name=report.name, ok=report.ok, first_mismatch=report.first_mismatch,
        lhs_coefficients=raw["lhs_coefficients"], rhs_coefficients=raw["rhs_coefficients"],
        aux=aux,
    )


def run_exact_verify(req: schemas.ExactVerifyRequest) -> schemas.ExactVerifyResponse:
    spec = BoxSpec(req.dim, req.n)
    derivative = exact.verify_russo_identity(spec, cap=req.cap, strict=False)
    variance = exact.verify_variance_identity(spec, cap=req.cap, strict=False)
    return schemas.ExactVerifyResponse(
        dim=req.dim, n=req.n, bonds=spec.bond_count,
        derivative=_report_out(derivative), variance=_report_out(variance),
        all_ok=derivative.ok and variance.ok,
    )


def run_kappa_prime(req: schemas.KappaPrimeRequest) -> schemas.KappaPrimeResponse:
    radii = req.radii if req.radii else montecarlo.DEFAULT_KAPPA_RADII
    estimate = montecarlo.estimate_kappa_prime(
        req.dim, req.p, req.replicates, req.seed, radii=radii,
        epsilon=req.epsilon, workers=req.workers, strict=req.strict,
    )
    return schemas.KappaPrimeResponse(
        dim=req.dim, p=req.p, replicates=req.replicates, seed=req.seed,
        kappa_prime=schemas.EstimateOut.from_core(estimate.summary),
        radius=estimate.radius, converged=estimate.converged,
        sequence=_radius_rows(estimate.sequence, req.seed),
    )


def run_theorem(req: schemas.TheoremRequest) -> schemas.TheoremResponse:
    spec = build_box(req.dim, req.n)
    radii = req.radii if req.radii else montecarlo.DEFAULT_KAPPA_RADII
    comparison = montecarlo.compare_to_prediction(
        spec, req.p, req.replicates, req.seed, workers=req.workers,
        radii=radii, epsilon=req.epsilon,
    )
    return schemas.TheoremResponse(
        dim=req.dim, n=req.n, p=req.p, replicates=req.replicates, seed=req.seed,
        mean=schemas.EstimateOut.from_core(comparison.mean),
        variance=schemas.EstimateOut.from_core(comparison.variance),
        density=schemas.EstimateOut.from_core(comparison.density),
        kappa_prime=schemas.EstimateOut.from_core(comparison.kappa.summary),
        kappa_radius=comparison.kappa.radius,
        kappa_converged=comparison.kappa.converged,
        empirical_density=comparison.empirical_density,
        predicted_limit=comparison.predicted_limit,
        gap=comparison.gap,
        gap_in_stderr=comparison.gap_in_stderr,
    )


def run_clt(req: schemas.CltRequest) -> schemas.CltResponse:
    spec = build_box(req.dim, req.n)
    result = montecarlo.clt_check(spec, req.p, req.replicates, req.seed,
                                  workers=req.workers, threshold=req.threshold)
    return schemas.CltResponse(
        dim=req.dim, n=req.n, p=req.p, replicates=req.replicates, seed=req.seed,
        ks_distance=result.ks_distance, threshold=result.threshold, passed=result.passed,
    )


def run_two_arm(req: schemas.TwoArmRequest) -> schemas.TwoArmResponse:
    rows = scan_two_arm(req.dim, req.p, req.radii, req.replicates, req.seed, req.workers)
    return schemas.TwoArmResponse(
        dim=req.dim, p=req.p, replicates=req.replicates, seed=req.seed,
        rows=_radius_rows(rows, req.seed),
    )


def run_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    rows = []
    for p in req.p_values:
        sub = schemas.TheoremRequest(
            dim=req.dim, n=req.n, p=p, replicates=req.replicates, seed=req.seed,
            workers=req.workers, radii=req.radii, epsilon=req.epsilon,
        )
        rows.append(run_theorem(sub))
    return schemas.SweepResponse(rows=rows)
