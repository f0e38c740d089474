"""Pydantic request/response models for the service endpoints (and the CLI)."""

from pydantic import BaseModel, Field

from ..stats import EstimateSummary

SCHEMA_VERSION = 1

_SEED = Field(default=0, ge=0, lt=2**64)
_WORKERS = Field(default=1, ge=1, le=64)


class EstimateOut(BaseModel):
    point: float
    variance_of_point: float
    stderr: float
    ci_low: float
    ci_high: float
    replicates: int
    seed: int

    @classmethod
    def from_core(cls, s: EstimateSummary) -> "EstimateOut":
        return cls(point=s.point, variance_of_point=s.variance_of_point, stderr=s.stderr,
                   ci_low=s.ci95[0], ci_high=s.ci95[1], replicates=s.replicates,
                   seed=s.master_seed)


class RadiusEstimateOut(BaseModel):
    radius: int
    estimate: float
    stderr: float
    replicates: int
    seed: int


class CountRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    seed: int = _SEED
    replicate: int = Field(default=0, ge=0)


class CountResponse(BaseModel):
    dim: int
    n: int
    p: float
    seed: int
    replicate: int
    vertices: int
    bonds: int
    open_bonds: int
    clusters: int


class MomentsRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    replicates: int = Field(default=1000, ge=2)
    seed: int = _SEED
    workers: int = _WORKERS


class MomentsResponse(BaseModel):
    dim: int
    n: int
    p: float
    replicates: int
    seed: int
    mean: EstimateOut
    variance: EstimateOut
    density: EstimateOut


class ExactVerifyRequest(BaseModel):
    dim: int = Field(ge=1, le=4)
    n: int = Field(ge=1)
    cap: int = Field(default=24, ge=1, le=30)


class IdentityReportOut(BaseModel):
    name: str
    ok: bool
    first_mismatch: int | None
    lhs_coefficients: list[str]
    rhs_coefficients: list[str]
    aux: dict = {}


class ExactVerifyResponse(BaseModel):
    dim: int
    n: int
    bonds: int
    derivative: IdentityReportOut
    variance: IdentityReportOut
    all_ok: bool


class KappaPrimeRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    p: float = Field(ge=0.0, le=1.0)
    replicates: int = Field(default=10000, ge=2)
    seed: int = _SEED
    radii: list[int] | None = None
    epsilon: float = Field(default=0.005, gt=0.0)
    workers: int = _WORKERS
    strict: bool = True


class KappaPrimeResponse(BaseModel):
    dim: int
    p: float
    replicates: int
    seed: int
    kappa_prime: EstimateOut
    radius: int
    converged: bool
    sequence: list[RadiusEstimateOut]


class TheoremRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    replicates: int = Field(default=1000, ge=2)
    seed: int = _SEED
    workers: int = _WORKERS
    radii: list[int] | None = None
    epsilon: float = Field(default=0.005, gt=0.0)


class TheoremResponse(BaseModel):
    dim: int
    n: int
    p: float
    replicates: int
    seed: int
    mean: EstimateOut
    variance: EstimateOut
    density: EstimateOut
    kappa_prime: EstimateOut
    kappa_radius: int
    kappa_converged: bool
    empirical_density: float
    predicted_limit: float
    gap: float
    gap_in_stderr: float


class CltRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    n: int = Field(ge=1)
    p: float = Field(ge=0.0, le=1.0)
    replicates: int = Field(default=2000, ge=500)
    seed: int = _SEED
    workers: int = _WORKERS
    threshold: float = Field(default=0.05, gt=0.0)


class CltResponse(BaseModel):
    dim: int
    n: int
    p: float
    replicates: int
    seed: int
    ks_distance: float
    threshold: float
    passed: bool


class TwoArmRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    p: float = Field(ge=0.0, le=1.0)
    radii: list[int] = Field(min_length=1)
    replicates: int = Field(default=1000, ge=2)
    seed: int = _SEED
    workers: int = _WORKERS


class TwoArmResponse(BaseModel):
    dim: int
    p: float
    replicates: int
    seed: int
    rows: list[RadiusEstimateOut]


class SweepRequest(BaseModel):
    dim: int = Field(ge=1, le=6)
    n: int = Field(ge=1)
    p_values: list[float] = Field(min_length=1)
    replicates: int = Field(default=1000, ge=2)
    seed: int = _SEED
    workers: int = _WORKERS
    radii: list[int] | None = None
    epsilon: float = Field(default=0.005, gt=0.0)


class SweepResponse(BaseModel):
    rows: list[TheoremResponse]
