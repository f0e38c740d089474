"""HTTP surface of the lab: one POST endpoint per experiment type.

Run with `percolab serve` or `uvicorn percolab.service.app:app`.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..events import GeometryError
from ..lattice import EnumerationCapError, SizeOverflowError
from ..montecarlo import ClusterBookkeepingError, ConvergenceError
from ..stats import DegenerateSampleError
from . import handlers, schemas

app = FastAPI(title="percolab", version=__version__)


@app.exception_handler(ConvergenceError)
@app.exception_handler(DegenerateSampleError)
@app.exception_handler(ClusterBookkeepingError)
async def _conflict(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=409, content={"detail": str(exc)})


@app.exception_handler(SizeOverflowError)
@app.exception_handler(EnumerationCapError)
@app.exception_handler(GeometryError)
@app.exception_handler(ValueError)
async def _unprocessable(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/count", response_model=schemas.CountResponse)
def count(req: schemas.CountRequest) -> schemas.CountResponse:
    return handlers.run_count(req)


@app.post("/exact-verify", response_model=schemas.ExactVerifyResponse)
def exact_verify(req: schemas.ExactVerifyRequest) -> schemas.ExactVerifyResponse:
    return handlers.run_exact_verify(req)


@app.post("/variance", response_model=schemas.MomentsResponse)
def variance(req: schemas.MomentsRequest) -> schemas.MomentsResponse:
    return handlers.run_moments(req)


@app.post("/kappa-prime", response_model=schemas.KappaPrimeResponse)
def kappa_prime(req: schemas.KappaPrimeRequest) -> schemas.KappaPrimeResponse:
    return handlers.run_kappa_prime(req)


@app.post("/theorem", response_model=schemas.TheoremResponse)
def theorem(req: schemas.TheoremRequest) -> schemas.TheoremResponse:
    return handlers.run_theorem(req)


@app.post("/clt", response_model=schemas.CltResponse)
def clt(req: schemas.CltRequest) -> schemas.CltResponse:
    return handlers.run_clt(req)


@app.post("/two-arm", response_model=schemas.TwoArmResponse)
def two_arm(req: schemas.TwoArmRequest) -> schemas.TwoArmResponse:
    return handlers.run_two_arm(req)


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    return handlers.run_sweep(req)
