"""Command-line front end: parses flags into the service request models, runs
the shared handlers in-process and emits CSV or JSON.

Exit codes: 0 success, 1 failed identity check or failed run, 2 usage error.
Every emitted row embeds the seed and schema version; reruns with the same
flags reproduce output bit-for-bit, and --workers changes wall time only.
"""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .events import GeometryError
from .lattice import EnumerationCapError, SizeOverflowError
from .montecarlo import ClusterBookkeepingError, ConvergenceError
from .service import handlers, schemas
from .service.schemas import SCHEMA_VERSION
from .stats import DegenerateSampleError

THEOREM_COLUMNS = ["schema_version", "d", "n", "p", "replicates", "seed", "mean",
                   "mean_stderr", "var", "var_stderr", "var_density",
                   "predicted_limit", "gap_in_stderr"]
VARIANCE_COLUMNS = ["schema_version", "d", "n", "p", "replicates", "seed", "mean",
                    "mean_stderr", "var", "var_stderr", "var_density",
                    "var_density_stderr"]
TWO_ARM_COLUMNS = ["schema_version", "d", "p", "m", "replicates", "estimate",
                   "stderr", "seed"]
KAPPA_COLUMNS = ["schema_version", "d", "p", "m", "replicates", "estimate",
                 "stderr", "seed", "kappa_prime", "converged_radius", "converged"]
CLT_COLUMNS = ["schema_version", "d", "n", "p", "replicates", "seed",
               "ks_distance", "threshold", "passed"]


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _json(payload, command: str) -> str:
    doc = {"version": __version__, "schema_version": SCHEMA_VERSION, "command": command}
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


def _parse_radii(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radii list {text!r}; expected e.g. 4,8,16")


def _parse_grid(text: str) -> list[float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected lo:hi:step")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; need lo <= hi and step > 0")
    values = []
    v = lo
    while v <= hi + 1e-9:
        values.append(round(v, 10))
        v += step
    return values


def _theorem_row(r: schemas.TheoremResponse) -> list:
    return [SCHEMA_VERSION, r.dim, r.n, r.p, r.replicates, r.seed, r.mean.point,
            r.mean.stderr, r.variance.point, r.variance.stderr, r.density.point,
            r.predicted_limit, r.gap_in_stderr]


def cmd_count(args) -> int:
    req = schemas.CountRequest(dim=args.dim, n=args.n, p=args.p, seed=args.seed,
                               replicate=args.replicate)
    res = handlers.run_count(req)
    if args.format == "json":
        _emit(_json(res.model_dump(), "count"), args.out)
    else:
        _emit(f"d={res.dim} n={res.n} p={res.p} seed={res.seed} replicate={res.replicate} "
              f"open_bonds={res.open_bonds} clusters={res.clusters}\n", args.out)
    return 0


def cmd_exact_verify(args) -> int:
    req = schemas.ExactVerifyRequest(dim=args.dim, n=args.n, cap=args.cap)
    res = handlers.run_exact_verify(req)
    _emit(_json(res.model_dump(), "exact-verify"), args.out)
    return 0 if res.all_ok else 1


def cmd_variance(args) -> int:
    req = schemas.MomentsRequest(dim=args.dim, n=args.n, p=args.p, replicates=args.replicates,
                                 seed=args.seed, workers=args.workers)
    res = handlers.run_moments(req)
    if args.format == "json":
        _emit(_json(res.model_dump(), "variance"), args.out)
    else:
        row = [SCHEMA_VERSION, res.dim, res.n, res.p, res.replicates, res.seed,
               res.mean.point, res.mean.stderr, res.variance.point, res.variance.stderr,
               res.density.point, res.density.stderr]
        _emit(_csv(VARIANCE_COLUMNS, [row]), args.out)
    return 0


def cmd_kappa_prime(args) -> int:
    req = schemas.KappaPrimeRequest(dim=args.dim, p=args.p, replicates=args.replicates,
                                    seed=args.seed, radii=args.radii, epsilon=args.epsilon,
                                    workers=args.workers, strict=not args.no_strict)
    res = handlers.run_kappa_prime(req)
    if args.format == "csv":
        rows = [[SCHEMA_VERSION, res.dim, res.p, row.radius, row.replicates, row.estimate,
                 row.stderr, row.seed, res.kappa_prime.point, res.radius, res.converged]
                for row in res.sequence]
        _emit(_csv(KAPPA_COLUMNS, rows), args.out)
    else:
        _emit(_json(res.model_dump(), "kappa-prime"), args.out)
    return 0


def cmd_theorem(args) -> int:
    req = schemas.TheoremRequest(dim=args.dim, n=args.n, p=args.p, replicates=args.replicates,
                                 seed=args.seed, workers=args.workers, radii=args.radii,
                                 epsilon=args.epsilon)
    res = handlers.run_theorem(req)
    if args.format == "json":
        _emit(_json(res.model_dump(), "theorem"), args.out)
    else:
        _emit(_csv(THEOREM_COLUMNS, [_theorem_row(res)]), args.out)
    return 0


def cmd_clt(args) -> int:
    req = schemas.CltRequest(dim=args.dim, n=args.n, p=args.p, replicates=args.replicates,
                             seed=args.seed, workers=args.workers, threshold=args.threshold)
    res = handlers.run_clt(req)
    if args.format == "csv":
        row = [SCHEMA_VERSION, res.dim, res.n, res.p, res.replicates, res.seed,
               res.ks_distance, res.threshold, res.passed]
        _emit(_csv(CLT_COLUMNS, [row]), args.out)
    else:
        _emit(_json(res.model_dump(), "clt"), args.out)
    return 0


def cmd_two_arm(args) -> int:
    req = schemas.TwoArmRequest(dim=args.dim, p=args.p, radii=args.radii,
                                replicates=args.replicates, seed=args.seed,
                                workers=args.workers)
    res = handlers.run_two_arm(req)
    if args.format == "json":
        _emit(_json(res.model_dump(), "two-arm"), args.out)
    else:
        rows = [[SCHEMA_VERSION, res.dim, res.p, row.radius, row.replicates,
                 row.estimate, row.stderr, row.seed] for row in res.rows]
        _emit(_csv(TWO_ARM_COLUMNS, rows), args.out)
    return 0


def cmd_sweep(args) -> int:
    req = schemas.SweepRequest(dim=args.dim, n=args.n, p_values=args.p_grid,
                               replicates=args.replicates, seed=args.seed,
                               workers=args.workers, radii=args.radii,
                               epsilon=args.epsilon)
    res = handlers.run_sweep(req)
    if args.format == "json":
        _emit(_json(res.model_dump(), "sweep"), args.out)
    else:
        _emit(_csv(THEOREM_COLUMNS, [_theorem_row(r) for r in res.rows]), args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("percolab.service.app:app", host=args.host, port=args.port)
    return 0


def _add_common(sub, n_flag=True, p_flag=True, mc_flags=True):
    sub.add_argument("--dim", type=int, required=True, help="lattice dimension d")
    if n_flag:
        sub.add_argument("--n", type=int, required=True, help="box radius")
    if p_flag:
        sub.add_argument("--p", type=float, required=True, help="bond open probability")
    if mc_flags:
        sub.add_argument("--replicates", type=int, default=1000, help="independent replicates")
        sub.add_argument("--seed", type=int, default=0, help="master seed")
        sub.add_argument("--workers", type=int, default=1,
                         help="worker processes; never changes numbers, only wall time")
    sub.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="percolab",
        description="Bond-percolation cluster-count laboratory",
    )
    parser.add_argument("--version", action="version", version=f"percolab {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("count", help="count open clusters of one sampled configuration")
    _add_common(sub, mc_flags=False)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--replicate", type=int, default=0)
    sub.add_argument("--format", choices=("text", "json"), default="text")
    sub.set_defaults(func=cmd_count)

    sub = commands.add_parser("exact-verify",
                              help="exact polynomial identity checks on a tiny box")
    _add_common(sub, p_flag=False, mc_flags=False)
    sub.add_argument("--cap", type=int, default=24, help="max bonds to enumerate")
    sub.set_defaults(func=cmd_exact_verify)

    sub = commands.add_parser("variance", help="cluster-count mean/variance estimation")
    _add_common(sub)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.set_defaults(func=cmd_variance)

    sub = commands.add_parser("kappa-prime",
                              help="derivative of clusters-per-vertex via growing boxes")
    _add_common(sub, n_flag=False)
    sub.add_argument("--radii", type=_parse_radii, default=None,
                     help="growing box radii, e.g. 8,16,32,64,128")
    sub.add_argument("--epsilon", type=float, default=0.005,
                     help="stopping rule on consecutive estimates")
    sub.add_argument("--no-strict", action="store_true",
                     help="return the largest radius instead of failing when unconverged")
    sub.add_argument("--format", choices=("csv", "json"), default="json")
    sub.set_defaults(func=cmd_kappa_prime)

    sub = commands.add_parser("theorem",
                              help="variance density vs the pivotal-bond prediction")
    _add_common(sub)
    sub.add_argument("--radii", type=_parse_radii, default=None)
    sub.add_argument("--epsilon", type=float, default=0.005)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.set_defaults(func=cmd_theorem)

    sub = commands.add_parser("clt", help="normality check of standardized counts")
    _add_common(sub)
    sub.add_argument("--threshold", type=float, default=0.05)
    sub.add_argument("--format", choices=("csv", "json"), default="json")
    sub.set_defaults(func=cmd_clt)

    sub = commands.add_parser("two-arm", help="two-arm event probability scan")
    _add_common(sub, n_flag=False)
    sub.add_argument("--radii", type=_parse_radii, required=True,
                     help="box radii, e.g. 4,8,16,32")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.set_defaults(func=cmd_two_arm)

    sub = commands.add_parser("sweep", help="theorem comparison over a p grid")
    _add_common(sub, p_flag=False)
    sub.add_argument("--p-grid", type=_parse_grid, required=True, help="lo:hi:step")
    sub.add_argument("--radii", type=_parse_radii, default=None)
    sub.add_argument("--epsilon", type=float, default=0.005)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser("serve", help="run the HTTP service")
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--port", type=int, default=8000)
    sub.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, DegenerateSampleError, ClusterBookkeepingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SizeOverflowError, EnumerationCapError, GeometryError,
            ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
