"""Command-line front end.

    sphermoments <moments|anisotropy|sweep|validate|bench> [flags]

All JSON output carries a "schema": "1" field and 17-significant-digit
floats so doubles round-trip; infinities are emitted as the string
"inf".  Exit codes: 0 success, 1 validation-suite failure or violated
anisotropy bound, 2 input error, 3 I/O error.  SPHERMOMENTS_SEED
provides the default --seed.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import _backend, anisotropy, distributions, moments, oracle, validation
from .errors import ConvergenceError
from .reports import moment_report_to_json

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_IO_ERROR = 3

SWEEP_OUTPUTS = ("fa", "ratio", "eigenvalues", "mean_norm")


def _default_seed():
    return int(os.environ.get("SPHERMOMENTS_SEED", "0"))


# ---------------------------------------------------------------------------
# JSON/CSV emission with fixed float formatting (byte-identical reruns)

class _Digits12(float):
    """Marker for values emitted with 12 significant digits (bound constants)."""


def _format_float(x, spec=".17g"):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), spec)


def dumps(obj):
    """Serialize to JSON with 17-significant-digit floats."""
    parts = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj, parts):
    if obj is None:
        parts.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, _Digits12):
        parts.append(_format_float(float(obj), ".12g"))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                parts.append(", ")
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _emit(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, value in enumerate(obj):
            if i:
                parts.append(", ")
            _emit(value, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def _csv_cell(value):
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(float(value), ".17g")
    return str(value)


def _write_output(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# shared input parsing

def _add_dist_arguments(parser):
    parser.add_argument("--dist-json", help="distribution parameters as inline JSON")
    parser.add_argument("--dist", help="@path to a JSON file with the same schema")


def _load_distribution(args):
    if args.dist_json and args.dist:
        raise ValueError("pass either --dist-json or --dist, not both")
    if args.dist_json:
        text = args.dist_json
    elif args.dist:
        if not args.dist.startswith("@"):
            raise ValueError("--dist expects @path (use --dist-json for inline JSON)")
        try:
            with open(args.dist[1:]) as fh:
                text = fh.read()
        except OSError as exc:
            raise ValueError(f"cannot read distribution file: {exc}") from exc
    else:
        raise ValueError("a distribution is required (--dist-json or --dist @path)")
    return distributions.distribution_from_json(json.loads(text))


def _closed_form_report(dist):
    if dist.kind == "vmf":
        return moments.vmf_moments(dist.k, dist.u)
    if dist.kind == "bimodal_vmf":
        return moments.bimodal_vmf_moments(dist.k, dist.u)
    if dist.kind == "peanut":
        return moments.peanut_moments(dist.A)
    return None


def _anisotropy_report(dist, params):
    if dist.kind == "bimodal_vmf":
        return anisotropy.vmf_closed_form_report(dist.k, dist.u, params)
    if dist.kind == "peanut":
        sym_gap = float(np.max(np.abs(dist.A - dist.A.T)))
        if sym_gap <= 1e-10 * max(1.0, float(np.max(np.abs(dist.A)))):
            return anisotropy.peanut_closed_form_report(dist.A, params)
        # asymmetric input: the generic route symmetrizes via the
        # closed-form covariance
        return anisotropy.anisotropy_report(dist, params)
    return anisotropy.anisotropy_report(dist, params)


def _anisotropy_report_json(report):
    bounds = {
        name: (value if math.isinf(value) else _Digits12(value))
        for name, value in report.bounds.items()
    }
    return {
        "schema": "1",
        "eigenvalues": report.eigenvalues,
        "fa": report.fa,
        "ratio": report.ratio,
        "bounds": bounds,
        "bound_flags": dict(report.bound_flags),
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_moments(args):
    dist = _load_distribution(args)
    closed = _closed_form_report(dist)
    out = {
        "schema": "1",
        "closed_form": None if closed is None else moment_report_to_json(closed),
    }
    if args.oracle != "none":
        if args.oracle == "quad":
            report = oracle.quad_moments(dist, resolution=args.resolution)
        else:
            report = oracle.mc_moments(
                dist, oracle.McSpec(dist.n, args.samples, args.seed)
            )
        out["oracle"] = moment_report_to_json(report)
        if closed is not None:
            out["max_abs_dev"] = max(
                float(np.max(np.abs(closed.mean - report.mean))),
                float(np.max(np.abs(closed.covariance - report.covariance))),
            )
        else:
            out["max_abs_dev"] = None
    sys.stdout.write(dumps(out) + "\n")
    return EXIT_OK


def cmd_anisotropy(args):
    dist = _load_distribution(args)
    params = anisotropy.MotilityParams(args.s, args.mu)
    report = _anisotropy_report(dist, params)
    sys.stdout.write(dumps(_anisotropy_report_json(report)) + "\n")
    # a violated bound signals a library bug, not an input problem
    return EXIT_OK if report.bounds_satisfied else EXIT_SUITE_FAILURE


def _parse_grid(args):
    if args.grid and args.grid_log:
        raise ValueError("pass either --grid or --grid-log, not both")
    if args.grid:
        values = [float(v) for v in args.grid.split(",") if v.strip()]
    elif args.grid_log:
        lo, hi, count = args.grid_log
        if lo <= 0 or hi <= lo or int(count) < 1:
            raise ValueError("--grid-log expects 0 < MIN < MAX and COUNT >= 1")
        values = (
            [lo]
            if int(count) == 1
            else list(np.geomspace(lo, hi, int(count)))
        )
    else:
        raise ValueError("a grid is required (--grid or --grid-log)")
    if not values:
        raise ValueError("grid must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid values must be strictly increasing")
    return values


def _sweep_rows(args, dist, params, values, outputs):
    rows = []
    for value in values:
        if args.parameter == "k":
            point = distributions.SphericalDistribution(
                dist.kind, dist.n, u=dist.u, k=value
            )
        else:
            a = np.eye(dist.n)
            a[0, 0] = value
            point = distributions.SphericalDistribution(dist.kind, dist.n, A=a)
        report = _anisotropy_report(point, params)
        row = {"parameter": args.parameter, "value": value}
        for output in outputs:
            if output == "fa":
                row["fa"] = report.fa
            elif output == "ratio":
                row["ratio"] = report.ratio
            elif output == "eigenvalues":
                for i, lam in enumerate(report.eigenvalues, start=1):
                    row[f"eigenvalue_{i}"] = float(lam)
            elif output == "mean_norm":
                if point.kind == "vmf":
                    row["mean_norm"] = float(
                        np.linalg.norm(moments.vmf_mean(point.k, point.u))
                    )
                else:
                    row["mean_norm"] = 0.0
        rows.append(row)
    return rows


def cmd_sweep(args):
    dist = _load_distribution(args)
    params = anisotropy.MotilityParams(args.s, args.mu)
    values = _parse_grid(args)
    outputs = [o.strip() for o in args.outputs.split(",") if o.strip()]
    for output in outputs:
        if output not in SWEEP_OUTPUTS:
            raise ValueError(f"unknown output {output!r}; choose from {SWEEP_OUTPUTS}")
    if args.parameter == "k":
        if dist.kind not in ("vmf", "bimodal_vmf"):
            raise ValueError("k sweeps require a vmf or bimodal_vmf distribution")
        if any(v < 0 for v in values):
            raise ValueError("k grid values must be >= 0")
    else:
        if dist.kind != "peanut":
            raise ValueError("eigen_ratio sweeps require a peanut distribution")
        if any(v <= 0 for v in values):
            raise ValueError("eigen_ratio grid values must be > 0")
    rows = _sweep_rows(args, dist, params, values, outputs)
    if args.format == "json":
        text = dumps({"schema": "1", "rows": rows}) + "\n"
    else:
        header = list(rows[0].keys())
        lines = [",".join(header)]
        lines += [",".join(_csv_cell(row[name]) for name in header) for row in rows]
        text = "\n".join(lines) + "\n"
    _write_output(text, args.out)
    return EXIT_OK


def cmd_validate(args):
    summary = validation.run_validation(args.level, args.seed)
    sys.stdout.write(dumps(summary) + "\n")
    return EXIT_OK if summary["passed"] else EXIT_SUITE_FAILURE


def _median(values):
    values = sorted(values)
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return 0.5 * (values[mid - 1] + values[mid])


def _time_per_call(fn, repeats, min_time=0.02):
    # calibrate an inner loop so each sample lasts at least min_time
    fn()
    calls = 1
    while True:
        start = time.perf_counter()
        for _ in range(calls):
            fn()
        elapsed = time.perf_counter() - start
        if elapsed >= min_time:
            break
        calls = max(calls * 2, int(calls * min_time / max(elapsed, 1e-9)))
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(calls):
            fn()
        samples.append((time.perf_counter() - start) / calls)
    return _median(samples)


def cmd_bench(args):
    values = [float(v) for v in args.k_grid.split(",") if v.strip()]
    if not values:
        raise ValueError("--k-grid must be nonempty")
    n = args.n
    u = np.zeros(n)
    u[0] = 1.0
    backends = (
        _backend.available_backends()
        if args.compare_backends
        else (_backend.get_backend(),)
    )
    oracle_method = f"quad_{args.resolution}" if n <= 3 else f"mc_{args.samples}"
    rows = []
    previous = _backend.get_backend()
    try:
        for backend in backends:
            _backend.use_backend(backend)
            for k in values:
                closed_s = _time_per_call(
                    lambda: moments.vmf_covariance(k, u), args.repeats
                )
                dist = distributions.vmf(u, k)
                if n <= 3:
                    spec = oracle.QuadratureSpec.for_dimension(n, args.resolution)

                    def run_oracle():
                        oracle.quad_moments(dist, spec, check=False)

                else:
                    mc_spec = oracle.McSpec(n, args.samples, args.seed)

                    def run_oracle():
                        oracle.mc_moments(dist, mc_spec)

                oracle_s = _time_per_call(run_oracle, args.repeats, min_time=0.05)
                rows.append(
                    {
                        "backend": backend,
                        "n": n,
                        "k": k,
                        "oracle_method": oracle_method,
                        "closed_form_us": closed_s * 1e6,
                        "oracle_us": oracle_s * 1e6,
                        "speedup": oracle_s / closed_s,
                    }
                )
    finally:
        _backend.use_backend(previous)
    header = list(rows[0].keys())
    lines = [",".join(header)]
    lines += [",".join(_csv_cell(row[name]) for name in header) for row in rows]
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sphermoments",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "moments",
        help="closed-form moments, optionally compared against the oracle",
        description=(
            "Emit the closed-form MomentReport as JSON (null for odf/bingham, "
            "which have none); with --oracle also emit the oracle report and "
            "the elementwise max deviation."
        ),
    )
    _add_dist_arguments(p)
    p.add_argument("--oracle", choices=("none", "quad", "mc"), default="none")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="Monte Carlo sample count (default 10^6)")
    p.add_argument("--resolution", type=int, default=256,
                   help="quadrature points per dimension (default 256)")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser(
        "anisotropy",
        help="diffusion-tensor eigenvalues, FA and eigenvalue ratio",
        description=(
            "Emit an AnisotropyReport as JSON: eigenvalues (descending), fa "
            "(null outside n in {2,3}), ratio ('inf' if unbounded), the "
            "applicable upper bounds and their satisfied flags.  Exits 1 if "
            "a bound is violated (a library bug, not an input error)."
        ),
    )
    _add_dist_arguments(p)
    p.add_argument("--s", type=float, default=1.0, help="speed (default 1)")
    p.add_argument("--mu", type=float, default=1.0, help="turning rate (default 1)")
    p.set_defaults(func=cmd_anisotropy)

    p = sub.add_parser(
        "sweep",
        help="anisotropy outputs over a parameter grid (CSV or JSON)",
        description=(
            "Sweep k (vmf/bimodal_vmf) or the leading diagonal entry of "
            "A=diag(t,1,...,1) (peanut, parameter 'eigen_ratio').  CSV "
            "columns: parameter,value,<outputs> with eigenvalues expanded to "
            "eigenvalue_1..eigenvalue_n; rows follow the grid order."
        ),
    )
    _add_dist_arguments(p)
    p.add_argument("--parameter", choices=("k", "eigen_ratio"), required=True)
    p.add_argument("--grid", help="comma-separated strictly increasing values")
    p.add_argument("--grid-log", nargs=3, type=float, metavar=("MIN", "MAX", "COUNT"),
                   help="log-spaced grid")
    p.add_argument("--outputs", default="fa,ratio",
                   help=f"comma list from {','.join(SWEEP_OUTPUTS)}")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "validate",
        help="run the self-check suites; exit 0 iff all pass",
        description=(
            "Suites: normalization, oracle_equivalence, bessel_identities, "
            "anisotropy_bounds.  'smoke' finishes in seconds; 'full' runs "
            "the acceptance-grade grids."
        ),
    )
    p.add_argument("--level", choices=("smoke", "full"), default="smoke")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "bench",
        help="time closed-form covariance vs the oracle (CSV)",
        description=(
            "CSV columns: backend,n,k,oracle_method,closed_form_us,oracle_us,"
            "speedup.  Per-call times are medians over --repeats samples; "
            "--compare-backends adds rows for every kernel backend."
        ),
    )
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k-grid", default="0.5,2,10,50")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--samples", type=int, default=100_000,
                   help="oracle sample count when n > 3")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--compare-backends", action="store_true")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        sys.stdout.write(dumps({"error": str(exc)}) + "\n")
        return EXIT_IO_ERROR
    except (ValueError, ConvergenceError) as exc:
        # ValueError covers the library's validation/domain errors and
        # malformed JSON input
        sys.stdout.write(dumps({"error": str(exc)}) + "\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
