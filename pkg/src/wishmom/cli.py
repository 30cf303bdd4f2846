"""Command-line interface.

Subcommands: wg (Weingarten tables), moment (exact Wishart moments), haar
(Haar-orthogonal moments), validate (golden / identities / montecarlo
suites) and table (build/list/show persistent Weingarten tables).

Exit codes: 0 success, 2 usage error, 3 math-domain error (pole, non-PD,
bad shape parameter), 4 validation failure.  Matrix indices on the command
line are 1-based.  WW_CACHE_DIR overrides the default table cache location.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, validate
from .matchgroup import SizeLimitError
from .weingarten import (
    PoleError,
    build_table,
    load_table,
    save_table,
    table_path,
    table_to_json,
    weingarten,
    weingarten_truncated,
    inv_wishart_weingarten,
)
from .symcomb import check_partition, partitions_of
from .wishart import (
    DomainError,
    MomentSpec,
    WishartParams,
    gamma_regime,
    haar_moment,
    invariant_moment,
    inverse_moment,
    moment,
    power_trace_moment,
    trace_power_moment,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VALIDATION = 4


@dataclass
class RunConfig:
    """Everything needed to reproduce a run; embedded in every JSON report."""

    command: str
    options: dict
    version: str = __version__


def default_cache_dir() -> str:
    return os.environ.get("WW_CACHE_DIR", os.path.join(os.path.expanduser("~"), ".cache", "wishmom"))


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated index list: {text!r}") from exc


def parse_partition(text: str) -> tuple[int, ...]:
    try:
        return check_partition(int(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a partition: {text!r}") from exc


def read_sigma(path: str) -> np.ndarray:
    """Load a symmetric matrix from CSV (d rows of d decimals) or a JSON 2D array."""
    p = Path(path)
    if not p.exists():
        raise ValueError(f"sigma file not found: {path}")
    text = p.read_text().strip()
    try:
        if p.suffix.lower() == ".json" or text.startswith("["):
            rows = json.loads(text)
        else:
            rows = [[float(cell) for cell in line.split(",")] for line in text.splitlines() if line.strip()]
        sig = np.asarray(rows, dtype=float)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ValueError(f"malformed sigma file {path}: {exc}") from exc
    if sig.ndim != 2 or sig.shape[0] != sig.shape[1]:
        raise ValueError(f"sigma must be a square matrix, got shape {sig.shape}")
    scale = max(np.abs(sig).max(), 1.0)
    if np.abs(sig - sig.T).max() > 1e-12 * scale:
        raise ValueError("sigma is not symmetric within 1e-12")
    return (sig + sig.T) / 2


def fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def frac_json(f: Fraction) -> dict:
    return {"num": str(f.numerator), "den": str(f.denominator)}


def emit(args, config: RunConfig, rows: list[dict], text_lines: list[str]) -> None:
    """Write the report in the selected format to --out or stdout.

    Fraction values become {"num","den"} objects in JSON and "p/q" in CSV.
    """
    fmt = getattr(args, "format", "text")
    if fmt == "json":
        safe = [{k: (frac_json(v) if isinstance(v, Fraction) else v) for k, v in r.items()} for r in rows]
        payload = {"config": asdict(config), "results": safe}
        body = json.dumps(payload, indent=2, default=str) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for r in rows:
                writer.writerow({k: (fmt_fraction(v) if isinstance(v, Fraction) else v) for k, v in r.items()})
        body = buf.getvalue()
    else:
        body = "\n".join(text_lines) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(body)
    else:
        sys.stdout.write(body)


# ---------------------------------------------------------------- commands


def cmd_wg(args) -> int:
    n = args.n
    if args.tilde:
        if args.gamma is None:
            raise ValueError("--tilde needs --gamma")
        values = {rho: inv_wishart_weingarten(rho, args.gamma) for rho in partitions_of(n)}
        point = ("gamma", args.gamma)
    elif args.truncate is not None:
        values = {rho: weingarten_truncated(rho, args.truncate) for rho in partitions_of(n)}
        point = ("z", Fraction(args.truncate))
    else:
        if args.z is None:
            raise ValueError("need one of --z, --gamma --tilde, or --truncate")
        values = {rho: weingarten(rho, args.z) for rho in partitions_of(n)}
        point = ("z", args.z)
    config = RunConfig("wg", {"n": n, point[0]: str(point[1]), "tilde": args.tilde, "truncate": args.truncate})
    rows = [{"rho": list(rho), "value": v} for rho, v in values.items()]
    lines = [f"{rho}: {fmt_fraction(v)}" for rho, v in values.items()]
    emit(args, config, rows, lines)
    return EXIT_OK


def _moment_kind(args) -> str:
    picks = [name for name in ("entries", "trace_power", "power_trace", "invariant") if getattr(args, name) is not None]
    if len(picks) != 1:
        raise ValueError("pick exactly one of --entries, --trace-power, --power-trace, --invariant")
    return picks[0]


def cmd_moment(args) -> int:
    sigma = read_sigma(args.sigma)
    d = args.d if args.d is not None else sigma.shape[0]
    params = WishartParams(d=d, beta=args.beta, sigma=sigma)
    kind = _moment_kind(args)
    inverse = args.inverse
    if kind == "entries":
        spec = MomentSpec(args.entries, inverse=inverse)
        value = inverse_moment(params, spec) if inverse else moment(params, spec)
        formula = "entrywise-matching-sum"
        degree = spec.degree
    elif kind == "trace_power":
        value = trace_power_moment(params, args.trace_power, inverse=inverse)
        formula = "trace-power-sum"
        degree = args.trace_power
    elif kind == "power_trace":
        value = power_trace_moment(params, args.power_trace, inverse=inverse)
        formula = "power-trace-sum"
        degree = sum(args.power_trace)
    else:
        value = invariant_moment(params, args.invariant, inverse=inverse)
        formula = "invariant-zonal"
        degree = sum(args.invariant)
    value = float(value)
    regime = gamma_regime(params.gamma, degree) if inverse else None
    config = RunConfig(
        "moment",
        {
            "sigma": args.sigma,
            "d": d,
            "beta": str(params.beta),
            "kind": kind,
            "inverse": inverse,
            "entries": list(args.entries) if args.entries else None,
            "trace_power": args.trace_power,
            "power_trace": list(args.power_trace) if args.power_trace else None,
            "invariant": list(args.invariant) if args.invariant else None,
        },
    )
    row = {"value": value, "formula": formula, "gamma": str(params.gamma), "gamma_regime": regime}
    lines = [f"value: {value:.17g}", f"formula: {formula}", f"gamma: {fmt_fraction(params.gamma)}"]
    if regime:
        lines.append(f"gamma regime: {regime}")
    emit(args, config, [row], lines)
    return EXIT_OK


def cmd_haar(args) -> int:
    value = haar_moment(args.i, args.j, args.N)
    config = RunConfig("haar", {"i": list(args.i), "j": list(args.j), "N": args.N})
    rows = [{"value": value}]
    emit(args, config, rows, [f"value: {fmt_fraction(value)}"])
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.suite == "golden":
        results = validate.golden_suite(seed=args.seed)
    elif args.suite == "identities":
        results = validate.identities_suite(n_max=args.n, seed=args.seed)
    else:
        results = validate.montecarlo_suite(samples=args.samples, seed=args.seed, threads=args.threads)
    config = RunConfig(
        "validate",
        {"suite": args.suite, "n": args.n, "samples": args.samples, "seed": args.seed, "threads": args.threads},
    )
    rows = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}" + (f"  [{r.detail}]" if r.detail else "") for r in results]
    failures = sum(1 for r in results if not r.passed)
    lines.append(f"{len(results) - failures}/{len(results)} checks passed")
    emit(args, config, rows, lines)
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


def cmd_table(args) -> int:
    cache = args.cache_dir or default_cache_dir()
    if args.action in ("build", "show") and (args.n is None or args.z is None):
        raise ValueError(f"table {args.action} needs --n and --z")
    if args.action == "build":
        table = build_table(args.n, args.z)
        path = table_path(cache, args.n, args.z)
        if path.exists() and path.read_text() == table_to_json(table):
            sys.stdout.write(f"cache hit: {path}\n")
        else:
            save_table(table, cache)
            sys.stdout.write(f"built: {path}\n")
        return EXIT_OK
    if args.action == "list":
        root = Path(cache) / "tables" / "wg_o"
        found = sorted(root.rglob("*.json")) if root.exists() else []
        for p in found:
            sys.stdout.write(f"{p}\n")
        if not found:
            sys.stdout.write("(no cached tables)\n")
        return EXIT_OK
    # show
    table = load_table(cache, args.n, args.z)
    cached = table is not None
    if table is None:
        table = build_table(args.n, args.z)
    config = RunConfig("table-show", {"n": args.n, "z": str(Fraction(args.z)), "cache_dir": str(cache), "cached": cached})
    rows = [{"rho": list(rho), "value": v} for rho, v in table.entries.items()]
    lines = [f"{rho}: {fmt_fraction(v)}" for rho, v in table.entries.items()]
    emit(args, config, rows, lines)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wishmom",
        description="Exact Wishart/inverse-Wishart moments, Weingarten tables, and Monte Carlo validation.",
    )
    parser.add_argument("--version", action="version", version=f"wishmom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--out", help="write the report to this file instead of stdout")

    p = sub.add_parser("wg", help="print a Weingarten table for one degree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", type=parse_fraction, help="evaluation point for the plain table")
    p.add_argument("--gamma", type=parse_fraction, help="shape parameter for the --tilde table")
    p.add_argument("--tilde", action="store_true", help="inverse-Wishart variant at --gamma")
    p.add_argument("--truncate", type=int, help="row-truncated table at z=N")
    common(p)
    p.set_defaults(func=cmd_wg)

    p = sub.add_parser("moment", help="exact Wishart or inverse-Wishart moment")
    p.add_argument("--sigma", required=True, help="scale matrix file (CSV rows or JSON 2D array)")
    p.add_argument("--beta", type=parse_fraction, required=True)
    p.add_argument("--d", type=int, help="dimension (defaults to the sigma size)")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--entries", type=parse_indices, help="1-based index list k1,k2,...,k2n")
    p.add_argument("--trace-power", dest="trace_power", type=int, help="E[(tr W)^n]")
    p.add_argument("--power-trace", dest="power_trace", type=parse_partition, help="E[prod tr(W^mu_i)] for partition mu")
    p.add_argument("--invariant", type=parse_partition, help="zonal invariant moment for partition lambda")
    common(p)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("haar", help="exact Haar-orthogonal moment E[prod O[i_k, j_k]]")
    p.add_argument("--i", type=parse_indices, required=True)
    p.add_argument("--j", type=parse_indices, required=True)
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_haar)

    p = sub.add_parser("validate", help="run a validation suite")
    p.add_argument("suite", choices=("golden", "identities", "montecarlo"))
    p.add_argument("--n", type=int, default=4, help="max degree for the identities suite")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("table", help="build, list or show cached Weingarten tables")
    p.add_argument("action", choices=("build", "list", "show"))
    p.add_argument("--n", type=int)
    p.add_argument("--z", type=parse_fraction)
    p.add_argument("--cache-dir", dest="cache_dir")
    common(p)
    p.set_defaults(func=cmd_table)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PoleError, DomainError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except (SizeLimitError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
