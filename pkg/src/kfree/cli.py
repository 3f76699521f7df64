"""Command-line front end.

    kfree constants --k 2
    kfree intensity --k 2 --eps 0.001 --method direct
    kfree scan --k 2 --eps 1e-4:1e-2:9 --log
    kfree verify --level quick
    kfree walfisz --x 1e3:1e8:26 --log

Exit codes: 0 success, 1 a checked identity failed, 2 usage error,
3 resource or cutoff failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _config
from .asymptotics import (
    _check_fit_grid,
    expected_power_law,
    fit_power_law,
    log_grid,
    walfisz_residuals,
)
from .diffraction import z_direct, ztilde_definition, ztilde_via_zk
from .exceptions import CutoffError, DecayHypothesisError, KfreeError, SieveLimitError
from .special import constants_for_k
from .verification import LEVELS, run_verification

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

_METHODS = {
    "direct": "direct-bmp",
    "direct-bmp": "direct-bmp",
    "definition": "ztilde-definition",
    "ztilde-definition": "ztilde-definition",
    "via-zk": "ztilde-via-zk",
    "ztilde-via-zk": "ztilde-via-zk",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types


def _k_type(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if k < 2:
        raise argparse.ArgumentTypeError("k must be ≥ 2")
    return k


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}")
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _positive_int(text: str) -> int:
    try:
        n = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def parse_grid(spec: str, log: bool) -> list[float]:
    """``start:stop:points`` (or a single value) into a list of floats."""
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must be VALUE or START:STOP:POINTS, got {spec!r}")
    if points < 1:
        raise UsageError("grid needs at least one point")
    if log:
        if start <= 0 or stop <= 0:
            raise UsageError("log grid needs positive bounds")
        grid = log_grid(start, stop, points)
    else:
        grid = np.linspace(start, stop, points)
    return [float(x) for x in grid]


# ---------------------------------------------------------------------------
# output


def _g(x) -> str:
    return "%.17g" % float(x)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(header)] + [[c if isinstance(c, str) else _g(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence], footer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(c if isinstance(c, str) else _g(c) for c in r) + "\n")
    for line in footer:
        buf.write("# " + line + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (text, exit code)


def cmd_constants(args) -> tuple[str, int]:
    const = constants_for_k(args.k, args.tail)
    fmt = args.format or "json"
    if fmt == "json":
        return _json(const.to_dict()), EXIT_OK
    rows = [
        (name, _g(getattr(const, name).value), _g(getattr(const, name).tail))
        for name in ("xi_k", "gamma_k", "c_k")
    ]
    if fmt == "csv":
        return _csv(["name", "value", "tail"], rows), EXIT_OK
    return f"k = {const.k}\n" + _table(["name", "value", "tail"], rows), EXIT_OK


def cmd_intensity(args) -> tuple[str, int]:
    method = _METHODS[args.method]
    if method == "direct-bmp":
        if args.eps is None:
            raise UsageError("--method direct needs --eps")
        res = z_direct(args.k, args.eps, args.rad_max, target_tail=args.tail)
    else:
        if args.N is None:
            if args.eps is None:
                raise UsageError("need --N (or --eps, read as N = floor(1/eps))")
            args.N = math.floor(1 / Fraction(args.eps))
        if method == "ztilde-definition":
            res = ztilde_definition(args.k, args.N, args.rad_max, target_tail=args.tail)
        else:
            res = ztilde_via_zk(args.k, args.N, args.b_max, args.t_max, target_tail=args.tail)
    fmt = args.format or "json"
    d = res.to_dict()
    if fmt == "json":
        return _json(d), EXIT_OK
    where = d["epsilon"] if "epsilon" in d else f"N={d['N']}"
    row = [(where, _g(d["value"]), _g(d["tail"]), d["method"])]
    if fmt == "csv":
        return _csv(["epsilon" if "epsilon" in d else "N", "Z", "tail", "method"], row), EXIT_OK
    return _table(["at", "Z", "tail", "method"], row), EXIT_OK


def cmd_scan(args) -> tuple[str, int]:
    grid = parse_grid(args.eps, args.log)
    for e in grid:
        if not 0 < e < 1:
            raise UsageError(f"epsilon {e!r} outside (0, 1)")
    results = [z_direct(args.k, e, target_tail=args.tail) for e in grid]
    rows = [(e, r.value.value, r.value.tail, r.method) for e, r in zip(grid, results)]
    fit = None
    try:
        _check_fit_grid(np.asarray(grid))
        fit = fit_power_law(grid, [r[1] for r in rows], [r[2] for r in rows], args.k, "direct-bmp")
    except KfreeError as exc:
        skipped = str(exc)
    ex, amp = expected_power_law(args.k)
    fmt = args.format or "csv"
    if fmt == "json":
        out = {
            "k": args.k,
            "rows": [r.to_dict() for r in results],
            "fit": None if fit is None else fit.to_dict(),
            "expected": {"exponent": ex, "amplitude": float(amp.value)},
        }
        return _json(out), EXIT_OK
    if fit is None:
        footer = [f"fit skipped: {skipped}"]
    else:
        footer = [
            f"fit exponent={_g(fit.exponent)} amplitude={_g(fit.amplitude)} points={len(grid)}",
            f"expected exponent={_g(ex)} amplitude={_g(amp.value)}",
        ]
    header = ["epsilon", "Z", "tail", "method"]
    if fmt == "csv":
        return _csv(header, rows, footer), EXIT_OK
    return _table(header, rows) + "".join(line + "\n" for line in footer), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    results = run_verification(args.level, seed=args.seed)
    failed = [r for r in results if not r.passed]
    fmt = args.format or "table"
    if fmt == "json":
        text = _json({"level": args.level, "checks": [r.to_dict(timing=False) for r in results]})
    else:
        rows = [(r.name, "PASS" if r.passed else "FAIL", str(r.cases)) for r in results]
        text = (_csv if fmt == "csv" else _table)(["check", "result", "cases"], rows)
    if failed:
        first = failed[0]
        detail = first.failures[0] if first.failures else ""
        print(f"identity failed: {first.name}: {detail}", file=sys.stderr)
        return text, EXIT_FAILED
    return text, EXIT_OK


def cmd_walfisz(args) -> tuple[str, int]:
    grid = parse_grid(args.x, args.log)
    series = walfisz_residuals(grid, a=args.a)
    fmt = args.format or "csv"
    if fmt == "json":
        return _json(series.to_dict()), EXIT_OK
    header = ["x", "exact", "main", "residual", "normalized"]
    rows = list(zip(series.x, series.exact, series.main, series.residual, series.normalized))
    footer = [f"max_abs_normalized={_g(series.max_abs_normalized())}"]
    if fmt == "csv":
        return _csv(header, rows, footer), EXIT_OK
    return _table(header, rows) + footer[0] + "\n", EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument(
        "--sieve-limit",
        type=_positive_int,
        default=default,
        help=f"largest sieve/table size (default {_config.DEFAULT_SIEVE_LIMIT:.0e}, env {_config.SIEVE_LIMIT_ENV})",
    )
    parser.add_argument(
        "--threads",
        type=_positive_int,
        default=argparse.SUPPRESS if suppress else 1,
        help="worker cap (evaluation is currently serial)",
    )
    parser.add_argument("--format", choices=("csv", "json", "table"), default=default)
    parser.add_argument("--output", "-o", default=default, help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfree",
        description="Diffraction of the k-free integers near the origin.",
    )
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="xi_k, gamma_k and c_k with tails")
    p.add_argument("--k", type=_k_type, required=True)
    p.add_argument("--tail", type=_positive_float, default=1e-30)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("intensity", parents=[common], help="one evaluation of Z_k(eps) or Z~_k(N)")
    p.add_argument("--k", type=_k_type, required=True)
    p.add_argument("--eps", type=str)
    p.add_argument("--N", type=_positive_int)
    p.add_argument("--method", choices=sorted(_METHODS), default="direct")
    p.add_argument("--tail", type=_positive_float, default=1e-12)
    p.add_argument("--rad-max", type=_positive_int)
    p.add_argument("--b-max", type=_positive_int)
    p.add_argument("--t-max", type=_positive_int)
    p.set_defaults(func=cmd_intensity)

    p = sub.add_parser("scan", parents=[common], help="Z_k over an epsilon grid plus a power-law fit")
    p.add_argument("--k", type=_k_type, required=True)
    p.add_argument("--eps", required=True, help="START:STOP:POINTS")
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.add_argument("--tail", type=_positive_float, default=1e-12)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="identity suites")
    p.add_argument("--level", choices=LEVELS, default="quick")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("walfisz", parents=[common], help="squarefree-count residuals")
    p.add_argument("--x", required=True, help="START:STOP:POINTS")
    p.add_argument("--log", action="store_true")
    p.add_argument("--a", type=_positive_int, default=1)
    p.set_defaults(func=cmd_walfisz)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    previous = _config._sieve_limit_override
    if args.sieve_limit is not None:
        _config.set_sieve_limit(args.sieve_limit)
    try:
        text, code = args.func(args)
    except UsageError as exc:
        print(f"kfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CutoffError, SieveLimitError, DecayHypothesisError, MemoryError) as exc:
        print(f"kfree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (KfreeError, ValueError) as exc:
        print(f"kfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        _config.set_sieve_limit(previous)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
