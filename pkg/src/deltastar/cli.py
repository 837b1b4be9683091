"""Command-line interface: ``deltastar <command> [options]``.

Exit codes: 0 ok, 1 verify failure, 2 config error, 3 argument error,
4 domain error (for example a non-resonant intensity where one is required).
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .determinants import PINNED, Convention
from .errors import ConfigError, DeltaStarError, InvalidRange, NotResonant
from .graph import BUILTIN_PROFILES, builtin_profile, parse_profile
from .resonance import DEFAULT_STEP, DEFAULT_WINDOW, find_resonances, nearest_resonance
from .scattering import (
    convergence_table,
    eps_smatrix,
    limit_smatrix,
    loglog_slope,
    transmission_sweep,
)
from .verify import run_verify

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_ARGS, EXIT_DOMAIN = range(5)

log = logging.getLogger("deltastar")


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(f"{self.prog}: {message}")


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.15g" % x
    return str(x)


def render_csv(table: Table) -> str:
    out = io.StringIO()
    for c in table.comments:
        out.write(f"# {c}\n")
    out.write(",".join(table.columns) + "\n")
    for row in table.rows:
        out.write(",".join(_fmt(x) for x in row) + "\n")
    for c in table.footer:
        out.write(f"# {c}\n")
    return out.getvalue()


def _json_value(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def render_json(table: Table) -> str:
    doc = {
        "comments": table.comments,
        "columns": table.columns,
        "rows": [[_json_value(x) for x in row] for row in table.rows],
    }
    if table.footer:
        doc["footer"] = table.footer
    return json.dumps(doc, indent=2) + "\n"


def _range(text: str, parts: int) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(":"))
    except ValueError:
        raise ArgumentError(f"cannot parse {text!r} as numbers separated by ':'") from None
    if len(values) != parts or not all(math.isfinite(v) for v in values):
        raise ArgumentError(f"expected {parts} finite numbers separated by ':', got {text!r}")
    return values


def load_profile(source: str):
    if source in BUILTIN_PROFILES:
        return builtin_profile(source)
    path = Path(source)
    if not path.is_file():
        raise ConfigError(
            f"profile {source!r} is neither a file nor a builtin ({', '.join(BUILTIN_PROFILES)})"
        )
    return parse_profile(path.read_text())


def _header(args, extra=()) -> list[str]:
    return [f"deltastar {__version__} {args.command}", f"profile = {args.profile}", *extra]


def cmd_resonances(args, profile) -> Table:
    lo, hi = _range(args.range, 2)
    points = find_resonances(profile, lo, hi, args.step)
    if args.command == "coupling":
        cols = ["alpha", "multiplicity", "theta1", "theta2", "theta3"]
    else:
        cols = ["alpha", "multiplicity", "theta1", "theta2", "theta3", "h1_residual"]
    table = Table(cols, comments=_header(args, [f"range = {lo:.15g}:{hi:.15g}", f"step = {args.step:.15g}"]))
    for p in points:
        row = [p.alpha, p.multiplicity, *p.theta.theta]
        if args.command != "coupling":
            row.append(p.h1_residual)
        table.rows.append(row)
    return table


def cmd_smatrix(args, profile) -> Table:
    if args.limit:
        point = nearest_resonance(profile, args.alpha)
        s = limit_smatrix(point.theta, point.multiplicity)
        table = Table(
            ["row", "T1", "T2", "T3"],
            comments=_header(args, [
                f"alpha requested = {args.alpha:.15g}",
                f"alpha refined = {point.alpha:.15g}",
                f"multiplicity = {point.multiplicity}",
                "kind = limit",
            ]),
        )
        for n in range(3):
            table.rows.append([n + 1, *np.real(s.entries[n])])
        return table
    if not args.kappa > 0:
        raise ArgumentError(f"--kappa must be > 0, got {args.kappa}")
    s = eps_smatrix(profile, args.alpha, args.kappa)
    table = Table(
        ["row", "re_T1", "im_T1", "re_T2", "im_T2", "re_T3", "im_T3"],
        comments=_header(args, [f"alpha = {args.alpha:.15g}", f"kappa = {args.kappa:.15g}",
                                "kind = epsilon"]),
    )
    for n in range(3):
        row = [n + 1]
        for z in s.entries[n]:
            row += [z.real, z.imag]
        table.rows.append(row)
    return table


def sweep_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Half-open grid lo, lo+step, ... < hi, computed without accumulation."""
    if not step > 0:
        raise ArgumentError(f"sweep step must be > 0, got {step}")
    if hi < lo:
        raise ArgumentError(f"sweep range must have lo <= hi, got {lo}:{hi}")
    n = math.ceil((hi - lo) / step - 1e-9)
    return lo + step * np.arange(max(n, 0))


def cmd_sweep(args, profile) -> Table:
    lo, hi, step = _range(args.alphas, 3)
    n, m = (int(v) for v in _range(args.pair, 2))
    if n not in (1, 2, 3) or m not in (1, 2, 3):
        raise ArgumentError(f"--pair edges must be in 1..3, got {args.pair}")
    if not args.kappa > 0:
        raise ArgumentError(f"--kappa must be > 0, got {args.kappa}")
    grid = sweep_grid(lo, hi, step)
    rows = transmission_sweep(profile, grid, args.kappa, n, m, threads=args.threads)
    table = Table(
        ["alpha", "prob", "log10_prob", "arg", "status"],
        comments=_header(args, [f"alphas = {lo:.15g}:{hi:.15g}:{step:.15g}",
                                f"kappa = {args.kappa:.15g}", f"pair = {n}:{m}"]),
    )
    for r in rows:
        table.rows.append([r.alpha, r.probability, r.log10_probability, r.phase, r.status])
    return table


def cmd_converge(args, profile) -> Table:
    try:
        eps = [float(e) for e in args.eps_list.split(",")]
    except ValueError:
        raise ArgumentError(f"cannot parse --eps-list {args.eps_list!r}") from None
    if not eps or not all(e > 0 and math.isfinite(e) for e in eps):
        raise ArgumentError(f"--eps-list entries must be > 0, got {args.eps_list!r}")
    if not args.k > 0:
        raise ArgumentError(f"--k must be > 0, got {args.k}")
    alpha = args.alpha
    try:
        alpha = nearest_resonance(profile, args.alpha).alpha
    except NotResonant:
        pass
    rows = convergence_table(profile, alpha, args.k, eps)
    table = Table(
        ["epsilon", "deviation"],
        comments=_header(args, [f"alpha requested = {args.alpha:.15g}",
                                f"alpha used = {alpha:.15g}", f"k = {args.k:.15g}"]),
    )
    table.rows = [list(r) for r in rows]
    finite = [(e, d) for e, d in rows if d > 0]
    slope = loglog_slope(*zip(*finite)) if len(finite) >= 2 else math.nan
    table.footer.append(f"slope = {slope:.15g}")
    return table


def cmd_verify(args, profile) -> tuple[Table, bool]:
    checks = run_verify(profile, seed=args.seed, convention=Convention(args.der_sign))
    table = Table(["check", "status", "measured", "tolerance", "detail"],
                  comments=_header(args, [f"seed = {args.seed}"]))
    for c in checks:
        table.rows.append([c.name, "pass" if c.passed else "fail", c.measured, c.tolerance, c.detail])
        log.info(c.line())
    ok = all(c.passed for c in checks)
    table.footer.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return table, ok


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--profile", default="paper-rect",
                        help=f"JSON profile file or builtin name ({', '.join(BUILTIN_PROFILES)})")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write output here instead of stdout (adds a .manifest.json)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")

    parser = _Parser(prog="deltastar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"deltastar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    window = f"{DEFAULT_WINDOW[0]:g}:{DEFAULT_WINDOW[1]:g}"
    for name, help_text in (("resonances", "list resonant intensities"),
                            ("coupling", "resonant intensities with coupling directions only")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--range", default=window, help="lo:hi (default %(default)s)")
        p.add_argument("--step", type=float, default=DEFAULT_STEP)

    p = sub.add_parser("smatrix", parents=[common], help="scattering matrix at one intensity")
    p.add_argument("--alpha", type=float, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--limit", action="store_true", help="zero-range limit at the nearest resonance")
    mode.add_argument("--kappa", type=float, help="regularized matrix at this kappa = eps*k")

    p = sub.add_parser("sweep", parents=[common], help="|T_nm|^2 over a grid of intensities")
    p.add_argument("--alphas", required=True, help="lo:hi:step, half-open [lo, hi)")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--pair", default="3:1", help="incoming:outgoing edge (default %(default)s)")

    p = sub.add_parser("converge", parents=[common], help="distance of S_eps to its limit")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--eps-list", default="1e-2,1e-3,1e-4,1e-5")

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--der-sign", type=int, choices=(1, -1), default=int(PINNED),
                   help="tip slope sign convention (diagnostic; -1 is the wrong one)")
    return parser


COMMANDS = {
    "resonances": cmd_resonances,
    "coupling": cmd_resonances,
    "smatrix": cmd_smatrix,
    "sweep": cmd_sweep,
    "converge": cmd_converge,
}


def _write(args, text: str, wall: float) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.write_text(text)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "quiet", "threads")}
    manifest = {
        "command": args.command,
        "profile": args.profile,
        "parameters": params,
        "version": __version__,
        "wall_time_s": round(wall, 6),
    }
    out.with_name(out.name + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def main(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except ArgumentError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ARGS

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    if args.quiet:
        warnings.simplefilter("ignore")
    try:
        if args.threads < 1:
            raise ArgumentError(f"--threads must be >= 1, got {args.threads}")
        profile = load_profile(args.profile)
        status = EXIT_OK
        if args.command == "verify":
            table, ok = cmd_verify(args, profile)
            status = EXIT_OK if ok else EXIT_VERIFY
        else:
            table = COMMANDS[args.command](args, profile)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArgumentError, InvalidRange) as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except DeltaStarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    text = render_json(table) if args.format == "json" else render_csv(table)
    _write(args, text, time.perf_counter() - start)
    if status == EXIT_VERIFY:
        print("verify: invariant failures, see report", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
