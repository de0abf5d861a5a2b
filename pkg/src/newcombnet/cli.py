"""Command line front end.

Exit codes: 0 success / consistent, 1 inconsistent verdict, 2 bad input
document, 3 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .consistency import (
    ExtendedGame,
    check_profile,
    feasible_g_independent,
    feasible_g_independent_oracle,
)
from .errors import NewcombNetError
from .netgame import net_from_json
from .newcomb import (
    CHOICES,
    GameKind,
    Scenario,
    canonical_scenario,
    fearful_net,
    fearful_profile,
    realist_net,
    realist_profile,
    simulate,
    solve_combined_constrained,
    solve_fearful,
    solve_realist,
    solve_variant_choose_game,
    time_reverse,
)
from .prob import Cpd, Dist, alpha_accurate_cpd, fmt_rational, make_dist, parse_rational, uniform

OUTPUT_DIR_ENV = "NEWCOMBNET_OUTPUT_DIR"
DEFAULT_TOL = 1e-9

EXIT_OK, EXIT_INCONSISTENT, EXIT_INPUT, EXIT_USAGE = 0, 1, 2, 3

_RATIONAL_STR = re.compile(r"^-?\d+/\d+$")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: str
    fmt: str
    mode: str
    tol: float | None
    output: str | None
    reversed: bool = False

    def __post_init__(self):
        if self.mode == "exact" and self.tol is not None:
            raise UsageError("--tol only applies in float mode")
        if self.mode == "float" and self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")

    @property
    def tolerance(self) -> float:
        return DEFAULT_TOL if self.tol is None else self.tol


def _rational(text: str, cfg: RunConfig) -> Fraction:
    try:
        return parse_rational(text, allow_decimal=cfg.mode == "float")
    except NewcombNetError as exc:
        raise UsageError(str(exc)) from None


def _dist(text: str, cfg: RunConfig, space=CHOICES) -> Dist:
    parts = [p for p in text.split(",")]
    try:
        return make_dist(space, [_rational(p, cfg) for p in parts])
    except NewcombNetError as exc:
        raise UsageError(f"bad distribution {text!r}: {exc}") from None


def _cpd(text: str, cfg: RunConfig) -> Cpd:
    rows = text.split(";")
    if len(rows) != len(CHOICES):
        raise UsageError(f"CPD needs {len(CHOICES)} rows separated by ';'")
    return Cpd(CHOICES, CHOICES, tuple(_dist(r, cfg) for r in rows))


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_scenario(cfg: RunConfig) -> Scenario:
    if cfg.scenario == "canonical":
        scenario = canonical_scenario()
    else:
        try:
            scenario = Scenario.from_json(_load_json(cfg.scenario))
        except NewcombNetError as exc:
            raise InputError(f"malformed scenario: {exc}") from None
    return time_reverse(scenario) if cfg.reversed else scenario


def _floatify(doc):
    """Float view of a report: every "num/den" string becomes a float."""
    if isinstance(doc, dict):
        return {k: _floatify(v) for k, v in doc.items()}
    if isinstance(doc, list):
        return [_floatify(v) for v in doc]
    if isinstance(doc, str) and _RATIONAL_STR.match(doc):
        return float(Fraction(doc))
    return doc


def _decimal(x: Fraction) -> str:
    return repr(float(x))


def _header(cfg: RunConfig, **extra) -> str:
    fields = [f"newcombnet {__version__}", f"mode={cfg.mode}", f"command={cfg.command}"]
    fields += [f"{k}={v}" for k, v in extra.items()]
    return "# " + " ".join(fields) + "\n"


def _json_text(doc, cfg: RunConfig) -> str:
    if cfg.mode == "float":
        doc = _floatify(doc)
    return json.dumps(doc, indent=2) + "\n"


def _csv_text(header: list[str], rows: list[list], cfg: RunConfig, **meta) -> str:
    buf = io.StringIO()
    buf.write(_header(cfg, **meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
        return
    path = Path(cfg.output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- commands ---------------------------------------------------------------

def cmd_solve(args, cfg: RunConfig) -> int:
    scenario = load_scenario(cfg)
    game = args.game
    if args.pg is not None and game in ("fearful", "combined"):
        raise UsageError(f"--pg does not apply to --game {game}")
    if args.alpha is not None and game in ("realist", "variant"):
        raise UsageError(f"--alpha does not apply to --game {game}")
    alpha = None if args.alpha is None else _rational(args.alpha, cfg)
    pg = None if args.pg is None else _dist(args.pg, cfg)
    try:
        if game == "fearful":
            doc = solve_fearful(scenario, alpha).to_json()
        elif game == "realist":
            doc = solve_realist(scenario, pg).to_json()
        elif game == "combined":
            doc = solve_combined_constrained(scenario, alpha).to_json()
        else:
            doc = solve_variant_choose_game(scenario, pg).to_json()
    except NewcombNetError as exc:
        raise UsageError(str(exc)) from None
    if cfg.fmt == "csv":
        rec = doc["recommendation"] if game == "variant" else doc
        row = [doc["game"], rec["game"], rec["choice"] or "", rec["expected_value"],
               _decimal(Fraction(rec["expected_value"])), doc.get("tie", len(rec["tie_set"]) > 1)]
        _emit(_csv_text(["game", "branch", "choice", "expected_value", "expected_value_decimal", "tie"],
                        [row], cfg), cfg)
    else:
        _emit(_json_text(doc, cfg), cfg)
    return EXIT_OK


def cmd_consistency(args, cfg: RunConfig) -> int:
    quick = [args.py, args.alpha, args.pg, args.h]
    if args.files and any(v is not None for v in quick):
        raise UsageError("give either two net files or the --py/--alpha/--pg/--h flags")
    if args.files:
        if len(args.files) != 2:
            raise UsageError("consistency takes exactly two net files")
        try:
            parsed = [net_from_json(_load_json(f)) for f in args.files]
            xgame = ExtendedGame(tuple(n for n, _ in parsed))
            report = check_profile(xgame, [p for _, p in parsed])
        except NewcombNetError as exc:
            raise InputError(f"bad net/profile: {exc}") from None
    else:
        scenario = load_scenario(cfg)
        py = uniform(CHOICES) if args.py is None else _dist(args.py, cfg)
        alpha = scenario.alpha if args.alpha is None else _rational(args.alpha, cfg)
        pg = scenario.pg if args.pg is None else _dist(args.pg, cfg)
        h = uniform(CHOICES) if args.h is None else _dist(args.h, cfg)
        try:
            w = alpha_accurate_cpd(alpha, CHOICES)
        except NewcombNetError as exc:
            raise UsageError(str(exc)) from None
        xgame = ExtendedGame((fearful_net(), realist_net()))
        report = check_profile(xgame, [fearful_profile(py, w), realist_profile(pg, h)])
    if cfg.fmt == "csv":
        raise UsageError("consistency reports are JSON only")
    _emit(_json_text(report.to_json(), cfg), cfg)
    return EXIT_OK if report.consistent else EXIT_INCONSISTENT


def cmd_feasible(args, cfg: RunConfig) -> int:
    if (args.alpha is None) == (args.w_cpd is None):
        raise UsageError("give exactly one of --alpha or --w-cpd")
    if args.w_cpd is not None and args.oracle_grid is not None:
        raise UsageError("the grid oracle covers the alpha-accurate predictor only")
    if cfg.fmt == "csv":
        raise UsageError("feasible reports are JSON only")
    try:
        if args.w_cpd is not None:
            doc = {"feasible": feasible_g_independent(w_cpd=_cpd(args.w_cpd, cfg)).to_json()}
        else:
            alpha = _rational(args.alpha, cfg)
            analytic = feasible_g_independent(alpha)
            doc = {"alpha": fmt_rational(alpha), "feasible": analytic.to_json()}
            if args.oracle_grid is not None:
                oracle = feasible_g_independent_oracle(alpha, args.oracle_grid)
                expected = analytic.restrict_to_grid(CHOICES, args.oracle_grid)
                doc["oracle"] = {
                    "grid": args.oracle_grid,
                    "members": len(oracle.members),
                    "agrees": oracle.same_members(expected),
                }
    except NewcombNetError as exc:
        raise UsageError(str(exc)) from None
    _emit(_json_text(doc, cfg), cfg)
    return EXIT_OK


SWEEP_COLUMNS = [
    "parameter", "parameter_decimal", "feasible_kind",
    "fearful_value", "fearful_value_decimal",
    "realist_value", "realist_value_decimal",
    "branch", "tie",
]


def sweep_rows(scenario: Scenario, target: str, grid: int, lo: Fraction, hi: Fraction,
               tol: float | None = None) -> list[list]:
    """One row per grid point; the fearful branch plays at the row's alpha,
    the realist branch against the row's P(g)."""
    rows = []
    for k in range(grid + 1):
        x = lo + (hi - lo) * Fraction(k, grid)
        if target == "alpha":
            feasible = feasible_g_independent(x)
            fearful = solve_fearful(scenario, x)
            realist = solve_realist(scenario)
        else:
            feasible = feasible_g_independent(scenario.alpha)
            fearful = solve_fearful(scenario)
            realist = solve_realist(scenario, make_dist(CHOICES, [1 - x, x]))
        fv, rv = fearful.expected_value, realist.expected_value
        branch = GameKind.REALIST if rv > fv else GameKind.FEARFUL
        tie = fv == rv if tol is None else abs(float(fv) - float(rv)) <= tol
        rows.append([
            fmt_rational(x), _decimal(x), feasible.label(),
            fmt_rational(fv), _decimal(fv), fmt_rational(rv), _decimal(rv),
            branch.value, tie,
        ])
    return rows


def cmd_sweep(args, cfg: RunConfig) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    lo, hi = _rational(args.lo, cfg), _rational(args.hi, cfg)
    if not 0 <= lo < hi <= 1:
        raise UsageError("need 0 <= --lo < --hi <= 1")
    scenario = load_scenario(cfg)
    tol = cfg.tolerance if cfg.mode == "float" else None
    rows = sweep_rows(scenario, args.target, args.grid, lo, hi, tol)
    if cfg.fmt == "json":
        _emit(_json_text([dict(zip(SWEEP_COLUMNS, r)) for r in rows], cfg), cfg)
    else:
        _emit(_csv_text(SWEEP_COLUMNS, rows, cfg, target=args.target, grid=args.grid), cfg)
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    if args.n <= 0:
        raise UsageError("--n must be positive")
    if cfg.fmt == "csv":
        raise UsageError("simulate reports are JSON only")
    scenario = load_scenario(cfg)
    if args.net == "fearful":
        if args.pg is not None or args.h is not None:
            raise UsageError("--pg/--h apply to the realist net")
        alpha = scenario.alpha if args.alpha is None else _rational(args.alpha, cfg)
        py = uniform(CHOICES) if args.py is None else _dist(args.py, cfg)
        try:
            profile = fearful_profile(py, alpha_accurate_cpd(alpha, CHOICES))
        except NewcombNetError as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.py is not None or args.alpha is not None:
            raise UsageError("--py/--alpha apply to the fearful net")
        pg = scenario.pg if args.pg is None else _dist(args.pg, cfg)
        h = uniform(CHOICES) if args.h is None else _dist(args.h, cfg)
        profile = realist_profile(pg, h)
    stats = simulate(scenario, args.net.upper(), profile, args.n, args.seed)
    doc = stats.to_json()
    doc["tool"] = f"newcombnet {__version__}"
    _emit(_json_text(doc, cfg), cfg)
    return EXIT_OK


def cmd_reverse(args, cfg: RunConfig) -> int:
    if not args.rest:
        if cfg.fmt == "csv":
            raise UsageError("scenarios are JSON only")
        _emit(_json_text(time_reverse(load_scenario(cfg)).to_json(), cfg), cfg)
        return EXIT_OK
    if args.rest[0] == "reverse":
        raise UsageError("reverse cannot wrap itself")
    return _dispatch(args.rest, reversed_=True)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", default="canonical",
                        help="scenario JSON path, or 'canonical' (default)")
    common.add_argument("--format", dest="fmt", choices=["json", "csv"], default=None)
    common.add_argument("--mode", choices=["exact", "float"], default="exact")
    common.add_argument("--tol", type=float, default=None,
                        help=f"float-mode comparison tolerance (default {DEFAULT_TOL})")
    common.add_argument("--output", "-o", default=None,
                        help=f"write here instead of stdout (relative to ${OUTPUT_DIR_ENV} if set)")

    p = _Parser(prog="newcombnet", description="Newcomb's problem as Bayes net games")
    p.add_argument("--version", action="version", version=f"newcombnet {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("solve", parents=[common], help="recommended strategy in one game")
    s.add_argument("--game", choices=["fearful", "realist", "combined", "variant"], required=True)
    s.add_argument("--alpha")
    s.add_argument("--pg", help="P(g) as AB,B masses, e.g. 1/2,1/2")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("consistency", parents=[common],
                       help="do two nets' strategy profiles give the same joint?")
    c.add_argument("files", nargs="*", help="two net/profile JSON files")
    c.add_argument("--py", help="fearful net: your P(y)")
    c.add_argument("--alpha", help="fearful net: predictor accuracy")
    c.add_argument("--pg", help="realist net: predictor P(g)")
    c.add_argument("--h", help="realist net: your g-independent P(y|g)")
    c.set_defaults(func=cmd_consistency)

    f = sub.add_parser("feasible", parents=[common], help="g-independent P(y|g) allowed by P(g|y)")
    f.add_argument("--alpha")
    f.add_argument("--w-cpd", help="general predictor CPD rows, e.g. '3/4,1/4;1/3,2/3'")
    f.add_argument("--oracle-grid", type=int, help="also run the brute-force grid oracle")
    f.set_defaults(func=cmd_feasible)

    w = sub.add_parser("sweep", parents=[common], help="parameter sweep as CSV")
    w.add_argument("--target", choices=["alpha", "pgB"], required=True)
    w.add_argument("--grid", type=int, required=True)
    w.add_argument("--lo", default="0/1")
    w.add_argument("--hi", default="1/1")
    w.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo check")
    m.add_argument("--net", choices=["fearful", "realist"], default="fearful")
    m.add_argument("--alpha")
    m.add_argument("--py")
    m.add_argument("--pg")
    m.add_argument("--h")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reverse", parents=[common],
                       help="time-reverse the scenario, then run COMMAND")
    r.add_argument("rest", nargs=argparse.REMAINDER)
    r.set_defaults(func=cmd_reverse)
    return p


def _dispatch(argv: Sequence[str], reversed_: bool = False) -> int:
    args = build_parser().parse_args(list(argv))
    fmt = args.fmt or ("csv" if args.command == "sweep" else "json")
    cfg = RunConfig(args.command, args.scenario, fmt, args.mode, args.tol, args.output, reversed_)
    return args.func(args, cfg)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return _dispatch(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, NewcombNetError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        # argparse --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
