import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from .base import (
    DEFAULT_CIRCLE_DIRECTIONS,
    DEFAULT_EXPONENT_BOUND,
    DEFAULT_FIGURE_STEPS,
    DEFAULT_LOG_LEVEL,
    DEFAULT_MAX_WORD_LENGTH,
    DEFAULT_SCAN_HIGH,
    DEFAULT_SCAN_LOW,
    DEFAULT_SCAN_STEP,
    DEFAULT_SEARCH_BOUND,
    DEFAULT_SEARCH_STEP,
    DEFAULT_SMOKE_SEARCH_BOUND,
    DEFAULT_SVG_DIGITS,
    DEFAULT_WORKERS,
    ENV_LOG_LEVEL,
    ENV_WORKERS,
    PingPongError,
    parse_vector,
    parse_vectors,
    rat2str,
)
from .cases import BT_V0, build_bt, search_fourth_generator, verify_2d_case, verify_bt_table, verify_s_conjugation
from .exact import RatVec
from .group import HypergeometricGroup
from .pingpong import falsify, verify
from .projection import FIGURES, PLANE_MAPS, PlanePoint, act2d, build_figure, project
from .uniqueness import GridSpec, uniqueness_scan
from .words import injectivity_check

logger = logging.getLogger(__name__)


def _table(args):
    group = HypergeometricGroup(args.n)
    cone = group.cone(parse_vectors(args.cone)) if args.cone else None
    return group.table(cone)


def cmd_verify(args) -> tuple[dict, bool]:
    verdict = verify(_table(args))
    print(f"valid: {verdict.valid} (power path: {verdict.power_path})")
    if verdict.witness is not None:
        w = verdict.witness
        print(f"witness: {w.word} sends ({', '.join(w.point.to_strings())}) to ({', '.join(w.image.to_strings())})")
    return verdict.to_dict(), verdict.valid


def cmd_falsify(args) -> tuple[dict, bool]:
    witness = falsify(_table(args))
    if witness is None:
        print("no witness found")
        return {"witness": None}, True
    print(f"witness: {witness.word}, {witness.kind}, image {witness.image_membership.value}")
    return {"witness": witness.to_dict()}, False


def _range(text: Optional[str], default: tuple) -> tuple:
    if text is None:
        return default
    values = parse_vector(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"Expected low,high,step, got {text!r}")
    return tuple(values)


def cmd_uniqueness_scan(args) -> tuple[dict, bool]:
    if args.point:
        grid = GridSpec.single(*parse_vector(args.point))
    else:
        default = (DEFAULT_SCAN_LOW, DEFAULT_SCAN_HIGH, DEFAULT_SCAN_STEP)
        grid = GridSpec(_range(args.lam, default), _range(args.mu, default), _range(args.eta, default))
    report = uniqueness_scan(grid, workers=args.workers)
    if args.csv:
        report.to_frame().to_csv(args.csv, index=False)
    print(f"{len(report.entries)} points, {len(report.survivors)} survivors, eta sign forced: {report.eta_sign_forced}")
    return report.to_dict(), report.survivors_as_expected and report.coefficients_match


def cmd_project(args) -> tuple[dict, bool]:
    if args.point:
        p = project(RatVec(parse_vector(args.point)))
    else:
        p = PlanePoint(*parse_vector(args.plane))
    data = {"point": p.to_strings()}
    for g in args.map or []:
        p = act2d(g, p)
    if args.map:
        data.update(maps=args.map, image=p.to_strings())
    print(p)
    return data, True


def cmd_figures(args) -> tuple[dict, bool]:
    if not args.svg and not args.csv:
        raise argparse.ArgumentTypeError("figures needs --svg PATH and/or --csv PATH")
    figure = build_figure(args.figure, args.steps)
    if args.svg:
        figure.save_svg(args.svg, args.digits)
    if args.csv:
        figure.to_csv(args.csv)
    print(f"{args.figure}: {len(figure.shapes)} shapes")
    return {"figure": args.figure, "shapes": [s.label for s in figure.shapes]}, True


def cmd_words(args) -> tuple[dict, bool]:
    group = HypergeometricGroup(args.n)
    report = injectivity_check(group.triple, args.max_len, args.exp_bound)
    if args.csv:
        report.to_frame().to_csv(args.csv, index=False)
    print(f"{report.checked} words checked, passed: {report.passed}")
    return report.to_dict(), report.passed


def cmd_bt4(args) -> tuple[dict, bool]:
    data = build_bt()
    table = verify_bt_table(data)
    conjugation = verify_s_conjugation(parse_vector(args.v0) if args.v0 else BT_V0, data)
    structure = data.structure_checks()
    result = {
        "vectors": {name: v.to_strings() for name, v in data.vectors().items()},
        "mismatches": data.mismatches(),
        "displayed_scalars": {
            name: rat2str(c) if c is not None else None for name, c in data.displayed_scalars().items()
        },
        "structure": structure,
        "table": table.to_dict(),
        "s_conjugation": conjugation.to_dict(),
    }
    ok = not result["mismatches"] and all(structure.values()) and table.valid and conjugation.positive_multiple
    if args.search or args.smoke:
        bound = DEFAULT_SMOKE_SEARCH_BOUND if args.smoke else args.bound
        search = search_fourth_generator(bound, args.step, args.workers)
        if args.csv:
            search.to_frame().to_csv(args.csv, index=False)
        result["search"] = search.to_dict()
        ok = ok and not search.survivors
        print(f"search: {search.checked} checked, {search.skipped} skipped, {len(search.survivors)} survivors")
    scalar = rat2str(conjugation.scalar) if conjugation.scalar is not None else "none"
    print(f"table valid: {table.valid}, S v0 scalar: {scalar}")
    return result, ok


def cmd_case2d(args) -> tuple[dict, bool]:
    report = verify_2d_case(args.directions)
    print(f"valid: {report.valid}, uncovered directions: {len(report.uncovered)}")
    return report.to_dict(), report.valid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypergeometric-pingpong", description="Exact ping-pong tables for hypergeometric groups"
    )
    parser.add_argument("--log-level", default=None, help=f"logging level (env {ENV_LOG_LEVEL})")
    parser.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    workers = int(os.environ.get(ENV_WORKERS, DEFAULT_WORKERS))
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, text in (
        ("verify", cmd_verify, "ping-pong verdict for a cone"),
        ("falsify", cmd_falsify, "search for a counterexample"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--cone", help='generators as "x,y,z;x,y,z;..." (default: the known cone)')
        p.set_defaults(handler=handler)

    p = sub.add_parser("uniqueness-scan", help="falsify cone(u, v, λu + μv + ηw) over a grid")
    p.add_argument("--lam", metavar="LOW,HIGH,STEP")
    p.add_argument("--mu", metavar="LOW,HIGH,STEP")
    p.add_argument("--eta", metavar="LOW,HIGH,STEP")
    p.add_argument("--point", metavar="λ,μ,η", help="scan a single point")
    p.add_argument("--workers", type=int, default=workers)
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(handler=cmd_uniqueness_scan)

    p = sub.add_parser("project", help="plane chart and the induced actions")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--point", metavar="x,y,z")
    target.add_argument("--plane", metavar="a,b")
    p.add_argument("--map", action="append", choices=PLANE_MAPS, help="apply a plane map, repeatable")
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("figures", help="emit figure data")
    p.add_argument("--figure", choices=FIGURES, default="fig1")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--steps", type=int, default=DEFAULT_FIGURE_STEPS)
    p.add_argument("--digits", type=int, default=DEFAULT_SVG_DIGITS)
    p.set_defaults(handler=cmd_figures)

    p = sub.add_parser("words", help="bounded injectivity check on reduced words")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_WORD_LENGTH)
    p.add_argument("--exp-bound", type=int, default=DEFAULT_EXPONENT_BOUND)
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(handler=cmd_words)

    p = sub.add_parser("bt4", help="four-dimensional cones, S-conjugation and the fourth-generator search")
    p.add_argument("--v0", metavar="a,b,c,d")
    p.add_argument("--search", action="store_true", help="run the fourth-generator search")
    smoke = DEFAULT_SMOKE_SEARCH_BOUND
    p.add_argument("--smoke", action="store_true", help=f"search only the box [-{smoke}, {smoke}]^4")
    p.add_argument("--bound", default=str(DEFAULT_SEARCH_BOUND))
    p.add_argument("--step", default=rat2str(DEFAULT_SEARCH_STEP))
    p.add_argument("--workers", type=int, default=workers)
    p.add_argument("--csv", metavar="PATH", help="survivor table")
    p.set_defaults(handler=cmd_bt4)

    p = sub.add_parser("case2d", help="the n=2 table and plane coverage")
    p.add_argument("--directions", type=int, default=DEFAULT_CIRCLE_DIRECTIONS)
    p.set_defaults(handler=cmd_case2d)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    :return: 0 when the check passes, 1 when it is invalid or falsified, 2 on usage, input or output errors
    """
    load_dotenv()
    try:
        parser = build_parser()
    except ValueError as e:
        print(f"hypergeometric-pingpong: error: invalid {ENV_WORKERS}: {e}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=(args.log_level or os.environ.get(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL)).upper())

    try:
        data, ok = args.handler(args)
        if args.json:
            with open(args.json, "w") as f:
                f.write(json.dumps(data, sort_keys=True, indent=2, default=str))
    except argparse.ArgumentTypeError as e:
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        logger.error("%s could not write its output: %s", args.command, e)
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (PingPongError, ValueError) as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0 if ok else 1
