"""Command line front end: one binary exposing every module.

Output contract: JSON (``"schema": 1``) on standard output, with every
exact quantity rendered as a rational string like ``"9/16"`` and never a
float; decimal renderings ride alongside for reading.  Plot grids are
the one exception and go to CSV files.  A run manifest (subcommand, full
parameter set, library version, precision, wall time) is written to the
error stream, or to a file with ``--manifest``, so standard output stays
byte-deterministic for a fixed invocation.

Exit codes: 0 success (and Guaranteed for ``verdict``), 10 NoGuarantee,
2 usage or input error, 3 numeric budget exceeded.  The environment
variable ``COMPOSURE_ERR`` supplies the default enclosure-width target
where a subcommand takes ``--err``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .bump import PathologicalFn
from .cantor import RemovalSchedule, svc_stage
from .criteria import cantor_endpoint_grid, uniform_grid, verdict
from .derivhull import DEFAULT_DELTAS, DEFAULT_ZERO_TOL, quotient_hull, sf_scan
from .enclosure import BoundedReal, decimal_str, sci_str
from .errors import ComposureError, PrecisionUnreachable
from .essopen import MarkedSet, essential_open_witness, symmetric_defect, verify_witness
from .intervals import (
    IntervalSet,
    format_interval,
    format_interval_set,
    parse_interval_set,
)
from .piecewise import parse_fn_spec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_NO_GUARANTEE = 10

ERR_ENV_VAR = "COMPOSURE_ERR"

# stages above this have too many components to serialize interval lists
MAX_LISTED_COMPONENTS = 4096


# -- rendering helpers -----------------------------------------------------------


def _rat(q) -> str:
    return str(Fraction(q))


def _exact_json(q, digits: int) -> dict:
    q = Fraction(q)
    return {"exact": _rat(q), "decimal": decimal_str(q, digits)}


def _round_down(q: Fraction, grid_digits: int) -> Fraction:
    d = 10**grid_digits
    num = q * d
    return Fraction(num.numerator // num.denominator, d)


def _round_up(q: Fraction, grid_digits: int) -> Fraction:
    d = 10**grid_digits
    num = q * d
    return Fraction(-((-num.numerator) // num.denominator), d)


def _enclosure_json(b: BoundedReal, digits: int) -> dict:
    # enclosure edges can be rationals with enormous terms; round them
    # outward onto a decimal grid so the emitted enclosure stays sound
    # and short
    grid = digits + 12
    lo = _round_down(b.lower(), grid)
    hi = _round_up(b.upper(), grid)
    return {
        "value": _rat((lo + hi) / 2),
        "err": _rat((hi - lo) / 2),
        "decimal": decimal_str(b.value, digits),
        "err_sci": sci_str(b.err),
    }


def _amount_json(v, digits: int) -> dict:
    """Render a quantity that is either exact or an enclosure."""
    if isinstance(v, BoundedReal):
        return _enclosure_json(v, digits)
    return _exact_json(v, digits)


def _emit(payload: dict):
    sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


# -- argument parsing helpers ------------------------------------------------------


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("not a rational: %r" % text)


def _positive_fraction_arg(text: str) -> Fraction:
    q = _fraction_arg(text)
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive: %r" % text)
    return q


def _default_err() -> Fraction:
    raw = os.environ.get(ERR_ENV_VAR)
    if raw is None:
        return Fraction(1, 10**9)
    try:
        q = Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            "%s is not a rational: %r" % (ERR_ENV_VAR, raw)
        )
    if q <= 0:
        raise argparse.ArgumentTypeError("%s must be positive" % ERR_ENV_VAR)
    return q


def _parse_schedule(text):
    """--schedule geometric:R0,Q -> RemovalSchedule; None -> default."""
    if text is None:
        return RemovalSchedule.default()
    if not text.startswith("geometric:"):
        raise argparse.ArgumentTypeError(
            "schedule must look like geometric:R0,Q (e.g. geometric:1/4,1/4)"
        )
    body = text[len("geometric:") :]
    parts = body.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("schedule needs exactly two rationals")
    first = _fraction_arg(parts[0])
    ratio = _fraction_arg(parts[1])
    try:
        return RemovalSchedule.geometric(first, ratio)
    except ComposureError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parse_deltas(text):
    if text is None:
        return DEFAULT_DELTAS
    deltas = tuple(_positive_fraction_arg(p) for p in text.split(",") if p.strip())
    if not deltas:
        raise argparse.ArgumentTypeError("empty delta ladder")
    return deltas


def _parse_grid(text: str, fn, schedule=None):
    """--grid uniform:N | cantor-endpoints:STAGE -> tuple of rationals."""
    kind, _, arg = text.partition(":")
    if kind == "uniform":
        try:
            n = int(arg)
        except ValueError:
            raise argparse.ArgumentTypeError("uniform grid needs a cell count")
        return uniform_grid(fn.domain.lo, fn.domain.hi, n)
    if kind == "cantor-endpoints":
        try:
            stage = int(arg)
        except ValueError:
            raise argparse.ArgumentTypeError("cantor-endpoints grid needs a stage")
        if stage < 0:
            raise argparse.ArgumentTypeError("stage must be >= 0")
        return cantor_endpoint_grid(stage, schedule)
    raise argparse.ArgumentTypeError(
        "grid must be uniform:N or cantor-endpoints:STAGE"
    )


def _fn_arg(text: str):
    try:
        return parse_fn_spec(text)
    except ComposureError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _set_arg(text: str) -> IntervalSet:
    try:
        return parse_interval_set(text)
    except ComposureError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _stage_caveat(schedule: RemovalSchedule):
    lim = schedule.limit_measure()
    if lim > 0:
        return (
            "finite-stage snapshot: the limit set keeps measure %s and is "
            "not essentially open, which no finite stage exhibits" % lim
        )
    return None


# -- subcommand handlers -----------------------------------------------------------


def _cmd_cantor(args):
    sched = args.schedule
    n = args.stage
    cap = args.max_components
    measure = sched.stage_measure(n)
    payload = {
        "schema": 1,
        "command": "cantor",
        "stage": n,
        "schedule": {
            "prefix": [_rat(r) for r in sched.prefix],
            "tail_first": _rat(sched.tail_first),
            "tail_ratio": _rat(sched.tail_ratio),
        },
        "components": 2**n,
        "measure": _exact_json(measure, args.digits),
        "component_length": _exact_json(sched.stage_component_length(n), args.digits),
        "limit_measure": _exact_json(sched.limit_measure(), args.digits),
        "caveat": _stage_caveat(sched),
    }
    if 2**n <= cap:
        stage = svc_stage(n, sched)
        payload["surviving"] = format_interval_set(stage.surviving)
        payload["gaps"] = [
            {"interval": format_interval(g), "generation": k} for g, k in stage.gaps
        ]
    else:
        payload["surviving"] = None
        payload["gaps"] = None
        payload["note"] = (
            "interval lists omitted beyond %d components; measures come from "
            "the schedule's closed form (raise --max-components to list)" % cap
        )
    return EXIT_OK, payload


def _cmd_pathfn(args):
    fn = PathologicalFn(svc_stage(args.stage, args.schedule), precision=args.err)
    if args.mode == "eval":
        if args.at is None:
            raise ComposureError("eval needs --at")
        result = fn.density(args.at)
        quantity = "h(%s)" % _rat(args.at)
    elif args.mode == "integrate":
        if args.at is None:
            raise ComposureError("integrate needs --at")
        result = fn.value(args.at)
        quantity = "f(%s)" % _rat(args.at)
    else:
        result = fn.image_measure_surviving()
        quantity = "measure of f over the surviving set"
    payload = {
        "schema": 1,
        "command": "pathfn",
        "mode": args.mode,
        "stage": args.stage,
        "at": _rat(args.at) if args.at is not None else None,
        "err_target": _rat(args.err),
        "quantity": quantity,
        "result": _enclosure_json(result, args.digits),
    }
    if args.emit_plot is not None:
        evaluate = fn.density if args.mode == "eval" else fn.value
        with open(args.emit_plot, "w") as fh:
            fh.write("x,value,err\n")
            for x in uniform_grid(0, 1, args.plot_points):
                b = evaluate(x)
                fh.write(
                    "%s,%s,%s\n"
                    % (decimal_str(x, args.digits), decimal_str(b.value, args.digits), sci_str(b.err))
                )
        payload["plot"] = {"path": args.emit_plot, "points": args.plot_points + 1}
    return EXIT_OK, payload


def _cmd_dhull(args):
    fn = args.fn
    dom = (fn.domain.lo, fn.domain.hi)
    hulls = quotient_hull(
        fn, args.at, args.deltas, domain=dom, samples_per_side=args.samples_per_side
    )
    grid = args.digits + 12

    def edge(e, down: bool):
        if not isinstance(e, Fraction):
            return repr(e)
        return _rat(_round_down(e, grid) if down else _round_up(e, grid))

    payload = {
        "schema": 1,
        "command": "dhull",
        "fn": args.fn_text,
        "at": _rat(args.at),
        "hulls": [
            {
                "delta": _rat(h.delta),
                "lo": edge(h.lo_edge(), True),
                "hi": edge(h.hi_edge(), False),
                "samples": h.samples,
                "touches_zero": h.touches_zero(args.zero_tol),
            }
            for h in hulls
        ],
    }
    return EXIT_OK, payload


def _cmd_sf_scan(args):
    fn = args.fn
    grid = _parse_grid(args.grid, fn)
    report = sf_scan(
        fn,
        grid,
        args.deltas,
        args.zero_tol,
        domain=(fn.domain.lo, fn.domain.hi),
    )
    payload = {
        "schema": 1,
        "command": "sf-scan",
        "fn": args.fn_text,
        "grid": args.grid,
        "grid_size": len(report.grid),
        "flagged": [_rat(g) for g in report.flagged],
        "proxy_measure": _exact_json(report.flagged_measure_proxy, args.digits),
        "certified": report.certified,
        "note": report.note,
        "zero_tol": _rat(report.zero_tol),
    }
    return EXIT_OK, payload


def _cmd_essopen(args):
    marked = MarkedSet(
        args.set,
        args.remove if args.remove is not None else IntervalSet.empty(),
        args.add if args.add is not None else IntervalSet.empty(),
    )
    w = essential_open_witness(marked)
    ok = verify_witness(marked, w)
    payload = {
        "schema": 1,
        "command": "essopen",
        "set": format_interval_set(marked.effective()),
        "U": format_interval_set(w.U),
        "V": format_interval_set(w.V),
        "W": format_interval_set(w.W),
        "verified": ok,
        "symmetric_defect": _rat(symmetric_defect(marked, w)),
    }
    return EXIT_OK, payload


def _cmd_bv(args):
    fn = args.fn
    fa, fs, fj = fn.bv_decompose()
    payload = {
        "schema": 1,
        "command": "bv",
        "fn": args.fn_text,
        "total_variation": _amount_json(fn.total_variation(), args.digits),
        "jumps": [
            {"at": _rat(t), "minus": _rat(dm), "plus": _rat(dp)}
            for t, dm, dp in fj.jumps
        ],
        "jump_part_zero": fj.is_zero(),
        "singular_part_zero": fs.is_identically_zero(),
        "has_singular_stub": fn.has_singular_stub(),
    }
    return EXIT_OK, payload


def _witness_json(w):
    if isinstance(w, IntervalSet):
        return {"zero_set": format_interval_set(w)}
    opens = getattr(w, "opens", None)
    if opens is not None:
        out = {
            "zero_set": format_interval_set(w.zero_set),
            "U": format_interval_set(opens.U),
            "V": format_interval_set(opens.V),
            "W": format_interval_set(opens.W),
        }
        if w.total_variation is not None:
            out["total_variation"] = (
                _rat(w.total_variation)
                if isinstance(w.total_variation, Fraction)
                else _rat(w.total_variation.value)
            )
        return out
    return None


def _verdict_payload(v, fn_text: str, digits: int) -> dict:
    return {
        "schema": 1,
        "command": "verdict",
        "fn": fn_text,
        "guaranteed": v.guaranteed,
        "criterion": v.criterion.value if v.criterion is not None else None,
        "witness": _witness_json(v.witness),
        "results": [
            {
                "criterion": r.criterion.value,
                "passed": r.passed,
                "certified": r.certified,
                "reason": r.reason,
                "measure": _rat(r.measure) if r.measure is not None else None,
            }
            for r in v.results
        ],
    }


def _cmd_verdict(args):
    v = verdict(args.fn, all_criteria=args.all)
    code = EXIT_OK if v.guaranteed else EXIT_NO_GUARANTEE
    if args.json:
        return code, _verdict_payload(v, args.fn_text, args.digits)
    if v.guaranteed:
        sys.stdout.write("Guaranteed(%s)\n" % v.criterion.value)
    else:
        sys.stdout.write("NoGuarantee\n")
    for r in v.results:
        sys.stdout.write(
            "  [%s] %s: %s\n"
            % ("pass" if r.passed else "fail", r.criterion.value, r.reason)
        )
    return code, None


def _cmd_demo(args):
    from .piecewise import cantor_integral_fn

    sched = args.schedule
    n = args.stage
    custom = sched != RemovalSchedule.default()
    stage = svc_stage(n, sched)
    pf = PathologicalFn(stage, precision=args.err)
    fn = cantor_integral_fn(n, schedule=sched if custom else None)
    endpoints = cantor_endpoint_grid(n, sched)
    report = sf_scan(
        fn, endpoints, DEFAULT_DELTAS[:8], args.zero_tol, domain=(0, 1)
    )
    flagged = set(report.flagged)
    v = verdict(fn, all_criteria=True)
    payload = {
        "schema": 1,
        "command": "demo",
        "stage": n,
        "surviving_measure": _exact_json(sched.stage_measure(n), args.digits),
        "limit_measure": _exact_json(sched.limit_measure(), args.digits),
        "caveat": _stage_caveat(sched),
        "f_at_1": _enclosure_json(pf.value(1), args.digits),
        "image_measure_surviving": _enclosure_json(
            pf.image_measure_surviving(), args.digits
        ),
        "endpoint_stationary_flags": [
            {"x": _rat(x), "flagged": x in flagged} for x in endpoints
        ],
        "stationary_note": report.note,
        "verdict": _verdict_payload(v, "cantor-integral %d" % n, args.digits),
    }
    return EXIT_OK, payload


# -- parser ------------------------------------------------------------------------


def _add_fn_option(sub):
    sub.add_argument(
        "--fn",
        required=True,
        metavar="SPEC",
        help="function in the piecewise mini-language or a named shorthand",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="composure",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version="composure %s" % __version__
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--digits",
        type=int,
        default=12,
        help="decimal digits for renderings (default 12)",
    )
    common.add_argument(
        "--manifest",
        metavar="PATH",
        default=None,
        help="write the run manifest to PATH instead of the error stream",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "cantor", parents=[common], help="fat removal stages: sets, gaps, measures"
    )
    p.add_argument("--stage", type=int, required=True, metavar="N")
    p.add_argument(
        "--schedule",
        type=_parse_schedule,
        default=RemovalSchedule.default(),
        metavar="geometric:R0,Q",
        help="removal lengths r_k = R0 * Q**(k-1) (default 1/4,1/4)",
    )
    p.add_argument(
        "--max-components",
        type=int,
        default=MAX_LISTED_COMPONENTS,
        metavar="M",
        help="list interval sets only up to M components (default %d)"
        % MAX_LISTED_COMPONENTS,
    )
    p.set_defaults(handler=_cmd_cantor)

    p = sub.add_parser(
        "pathfn",
        parents=[common],
        help="bump train h and its integral f at a removal stage",
    )
    p.add_argument("mode", choices=("eval", "integrate", "image-measure"))
    p.add_argument("--stage", type=int, required=True, metavar="N")
    p.add_argument("--at", type=_fraction_arg, default=None, metavar="p/q")
    p.add_argument(
        "--err",
        type=_positive_fraction_arg,
        default=None,
        metavar="E",
        help="target enclosure width (default %s or 1/10^9)" % ERR_ENV_VAR,
    )
    p.add_argument(
        "--schedule",
        type=_parse_schedule,
        default=RemovalSchedule.default(),
        metavar="geometric:R0,Q",
    )
    p.add_argument("--emit-plot", metavar="CSV", default=None)
    p.add_argument("--plot-points", type=int, default=256, metavar="N")
    p.set_defaults(handler=_cmd_pathfn)

    p = sub.add_parser(
        "dhull", parents=[common], help="difference-quotient hulls at a point"
    )
    _add_fn_option(p)
    p.add_argument("--at", type=_fraction_arg, required=True, metavar="p/q")
    p.add_argument(
        "--deltas",
        type=_parse_deltas,
        default=DEFAULT_DELTAS,
        metavar="d1,d2,...",
        help="strictly decreasing scale ladder (default 1/8..1/2^20)",
    )
    p.add_argument(
        "--samples-per-side", type=int, default=64, metavar="K"
    )
    p.add_argument(
        "--zero-tol", type=_positive_fraction_arg, default=DEFAULT_ZERO_TOL
    )
    p.set_defaults(handler=_cmd_dhull)

    p = sub.add_parser(
        "sf-scan",
        parents=[common],
        help="flag grid points whose quotient hull reaches zero",
    )
    _add_fn_option(p)
    p.add_argument(
        "--grid",
        required=True,
        metavar="uniform:N|cantor-endpoints:STAGE",
    )
    p.add_argument(
        "--deltas", type=_parse_deltas, default=DEFAULT_DELTAS, metavar="d1,d2,..."
    )
    p.add_argument(
        "--zero-tol", type=_positive_fraction_arg, default=DEFAULT_ZERO_TOL
    )
    p.set_defaults(handler=_cmd_sf_scan)

    p = sub.add_parser(
        "essopen",
        parents=[common],
        help="essential-openness witness for a serialized set",
    )
    p.add_argument(
        "--set",
        type=_set_arg,
        required=True,
        metavar="SERIALIZED",
        help='interval union, e.g. "[0,1/2)∪{3/4}" or "(0,1)"',
    )
    p.add_argument(
        "--remove",
        type=_set_arg,
        default=None,
        metavar="POINTS",
        help="null points to carve out of the base set",
    )
    p.add_argument(
        "--add",
        type=_set_arg,
        default=None,
        metavar="POINTS",
        help="null points to adjoin outside the base set",
    )
    p.set_defaults(handler=_cmd_essopen)

    p = sub.add_parser(
        "bv", parents=[common], help="variation, jumps, and decomposition of --fn"
    )
    _add_fn_option(p)
    p.set_defaults(handler=_cmd_bv)

    p = sub.add_parser(
        "verdict",
        parents=[common],
        help="which criterion, if any, guarantees measurable composition",
    )
    _add_fn_option(p)
    p.add_argument(
        "--all",
        action="store_true",
        help="run every criterion even after the first success",
    )
    p.add_argument("--json", action="store_true", help="JSON instead of lines")
    p.set_defaults(handler=_cmd_verdict)

    p = sub.add_parser(
        "demo",
        parents=[common],
        help="the full pipeline at one removal stage",
    )
    p.add_argument("--stage", type=int, required=True, metavar="N")
    p.add_argument(
        "--schedule",
        type=_parse_schedule,
        default=RemovalSchedule.default(),
        metavar="geometric:R0,Q",
    )
    p.add_argument(
        "--err", type=_positive_fraction_arg, default=None, metavar="E"
    )
    p.add_argument(
        "--zero-tol", type=_positive_fraction_arg, default=DEFAULT_ZERO_TOL
    )
    p.set_defaults(handler=_cmd_demo)

    return parser


def _manifest(args, started: float) -> dict:
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler", "fn", "manifest"):
            continue
        if isinstance(value, RemovalSchedule):
            value = "geometric:%s,%s" % (value.tail_first, value.tail_ratio)
        elif isinstance(value, Fraction):
            value = str(value)
        elif isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, IntervalSet):
            value = format_interval_set(value)
        params[key] = value
    return {
        "schema": 1,
        "kind": "run-manifest",
        "subcommand": args.command,
        "params": params,
        "version": __version__,
        "precision": {
            "digits": getattr(args, "digits", None),
            "err": str(getattr(args, "err", None)) if getattr(args, "err", None) else None,
        },
        "wall_time_s": round(time.perf_counter() - started, 6),
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "err") and args.err is None:
        try:
            args.err = _default_err()
        except argparse.ArgumentTypeError as exc:
            parser.error(str(exc))
    if hasattr(args, "fn"):
        args.fn_text = args.fn
        try:
            args.fn = parse_fn_spec(args.fn)
        except ComposureError as exc:
            parser.error("bad --fn spec: %s" % exc)
    started = time.perf_counter()
    try:
        code, payload = args.handler(args)
    except PrecisionUnreachable as exc:
        sys.stderr.write("numeric budget exceeded: %s\n" % exc)
        return EXIT_BUDGET
    # ArgumentTypeError can also surface from handlers that parse
    # composite options themselves (e.g. --grid)
    except (ComposureError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE
    if payload is not None:
        _emit(payload)
    manifest = _manifest(args, started)
    text = json.dumps(manifest, ensure_ascii=False)
    if args.manifest:
        with open(args.manifest, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stderr.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
