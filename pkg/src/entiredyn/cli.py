"""Command-line front end: one subcommand per operation.

Exit codes: 0 on success, 1 on usage errors, 2 on numerical failure.
"""
from __future__ import annotations

import argparse
import re
import sys

from .errors import DynamicsError
from .fixedpoints import CSV_FIXED, find_fixed_points
from .logdyn import CSV_CF, CSV_EXPANSION, doubling_audit, find_CF, geometry, verify_expansion
from .maps import EntireMap, parse_complex
from .orbits import CSV_ORBIT, classify_growth, estimate_Rprime
from .rays import CSV_RAY, ExternalAddress, land_ray, trace_ray
from .render import Viewport, overlay_singular_orbit, render, write_ppm

USAGE_ERROR = 1
NUMERICAL_FAILURE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}") from None


def _floats(count: int):
    def parse(text: str) -> tuple:
        parts = text.split(",")
        try:
            vals = tuple(float(v) for v in parts)
        except ValueError:
            vals = ()
        if len(vals) != count:
            raise argparse.ArgumentTypeError(
                f"expected {count} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _int_set(text: str) -> set:
    try:
        return {int(v) for v in text.split(",") if v.strip()}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 0,1, got {text!r}") from None


def _address(text: str) -> ExternalAddress:
    try:
        return ExternalAddress.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_map_args(p):
    p.add_argument("--family", required=True,
                   help="expaffine, expshift, sine, cosine, zexp or petalexp")
    p.add_argument("--param", action="append", type=_complex_arg, default=[],
                   metavar="RE,IM", help="family parameter; repeat for cosine a then b")


def _add_out(p, required=False):
    p.add_argument("--out", required=required, metavar="PATH",
                   help="output file" + ("" if required else " (default stdout)"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entiredyn",
                     description="Numerics for the dynamics of entire functions of bounded type.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-expansion", help="audit the logarithmic expansion bound")
    _add_map_args(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slack", type=float, default=1e-12)
    _add_out(p)

    p = sub.add_parser("find-cf", help="doubling threshold C_F for one domain")
    _add_map_args(p)
    p.add_argument("--domain", type=int, default=0)
    p.add_argument("--r-max", type=float, default=200.0)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--audit", type=int, default=0, metavar="N",
                   help="re-check N fresh samples above the threshold")
    _add_out(p)

    p = sub.add_parser("classify-orbit", help="growth classification of orbits")
    _add_map_args(p)
    p.add_argument("--z", action="append", type=_complex_arg, required=True,
                   metavar="RE,IM", help="starting point; repeatable")
    p.add_argument("--domains", type=_int_set, default=None,
                   help="allowed fundamental domains, e.g. 0,1 (default: all)")
    p.add_argument("--R", type=float, default=None, help="radius (default K+1)")
    p.add_argument("--nmax", type=int, default=100_000)
    _add_out(p)

    p = sub.add_parser("estimate-rprime", help="escape radius witness for a set of domains")
    _add_map_args(p)
    p.add_argument("--domains", type=_int_set, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nmax", type=int, default=2000)
    _add_out(p)

    p = sub.add_parser("trace-ray", help="sample a dynamic ray")
    _add_map_args(p)
    p.add_argument("--address", type=_address, required=True, metavar="p:0,1")
    p.add_argument("--t-start", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=50)
    _add_out(p)

    p = sub.add_parser("land-ray", help="landing point of a periodic ray")
    _add_map_args(p)
    p.add_argument("--address", type=_address, required=True, metavar="p:0,1")
    p.add_argument("--max-pullbacks", type=int, default=200)
    p.add_argument("--t0", type=float, default=1.0)
    _add_out(p)

    p = sub.add_parser("fixed-points", help="periodic points in a box")
    _add_map_args(p)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--box", type=_floats(4), default=(-3.0, 3.0, -3.0, 3.0),
                   metavar="X0,X1,Y0,Y1")
    p.add_argument("--grid", type=int, default=16)
    _add_out(p)

    for name, helptext in (("render", "escape classification image (PPM)"),
                           ("overlay", "render plus singular-orbit overlay")):
        p = sub.add_parser(name, help=helptext)
        _add_map_args(p)
        p.add_argument("--viewport", type=_floats(3), required=True, metavar="CX,CY,W")
        p.add_argument("--pixels", type=int, default=400)
        p.add_argument("--nmax", type=int, default=10_000)
        p.add_argument("--R", type=float, default=None, help="radius (default K+1)")
        if name == "overlay":
            p.add_argument("--n-orbit", type=int, default=10_000)
        _add_out(p, required=True)
    return parser


def _valued_options(parser) -> set:
    out = set()
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
            elif action.nargs != 0:
                out.update(s for s in action.option_strings if s.startswith("--"))
    return out


_NEGATIVE = re.compile(r"^-[\d.]")


def _merge_negative_values(argv: list, valued: set) -> list:
    """``--param -2,0`` -> ``--param=-2,0``; argparse would read the value as a flag."""
    out = []
    for tok in argv:
        if out and out[-1] in valued and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def _build_map(args) -> EntireMap:
    try:
        return EntireMap(args.family, tuple(args.param))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, lines: list):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive(name, value):
    if value < 1:
        raise UsageError(f"--{name} must be >= 1")


def cmd_verify_expansion(args, m) -> int:
    _positive("samples", args.samples)
    rep = verify_expansion(m, args.samples, args.seed, args.slack)
    _emit(args, [CSV_EXPANSION, rep.csv_row()])
    return 0


def cmd_find_cf(args, m) -> int:
    C = find_CF(m, args.domain, args.r_max, args.samples, args.seed)
    lines = [CSV_CF, f"{m.family},{args.domain},{C!r}"]
    if args.audit > 0:
        r0, r1 = doubling_audit(m, args.domain, C, args.r_max, args.audit, seed=args.seed + 1)
        bad = int((r1 < 2.0 * r0).sum())
        lines.append(f"# audit samples={r0.size} violations={bad}")
    _emit(args, lines)
    return 0


def _radius(m, R):
    return geometry(m).K + 1.0 if R is None else R


def cmd_classify_orbit(args, m) -> int:
    _positive("nmax", args.nmax)
    R = _radius(m, args.R)
    rows = [CSV_ORBIT]
    for z in args.z:
        rows.append(classify_growth(m, args.domains, R, z, args.nmax).csv_row())
    _emit(args, rows)
    return 0


def cmd_estimate_rprime(args, m) -> int:
    w = estimate_Rprime(m, args.domains, args.R, args.probes, args.seed, args.nmax)
    _emit(args, ["R_prime,probes", f"{w.R_prime!r},{len(w.probes)}"])
    return 0


def cmd_trace_ray(args, m) -> int:
    _positive("samples", args.samples)
    pts = trace_ray(m, args.address, args.t_start, args.t_end, args.samples)
    _emit(args, [CSV_RAY] + [s.csv_row() for s in pts])
    return 0


def cmd_land_ray(args, m) -> int:
    res = land_ray(m, args.address, args.max_pullbacks, args.t0)
    _emit(args, [res.record()])
    return 0 if res.landed else NUMERICAL_FAILURE


def cmd_fixed_points(args, m) -> int:
    pts = find_fixed_points(m, args.period, args.box, args.grid)
    _emit(args, [CSV_FIXED] + [fp.csv_row() for fp in pts])
    return 0


def cmd_render(args, m) -> int:
    _positive("pixels", args.pixels)
    _positive("nmax", args.nmax)
    cx, cy, w = args.viewport
    vp = Viewport(complex(cx, cy), w, args.pixels)
    img = render(m, vp, args.nmax, args.R)
    if args.command == "overlay":
        _positive("n-orbit", args.n_orbit)
        img = overlay_singular_orbit(m, img, args.n_orbit)
    write_ppm(img, args.out)
    return 0


COMMANDS = {
    "verify-expansion": cmd_verify_expansion,
    "find-cf": cmd_find_cf,
    "classify-orbit": cmd_classify_orbit,
    "estimate-rprime": cmd_estimate_rprime,
    "trace-ray": cmd_trace_ray,
    "land-ray": cmd_land_ray,
    "fixed-points": cmd_fixed_points,
    "render": cmd_render,
    "overlay": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_merge_negative_values(argv, _valued_options(parser)))
    try:
        m = _build_map(args)
        return COMMANDS[args.command](args, m)
    except UsageError as exc:
        print(f"entiredyn: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except DynamicsError as exc:
        print(f"entiredyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE
    except ValueError as exc:
        # preconditions rejected by the library (bad ranges, sizes)
        print(f"entiredyn: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"entiredyn: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
