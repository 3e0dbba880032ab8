"""Command-line interface: ``escalate {paths,eval,schematic,verify}``.

Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, figures, io
from .paths import MAX_DOSES, design_tables, iter_paths
from .pharm import ParameterError, hazards, scenario_from_mapping
from .safety import Metric, summarize
from .schematic import DEFAULT_SCHEMATIC_DOSES, GridSpecError
from .verify import path_count_table, run_checks

log = logging.getLogger("escalate")


def _doses_list(text: str) -> list[int]:
    """Parse "4", "4,6" or "3..7"."""
    try:
        out = []
        for part in text.split(","):
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dose list {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty dose list")
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


def _range(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("range must be MIN,MAX")
    return vals[0], vals[1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="escalate",
        description="Exact enumeration and safety evaluation of 3+3 dose-escalation trials.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paths", help="enumerate trial paths")
    p.add_argument("--doses", "-D", type=int, required=True, help=f"number of doses (1..{MAX_DOSES})")
    p.add_argument("--format", choices=("jsonl", "csv", "count"), default="count")
    p.add_argument("--table", action="store_true",
                   help="with --format count: print D, J, log J, delta log J for 1..D")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")

    e = sub.add_parser("eval", help="exact safety summary for one scenario")
    e.add_argument("--doses", "-D", type=int)
    e.add_argument("--scenario", help="scenario JSON file (raw or normalized form)")
    e.add_argument("--mu-prime", type=float)
    e.add_argument("--sigma-prime", type=float)
    e.add_argument("--kappa-prime", type=float)
    e.add_argument("--delta", type=float)
    e.add_argument("--mu", type=float)
    e.add_argument("--sigma", type=float)
    e.add_argument("--kappa", type=float)
    e.add_argument("--log-x1", type=float, help="log of dose 1 (default: delta)")
    e.add_argument("--metric", choices=("all",) + tuple(m.value for m in Metric), default="all",
                   help="print the full summary or a single number")

    s = sub.add_parser("schematic", help="safety-field grids, contours and SVG")
    s.add_argument("--figure", choices=figures.FIGURES, default="generic")
    s.add_argument("--doses", "-D", type=_doses_list,
                   help='dose counts, e.g. "6", "4,6" or "3..7"')
    s.add_argument("--kappa-prime", type=_float_list,
                   help="contours46: comma-separated kappa' panels")
    s.add_argument("--levels", type=_float_list, default=list(figures.DEFAULT_LEVELS))
    s.add_argument("--steps", type=int, default=figures.DEFAULT_STEPS,
                   help="lattice points per axis")
    s.add_argument("--x-range", type=_range, help="MIN,MAX of the horizontal axis")
    s.add_argument("--y-range", type=_range, help="MIN,MAX of the vertical axis")
    s.add_argument("--log-x", action="store_true", help="log-spaced horizontal axis")
    s.add_argument("--log-y", action="store_true", help="log-spaced vertical axis")
    s.add_argument("--metric", choices=tuple(m.value for m in Metric),
                   default=Metric.EXPECTED_FATALITIES.value)
    s.add_argument("--format", choices=figures.FORMATS, action="append",
                   help="artifact types to write (repeatable; default all)")
    s.add_argument("--out", default="schematic_out", help="output directory")

    v = sub.add_parser("verify", help="run the fast reproduction checks")

    for name, sp in (("paths", p), ("eval", e), ("schematic", s), ("verify", v)):
        sp.set_defaults(handler=COMMANDS[name], subparser=sp)
    return parser


def cmd_paths(args, parser) -> int:
    D = args.doses
    if not 1 <= D <= MAX_DOSES:
        parser.error(f"--doses must lie in 1..{MAX_DOSES}")
    out = open(args.output, "w", newline="\n") if args.output else sys.stdout
    try:
        if args.format == "count":
            if args.table:
                out.write("D,J,log_J,delta_log_J\n")
                for d, J, _, lj, dlj in path_count_table(D):
                    dl = "" if dlj is None else f"{dlj:.2f}"
                    out.write(f"{d},{J},{lj:.2f},{dl}\n")
            else:
                out.write(f"{sum(1 for _ in iter_paths(D))}\n")
        elif args.format == "jsonl":
            io.write_paths_jsonl(iter_paths(D), out)
        else:
            io.write_matrix_csv(iter_paths(D), D, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


_NORM_FLAGS = ("mu_prime", "sigma_prime", "kappa_prime")
_RAW_FLAGS = ("delta", "mu", "sigma", "kappa", "log_x1")


def _scenario_mapping(args, parser) -> dict:
    given_norm = [f for f in _NORM_FLAGS if getattr(args, f) is not None]
    given_raw = [f for f in _RAW_FLAGS if getattr(args, f) is not None]
    if args.scenario:
        if given_norm or given_raw:
            parser.error("--scenario cannot be combined with parameter flags")
        try:
            with open(args.scenario) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read scenario: {exc}")
        if args.doses is not None:
            obj.setdefault("D", args.doses)
        return obj
    if args.doses is None:
        parser.error("--doses is required")
    if given_norm and given_raw:
        parser.error("give either normalized (--mu-prime ...) or raw (--delta ...) parameters")
    obj = {"D": args.doses}
    if given_norm:
        missing = [f for f in _NORM_FLAGS if f not in given_norm]
        if missing:
            parser.error("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
        obj.update({f: getattr(args, f) for f in _NORM_FLAGS})
    elif given_raw:
        missing = [f for f in _RAW_FLAGS[:4] if f not in given_raw]
        if missing:
            parser.error("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
        obj.update({f: getattr(args, f) for f in given_raw})
    else:
        parser.error("no scenario parameters given")
    return obj


def cmd_eval(args, parser) -> int:
    obj = _scenario_mapping(args, parser)
    try:
        scn = scenario_from_mapping(obj)
    except (ParameterError, TypeError, ValueError) as exc:
        parser.error(str(exc))
    summary = summarize(design_tables(scn.D), hazards(scn))
    data = summary.to_json()
    if args.metric == "all":
        io.dump_json(data, sys.stdout)
    else:
        sys.stdout.write(io.fmt(data[args.metric]) + "\n")
    return 0


def cmd_schematic(args, parser) -> int:
    metric = Metric(args.metric)
    levels = args.levels
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        parser.error("--levels must be a non-empty, strictly ascending list")
    if args.steps < 2:
        parser.error("--steps must be at least 2")
    formats = tuple(args.format) if args.format else figures.FORMATS
    ranges = {k: v for k, v in (("x_range", args.x_range), ("y_range", args.y_range)) if v}
    try:
        if args.figure == "generic":
            doses = args.doses or [DEFAULT_SCHEMATIC_DOSES]
            panels = [p for D in doses for p in figures.generic_panels(
                D, args.steps, args.log_x, args.log_y, metric=metric, **ranges)]
        elif args.figure == "contours46":
            if args.x_range or args.log_x:
                parser.error("contours46 spans mu' = 1..D; --x-range/--log-x do not apply")
            kw = {"y_range": args.y_range} if args.y_range else {}
            panels = figures.contours46_panels(
                args.doses or figures.CONTOURS46_DOSES,
                args.kappa_prime or figures.CONTOURS46_KAPPAS,
                args.steps, log_y=args.log_y, metric=metric, **kw)
        else:
            if args.log_y:
                parser.error("focused: --log-y does not apply")
            panels = figures.focused_panels(args.doses or figures.FOCUSED_DOSES, args.steps,
                                            log_x=args.log_x, metric=metric, **ranges)
    except (GridSpecError, ParameterError, ValueError) as exc:
        parser.error(str(exc))
    for p in panels:
        if not 2 <= p.spec.D <= 10:
            parser.error(f"schematic dose counts must lie in 2..10, got {p.spec.D}")

    for panel in panels:
        log.info("evaluating %s", panel.stem)
    figures.compute(panels, levels)
    try:
        written = figures.write_panels(panels, args.out, formats)
        if args.figure == "focused":
            report = figures.focused_report(panels)
            written.append(figures.write_json(report, args.out, "focused_deviation.json"))
            sys.stdout.write(f"max relative deviation across D>=3: "
                             f"{report['max_deviation_D_ge_3']}\n")
        params = {
            "figure": args.figure,
            "levels": levels,
            "steps": args.steps,
            "metric": metric.value,
            "formats": list(formats),
            "panels": figures.panel_metadata(panels),
        }
        manifest = io.make_manifest("schematic", params, written)
        figures.write_json(manifest, args.out, "manifest.json")
    except OSError as exc:
        sys.stderr.write(f"escalate: cannot write output: {exc}\n")
        return 1
    sys.stdout.write(f"wrote {len(written)} files to {args.out}\n")
    return 0


def cmd_verify(args, parser) -> int:
    results = run_checks()
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}\n")
    sys.stdout.write("\n D        J   expected  log J  dlog J\n")
    for d, J, exp, lj, dlj in path_count_table(10):
        dl = "   --" if dlj is None else f"{dlj:6.2f}"
        mark = "" if J == exp else "  MISMATCH"
        sys.stdout.write(f"{d:2d} {J:8d} {exp if exp is not None else '?':>10} {lj:6.2f} {dl}{mark}\n")
    failed = sum(not ok for _, ok, _ in results)
    sys.stdout.write(f"\n{len(results) - failed}/{len(results)} checks passed\n")
    return 1 if failed else 0


COMMANDS = {"paths": cmd_paths, "eval": cmd_eval, "schematic": cmd_schematic,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.handler(args, args.subparser)


if __name__ == "__main__":
    sys.exit(main())
