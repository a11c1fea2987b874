"""Command-line front end.

Verbs::

    speeds    speed benchmarks for each team size
    schedule  full cycle-by-cycle schedule for one team size
    table     result table over the configured team sizes
    simulate  worst-case simulation, table columns included
    frames    simulation with SVG frame export

Exit codes: 0 success, 1 usage or config error, 2 infeasible scenario,
3 evader escape detected by the simulator.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import replace
from typing import List, Optional

from . import report
from .config import RunSpec, load_config
from .errors import InfeasibleScenario, InfeasibleSpeed, PincerError
from .report import EXIT_ESCAPE, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, sig
from .scenario import ScenarioParams
from .schedule import build_schedule
from .sim import SimConfig

log = logging.getLogger("pincer_sweep")

# used when no --config is given: the parameters of the team-size study
DEFAULT_SCENARIO = ScenarioParams(n=4, R0=1000.0, r=100.0, alpha=math.radians(10.0),
                                  VT=1.0, multiplier=1.1)
DEFAULT_FRAME_INTERVAL = 100.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _even(text):
    n = int(text)
    if n < 2 or n % 2:
        raise argparse.ArgumentTypeError(f"n must be an even integer >= 2, got {text}")
    return n


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pincer-sweep", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (default: stdout / config dir)")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--n", type=_even, help="single even team size (overrides the sweep)")
    common.add_argument("--multiplier", type=_positive(float),
                        help="sweeper speed as a multiple of the critical speed")
    common.add_argument("--grid-cells", type=_positive(int), help="simulation raster side")
    common.add_argument("--dt", type=_positive(float), help="simulation time step")
    common.add_argument("--seedless", action="store_true",
                        help="run twice and fail unless outputs are byte-identical")
    common.add_argument("--force", action="store_true",
                        help="simulate even below the critical speed (diagnostic mode)")
    common.add_argument("--frame-interval", type=_positive(float),
                        help="time between exported frames (frames verb)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, text in (("speeds", "speed benchmarks"), ("schedule", "cycle schedule"),
                       ("table", "result table"), ("simulate", "worst-case simulation"),
                       ("frames", "simulation with frame export")):
        sub.add_parser(verb, parents=[common], help=text)
    return p


def resolve_spec(args):
    spec = load_config(args.config) if args.config else RunSpec(DEFAULT_SCENARIO)
    sc = spec.scenario
    if args.multiplier is not None:
        sc = sc.with_multiplier(args.multiplier)
    sweep = spec.sweep_over_n
    if args.n is not None:
        sc = sc.with_n(args.n)
        sweep = None
    sim = spec.sim or SimConfig()
    if args.grid_cells is not None:
        sim = replace(sim, grid_cells=args.grid_cells, cell_size=None)
    if args.dt is not None:
        sim = replace(sim, dt=args.dt)
    formats = set(spec.formats)
    if args.format:
        formats = (formats - {"csv", "json"}) | {args.format}
    if args.verb == "frames":
        formats.add("frames")
        fi = args.frame_interval or sim.frame_interval or DEFAULT_FRAME_INTERVAL
        sim = replace(sim, frame_interval=fi)
    out = args.out if args.out is not None else spec.output_dir
    return RunSpec(sc, sweep, sim, out if out is not None else ".", frozenset(formats)), out


def _emit(text: str, out_dir: Optional[str], name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _table_text(rows, fmt_name: str) -> str:
    return report.rows_to_json(rows) if fmt_name == "json" else report.rows_to_csv(rows)


def _sig_tree(obj):
    if isinstance(obj, dict):
        return {k: _sig_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig_tree(v) for v in obj]
    return sig(obj)


def _produce(verb, spec: RunSpec, args):
    """Run a verb; returns (text, file name, exit code)."""
    fmt_name = "json" if "json" in spec.formats and "csv" not in spec.formats else "csv"
    if args.format:
        fmt_name = args.format
    if verb == "speeds":
        recs = []
        code = EXIT_OK
        for params in spec.scenarios():
            try:
                recs.append(report.speeds_for(params))
            except InfeasibleScenario as exc:
                log.error("n=%d: %s", params.n, exc)
                code = EXIT_INFEASIBLE
        if fmt_name == "json":
            return json.dumps(recs, indent=1) + "\n", "speeds.json", code
        cols = ["n", "gamma", "v_lb", "v_simplified", "v_critical", "residual", "method"]
        lines = [",".join(cols)]
        lines += [",".join(report.fmt(r[c]) for c in cols) for r in recs]
        return "\n".join(lines) + "\n", "speeds.csv", code
    if verb == "schedule":
        sc = spec.scenarios()[0]
        s = build_schedule(sc)
        if fmt_name == "json":
            return json.dumps(_sig_tree(s.to_dict()), indent=1) + "\n", "schedule.json", EXIT_OK
        cols = ["i", "R_i", "R_tilde_i", "T_spiral_i", "delta_i", "delta_eff_i", "T_in_i", "R_next"]
        lines = [",".join(cols)]
        lines += [",".join(report.fmt(getattr(c, k)) for k in cols) for c in s.cycles]
        return "\n".join(lines) + "\n", "schedule.csv", EXIT_OK
    if verb == "table":
        rows, code = report.run_table(spec)
        return _table_text(rows, fmt_name), f"table.{fmt_name}", code
    rows, code = report.run_sim_validation(spec, force=args.force)
    return _table_text(rows, fmt_name), f"simulation.{fmt_name}", code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec, out_dir = resolve_spec(args)
        if args.verb == "frames" and out_dir is None:
            out_dir = "."
            spec = replace(spec, output_dir=".")
        text, name, code = _produce(args.verb, spec, args)
        if args.seedless:
            again, _, _ = _produce(args.verb, spec, args)
            if again != text:
                log.error("outputs of two identical runs differ")
                return EXIT_USAGE
        _emit(text, out_dir, name)
        return code
    except InfeasibleSpeed as exc:
        vc = f" (critical speed {exc.v_critical:.12g})" if exc.v_critical else ""
        log.error("%s%s", exc, vc)
        return EXIT_INFEASIBLE
    except InfeasibleScenario as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except PincerError as exc:
        where = ""
        if getattr(exc, "field", None):
            where += f" [field {exc.field}]"
        if getattr(exc, "line", None):
            where += f" [line {exc.line}]"
        sys.stderr.write(f"error: {exc}{where}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
