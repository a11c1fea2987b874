"""Result tables over team sizes and their CSV/JSON serialisation.

Every float is rounded to 12 significant digits when a row is built, so
the in-memory rows, the CSV text and the JSON text all carry the same
values and a JSON round trip reproduces the rows exactly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Tuple

from .analytics import critical_speed, lower_bound_speed
from .config import RunSpec
from .errors import InfeasibleScenario, InfeasibleSpeed
from .frames import FrameWriter
from .geometry import SensorGeometry, gamma_offset
from .schedule import build_schedule
from .sim import SimConfig, Verdict, run

log = logging.getLogger(__name__)

SIG_DIGITS = 12
INFEASIBLE = "INFEASIBLE_SPEED"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_ESCAPE = 3


def sig(x):
    """Round a float to 12 significant digits; other values pass through."""
    if isinstance(x, float):
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


@dataclass(frozen=True)
class ResultRow:
    n: int
    v_lb: float
    v_simplified: Optional[float]
    v_critical: Optional[float]
    N_n: Optional[int] = None
    R_N: Optional[float] = None
    eta: Optional[int] = None
    T_tilde_spiral: Optional[float] = None
    T_tilde_in: Optional[float] = None
    T_last: Optional[float] = None
    T_l: Optional[float] = None
    T_in_last: Optional[float] = None
    T_in_f: Optional[float] = None
    T_spiral_total: Optional[float] = None
    T_in_total: Optional[float] = None
    T_total: Optional[float] = None
    sim_clear_time: Optional[float] = None
    sim_verdict: Optional[str] = None

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, sig(getattr(self, f.name)))

    @property
    def feasible(self) -> bool:
        return self.T_total is not None


COLUMNS = [f.name for f in fields(ResultRow)]


def row_for(params) -> ResultRow:
    """Schedule row for one scenario; infeasible speeds give an annotated row."""
    try:
        s = build_schedule(params)
    except InfeasibleSpeed:
        b = critical_speed(params)
        return ResultRow(params.n, b.v_lb, b.v_simplified, b.v_critical, sim_verdict=INFEASIBLE)
    b = s.benchmarks
    return ResultRow(
        n=params.n, v_lb=b.v_lb, v_simplified=b.v_simplified, v_critical=b.v_critical,
        N_n=s.N_n, R_N=s.R_N, eta=s.eta, T_tilde_spiral=s.T_tilde_spiral,
        T_tilde_in=s.T_tilde_in, T_last=s.T_last, T_l=s.T_l, T_in_last=s.T_in_last,
        T_in_f=s.T_in_f, T_spiral_total=s.T_spiral_total, T_in_total=s.T_in_total,
        T_total=s.T_total)


def run_table(spec: RunSpec) -> Tuple[List[ResultRow], int]:
    """One row per team size in the spec; returns (rows, exit code)."""
    rows = []
    code = EXIT_OK
    for params in spec.scenarios():
        try:
            row = row_for(params)
        except InfeasibleScenario as exc:
            log.warning("n=%d: %s", params.n, exc)
            row = ResultRow(params.n, lower_bound_speed(params.n, params.R0, params.r, params.VT),
                            None, None, sim_verdict=INFEASIBLE)
        if not row.feasible:
            log.warning("n=%d: sweeper speed does not exceed the critical speed", params.n)
            code = EXIT_INFEASIBLE
        rows.append(row)
    return rows, code


def run_sim_validation(spec: RunSpec, rows: Optional[List[ResultRow]] = None,
                       force: bool = False) -> Tuple[List[ResultRow], int]:
    """Append simulator columns to the table rows (and write frames if asked).

    Infeasible rows are only simulated when ``force`` is set.
    """
    cfg = spec.sim if spec.sim is not None else SimConfig()
    if rows is None:
        rows, code = run_table(spec)
    else:
        code = EXIT_OK if all(r.feasible for r in rows) else EXIT_INFEASIBLE
    want_frames = "frames" in spec.formats
    if cfg.frame_interval and not want_frames:
        log.warning("frame_interval set but 'frames' not in output formats; skipping frames")
    out = []
    for row, params in zip(rows, spec.scenarios()):
        if not row.feasible and not force:
            out.append(row)
            continue
        sink = None
        if want_frames and cfg.frame_interval > 0:
            sink = FrameWriter(os.path.join(spec.output_dir or ".", f"frames_n{params.n:02d}"),
                               SensorGeometry(params.r, params.alpha))
        outcome = run(params, cfg, force=force, frame_sink=sink)
        if sink is not None:
            sink.close()
        if outcome.verdict is Verdict.ESCAPED:
            code = max(code, EXIT_ESCAPE)
        verdict = outcome.verdict.value
        out.append(ResultRow(**{**asdict(row), "sim_clear_time": outcome.clear_time,
                                "sim_verdict": verdict}))
    return out, code


def rows_to_csv(rows: List[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: List[ResultRow]) -> str:
    data = [{c: getattr(row, c) for c in COLUMNS} for row in rows]
    return json.dumps(data, indent=1) + "\n"


def rows_from_json(text: str) -> List[ResultRow]:
    return [ResultRow(**d) for d in json.loads(text)]


def rows_from_csv(text: str) -> List[ResultRow]:
    out = []
    ints = {"n", "N_n", "eta"}
    for rec in csv.DictReader(io.StringIO(text)):
        kw = {}
        for c in COLUMNS:
            v = rec[c]
            if v == "":
                kw[c] = None
            elif c in ints:
                kw[c] = int(v)
            elif c == "sim_verdict":
                kw[c] = v
            else:
                kw[c] = float(v)
        out.append(ResultRow(**kw))
    return out


def write_rows(rows: List[ResultRow], out_dir: str, formats, stem: str = "table") -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if "csv" in formats:
        p = os.path.join(out_dir, stem + ".csv")
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
        paths.append(p)
    if "json" in formats:
        p = os.path.join(out_dir, stem + ".json")
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(rows_to_json(rows))
        paths.append(p)
    return paths


def speeds_for(params) -> dict:
    """The three speed benchmarks plus the placement offset for one scenario."""
    b = critical_speed(params)
    g = gamma_offset(params.R0, params.r, params.alpha)
    return {"n": params.n, "gamma": sig(g), "v_lb": sig(b.v_lb),
            "v_simplified": sig(b.v_simplified), "v_critical": sig(b.v_critical),
            "residual": sig(b.residual), "method": b.method}


__all__ = ["ResultRow", "COLUMNS", "run_table", "run_sim_validation", "rows_to_csv",
           "rows_to_json", "rows_from_json", "rows_from_csv", "write_rows", "speeds_for"]
