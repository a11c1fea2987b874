"""Scenario configuration files.

Configs are TOML.  Angles may only be given in degrees through keys ending
in ``_deg``; they are converted to radians here.  Example::

    [scenario]
    R0 = 1000
    r = 100
    alpha_deg = 10
    VT = 1
    multiplier = 1.1        # or: Vs = 18.0
    n = 4                   # optional when [sweep] is present

    [sweep]
    n_min = 2
    n_max = 16
    n_step = 2

    [sim]
    grid_cells = 600
    frame_interval = 250

    [output]
    dir = "out"
    formats = ["csv", "json"]
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import tomli

from .errors import ParseError, ValidationError
from .scenario import ScenarioParams
from .sim import SectorMode, SimConfig

DEFAULT_MULTIPLIER = 1.1
FORMATS = frozenset({"csv", "json", "frames"})

_SCENARIO_KEYS = {"R0", "r", "alpha_deg", "VT", "Vs", "multiplier", "n"}
_SWEEP_KEYS = {"n_min", "n_max", "n_step"}
_SIM_KEYS = {"dt", "frame_interval", "escape_radius", "max_sim_time", "cell_size",
             "grid_cells", "clear_during_dash", "sector_mode", "dash_margin_cells"}
_OUTPUT_KEYS = {"dir", "formats"}


@dataclass(frozen=True)
class RunSpec:
    scenario: ScenarioParams
    sweep_over_n: Optional[Tuple[int, int, int]] = None  # (start, stop inclusive, step)
    sim: Optional[SimConfig] = None
    output_dir: Optional[str] = None  # None: print tables to stdout
    formats: frozenset = field(default_factory=lambda: frozenset({"csv"}))

    def n_values(self):
        if self.sweep_over_n is None:
            return [self.scenario.n]
        a, b, s = self.sweep_over_n
        return list(range(a, b + 1, s))

    def scenarios(self):
        return [self.scenario.with_n(n) for n in self.n_values()]


def _line_of(text: str, key: str) -> Optional[int]:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _number(table, key, text, required=False, kind=float):
    if key not in table:
        if required:
            raise ParseError(f"missing required field '{key}'", field=key)
        return None
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"field '{key}' must be a number, got {v!r}",
                         field=key, line=_line_of(text, key))
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ParseError(f"field '{key}' must be an integer, got {v!r}",
                             field=key, line=_line_of(text, key))
        return int(v)
    return float(v)


def _check_keys(table, allowed, section, text):
    for k in table:
        if k not in allowed:
            hint = " (angles must use the _deg suffix)" if k in ("alpha",) else ""
            raise ParseError(f"unknown key '{k}' in [{section}]{hint}",
                             field=k, line=_line_of(text, k))


def parse_config(text: str) -> RunSpec:
    """Parse and validate a TOML run configuration.

    Raises:
        ParseError: malformed TOML, unknown keys, wrong types or missing fields.
        ValidationError: values that break a scenario or sweep invariant.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"malformed config: {exc}",
                         line=int(m.group(1)) if m else None) from exc

    for section in doc:
        if section not in ("scenario", "sweep", "sim", "output"):
            raise ParseError(f"unknown section [{section}]", field=section,
                             line=_line_of(text, section))
    if "scenario" not in doc:
        raise ParseError("missing [scenario] section", field="scenario")
    sc = doc["scenario"]
    _check_keys(sc, _SCENARIO_KEYS, "scenario", text)

    R0 = _number(sc, "R0", text, required=True)
    r = _number(sc, "r", text, required=True)
    VT = _number(sc, "VT", text, required=True)
    alpha = math.radians(_number(sc, "alpha_deg", text, required=True))
    Vs = _number(sc, "Vs", text)
    mult = _number(sc, "multiplier", text)
    if Vs is None and mult is None:
        mult = DEFAULT_MULTIPLIER

    sweep = None
    if "sweep" in doc:
        sw = doc["sweep"]
        _check_keys(sw, _SWEEP_KEYS, "sweep", text)
        a = _number(sw, "n_min", text, required=True, kind=int)
        b = _number(sw, "n_max", text, required=True, kind=int)
        step = _number(sw, "n_step", text, kind=int) or 2
        if step <= 0 or step % 2:
            raise ValidationError(f"n_step must be a positive even number, got {step}", "n_step")
        if b < a:
            raise ValidationError(f"n_max {b} is below n_min {a}", "n_max")
        if a < 2 or a % 2:
            raise ValidationError(f"sweep range must contain only even n >= 2; n_min={a}", "n_min")
        sweep = (a, b, step)

    n = _number(sc, "n", text, kind=int)
    if n is None:
        if sweep is None:
            raise ParseError("missing required field 'n' (or a [sweep] section)", field="n")
        n = sweep[0]

    scenario = ScenarioParams(n=n, R0=R0, r=r, alpha=alpha, VT=VT, Vs=Vs,
                              multiplier=None if Vs is not None else mult)

    sim = None
    if "sim" in doc:
        st = doc["sim"]
        _check_keys(st, _SIM_KEYS, "sim", text)
        kw = {}
        for key in ("dt", "frame_interval", "escape_radius", "max_sim_time", "cell_size",
                    "dash_margin_cells"):
            v = _number(st, key, text)
            if v is not None:
                kw[key] = v
        gc = _number(st, "grid_cells", text, kind=int)
        if gc is not None:
            kw["grid_cells"] = gc
        if "clear_during_dash" in st:
            if not isinstance(st["clear_during_dash"], bool):
                raise ParseError("clear_during_dash must be true or false",
                                 field="clear_during_dash",
                                 line=_line_of(text, "clear_during_dash"))
            kw["clear_during_dash"] = st["clear_during_dash"]
        if "sector_mode" in st:
            try:
                kw["sector_mode"] = SectorMode(st["sector_mode"])
            except ValueError:
                raise ParseError(f"sector_mode must be one of "
                                 f"{[m.value for m in SectorMode]}", field="sector_mode",
                                 line=_line_of(text, "sector_mode")) from None
        for key in ("dt", "cell_size", "max_sim_time", "escape_radius"):
            if key in kw and not kw[key] > 0:
                raise ValidationError(f"{key} must be positive", key)
        if kw.get("frame_interval", 0.0) < 0:
            raise ValidationError("frame_interval must be >= 0", "frame_interval")
        sim = SimConfig(**kw)

    out_dir = None
    formats = frozenset({"csv"})
    if "output" in doc:
        ot = doc["output"]
        _check_keys(ot, _OUTPUT_KEYS, "output", text)
        if "dir" in ot:
            if not isinstance(ot["dir"], str):
                raise ParseError("output dir must be a string", field="dir",
                                 line=_line_of(text, "dir"))
            out_dir = ot["dir"]
        if "formats" in ot:
            fm = ot["formats"]
            if not isinstance(fm, list) or not all(isinstance(x, str) for x in fm):
                raise ParseError("formats must be a list of strings", field="formats",
                                 line=_line_of(text, "formats"))
            bad = set(fm) - FORMATS
            if bad:
                raise ValidationError(f"unknown output formats {sorted(bad)}", "formats")
            formats = frozenset(fm)
    return RunSpec(scenario, sweep, sim, out_dir, formats)


def load_config(path: str) -> RunSpec:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"config is not UTF-8: {exc}") from exc
    return parse_config(text)


def with_overrides(spec: RunSpec, **kw) -> RunSpec:
    return replace(spec, **kw)
