import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pincer_sweep.config import parse_config
from pincer_sweep.errors import ParseError, ValidationError
from pincer_sweep.report import (
    COLUMNS,
    INFEASIBLE,
    ResultRow,
    rows_from_csv,
    rows_from_json,
    rows_to_csv,
    rows_to_json,
    run_table,
)
from pincer_sweep.sim import SectorMode

STUDY = """
[scenario]
R0 = 1000
r = 100
alpha_deg = 10
VT = 1
multiplier = 1.1

[sweep]
n_min = 2
n_max = 16
n_step = 2
"""


def test_study_config_parses():
    spec = parse_config(STUDY)
    assert spec.scenario.alpha == pytest.approx(math.radians(10))
    assert spec.scenario.multiplier == 1.1
    assert spec.n_values() == list(range(2, 17, 2))
    assert spec.sim is None and spec.formats == {"csv"}


def test_default_multiplier():
    spec = parse_config("[scenario]\nR0=1000\nr=100\nalpha_deg=0\nVT=1\nn=2\n")
    assert spec.scenario.multiplier == 1.1 and spec.scenario.Vs is None


def test_absolute_speed():
    spec = parse_config("[scenario]\nR0=1000\nr=100\nalpha_deg=0\nVT=1\nn=2\nVs=20\n")
    assert spec.scenario.Vs == 20.0 and spec.scenario.multiplier is None


def test_odd_n_in_range():
    with pytest.raises(ValidationError):
        parse_config(STUDY.replace("n_min = 2", "n_min = 3"))
    with pytest.raises(ValidationError):
        parse_config(STUDY.replace("n_step = 2", "n_step = 3"))


def test_odd_single_n():
    with pytest.raises(ValidationError) as err:
        parse_config("[scenario]\nR0=1000\nr=100\nalpha_deg=0\nVT=1\nn=3\n")
    assert err.value.field == "n"


def test_missing_field_named():
    with pytest.raises(ParseError) as err:
        parse_config(STUDY.replace("R0 = 1000\n", ""))
    assert err.value.field == "R0"


def test_syntax_error_has_line():
    with pytest.raises(ParseError) as err:
        parse_config("[scenario]\nR0 = 1000\nr = = 100\n")
    assert err.value.line == 3


def test_radian_key_rejected():
    with pytest.raises(ParseError) as err:
        parse_config(STUDY.replace("alpha_deg", "alpha"))
    assert err.value.field == "alpha" and "_deg" in str(err.value)
    assert err.value.line == 5


def test_bad_scenario_values():
    with pytest.raises(ValidationError):
        parse_config(STUDY.replace("r = 100", "r = -1"))
    with pytest.raises(ValidationError):
        parse_config(STUDY.replace("alpha_deg = 10", "alpha_deg = 95"))
    with pytest.raises(ParseError):
        parse_config(STUDY.replace("VT = 1", 'VT = "fast"'))


def test_sim_and_output_sections():
    spec = parse_config(STUDY + """
[sim]
grid_cells = 300
frame_interval = 50
clear_during_dash = true
sector_mode = "analytic"

[output]
dir = "results"
formats = ["json", "frames"]
""")
    assert spec.sim.grid_cells == 300 and spec.sim.frame_interval == 50.0
    assert spec.sim.clear_during_dash and spec.sim.sector_mode is SectorMode.ANALYTIC
    assert spec.output_dir == "results" and spec.formats == {"json", "frames"}
    with pytest.raises(ValidationError):
        parse_config(STUDY + '[output]\nformats = ["xml"]\n')


@pytest.fixture(scope="module")
def study_rows():
    rows, code = run_table(parse_config(STUDY))
    assert code == 0
    return rows


def test_table_rows(study_rows):
    assert [r.n for r in study_rows] == list(range(2, 17, 2))
    assert all(r.sim_verdict is None and r.sim_clear_time is None for r in study_rows)


def test_csv_header_and_determinism(study_rows):
    text = rows_to_csv(study_rows)
    assert text.splitlines()[0] == ",".join(COLUMNS)
    assert COLUMNS == ["n", "v_lb", "v_simplified", "v_critical", "N_n", "R_N", "eta",
                       "T_tilde_spiral", "T_tilde_in", "T_last", "T_l", "T_in_last",
                       "T_in_f", "T_spiral_total", "T_in_total", "T_total",
                       "sim_clear_time", "sim_verdict"]
    again, _ = run_table(parse_config(STUDY))
    assert rows_to_csv(again) == text


def test_twelve_significant_digits(study_rows):
    first = rows_to_csv(study_rows).splitlines()[1].split(",")
    assert first[1] == "15.7079632679"
    for cell in first[1:16]:
        digits = cell.replace(".", "").replace("-", "").split("e")[0].lstrip("0")
        assert len(digits) <= 12


def test_json_and_csv_round_trip(study_rows):
    assert rows_from_json(rows_to_json(study_rows)) == study_rows
    assert rows_from_csv(rows_to_csv(study_rows)) == study_rows


def test_infeasible_row_annotated():
    rows, code = run_table(parse_config(STUDY.replace("multiplier = 1.1", "multiplier = 0.9")))
    assert code == 2
    assert all(r.sim_verdict == INFEASIBLE and r.T_total is None for r in rows)
    assert rows[0].v_critical == pytest.approx(16.0165222665)


@settings(max_examples=40)
@given(st.floats(1e-6, 1e6, allow_nan=False), st.integers(2, 40))
def test_row_rounding_is_idempotent(x, n):
    row = ResultRow(n=n, v_lb=x, v_simplified=x / 3, v_critical=x * 1.1, T_total=x * 7)
    assert ResultRow(**{c: getattr(row, c) for c in COLUMNS}) == row
    assert rows_from_json(rows_to_json([row])) == [row]
