import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pincer_sweep.analytics import critical_speed, derived_constants
from pincer_sweep.errors import InfeasibleSpeed
from pincer_sweep.schedule import (
    build_schedule,
    closed_form_times,
    cycle_step,
    end_game,
    final_radius,
    num_sweeps,
    run_cycles,
)

from conftest import make_params

GRID = [(n, m) for n in (2, 4, 8, 12, 16) for m in (1.05, 1.1, 1.5, 3.0)]


def oracle(p):
    """Plain re-derivation of the cycle recursion from the kinematics."""
    vc = critical_speed(p).v_critical
    Vs = p.multiplier * vc if p.Vs is None else p.Vs
    g = math.acos((2 * p.R0**2 + 2 * p.R0 * p.r * (math.cos(p.alpha) - 2)
                   + p.r**2 * math.cos(p.alpha) * (math.cos(p.alpha) - 2))
                  / (2 * p.R0 * (p.R0 + p.r * math.cos(p.alpha) - 2 * p.r)))
    lam = math.exp((2 * math.pi / p.n - g) * p.VT / math.sqrt(Vs**2 - p.VT**2))
    R, count, T_sp, T_in = p.R0, 0, [], []
    while True:
        t = (R - p.r) * (lam - 1) / p.VT
        d_eff = (2 * p.r - p.VT * t) * Vs / (Vs + p.VT)
        T_sp.append(t)
        T_in.append(d_eff / Vs)
        R -= d_eff
        count += 1
        if R <= 2 * p.r:
            return dict(N=count, R_N=R, T_sp=sum(T_sp), T_in=sum(T_in[:-1]), Vs=Vs, lam=lam)


@pytest.mark.parametrize("n,m", GRID)
def test_schedule_matches_recursion_oracle(n, m):
    p = make_params(n=n, multiplier=m)
    s = build_schedule(p)
    o = oracle(p)
    assert s.N_n == o["N"]
    assert s.R_N == pytest.approx(o["R_N"], rel=1e-9)
    assert s.T_tilde_spiral == pytest.approx(o["T_sp"], rel=1e-9)
    assert s.T_tilde_in == pytest.approx(o["T_in"], rel=1e-9, abs=1e-12)
    assert s.closed_forms.deviation("T_in_eq26_normalized") < 1e-9
    assert s.closed_forms.deviation("T_spiral_recurrence") < 1e-9
    assert s.closed_forms.deviation("T_spiral_expanded") < 1e-9
    assert s.R_N_closed_form == pytest.approx(s.R_N, rel=1e-9)


@pytest.mark.parametrize("n,m", GRID)
def test_totals_are_sums_of_parts(n, m):
    s = build_schedule(make_params(n=n, multiplier=m))
    assert s.T_total == s.T_in_total + s.T_spiral_total
    parts = (sum(c.T_spiral_i for c in s.cycles) + sum(c.T_in_i for c in s.cycles[:-1])
             + s.T_last + s.T_in_last + s.eta * (s.T_l + s.T_in_f))
    assert s.T_total == pytest.approx(parts, rel=1e-9)


def test_verbatim_inward_sum_is_off():
    s = build_schedule(make_params(n=4, multiplier=1.2))
    assert s.closed_forms.deviation("T_in_eq26_verbatim") > 1.0
    assert any("verbatim" in d for d in s.diagnostics)


def test_cycle_invariants(study_params):
    s = build_schedule(study_params)
    prev_drop = 0.0
    for c in s.cycles:
        assert 0 <= c.delta_i <= 2 * study_params.r
        assert c.R_next < c.R_i and c.T_spiral_i > 0
        drop = c.R_i - c.R_next
        assert drop > prev_drop  # shrinkage accelerates
        prev_drop = drop
    assert 0 < s.R_N <= 2 * study_params.r


def test_cycle_step_recursion_form(study_params):
    c = derived_constants(study_params)
    rec = cycle_step(study_params.R0, c, study_params)
    assert rec.R_next - study_params.r == pytest.approx(
        c.c2 * rec.R_tilde_i + c.c1, rel=1e-12)
    assert rec.T_in_i == pytest.approx(
        (2 * study_params.r - rec.R_tilde_i * (c.lam - 1)) / (c.Vs + study_params.VT), rel=1e-12)


def test_cycle_step_at_critical_speed():
    p = make_params(n=4, multiplier=1.0)
    c = derived_constants(p)
    rec = cycle_step(p.R0, c, p)
    VT, Vs, r = p.VT, c.Vs, p.r
    assert rec.delta_i == pytest.approx(2 * r * VT / (Vs + VT), rel=1e-8)


def test_cycle_step_below_critical():
    p = make_params(n=4, multiplier=0.9)
    with pytest.raises(InfeasibleSpeed):
        cycle_step(p.R0, derived_constants(p), p)


def test_build_schedule_gate():
    with pytest.raises(InfeasibleSpeed) as err:
        build_schedule(make_params(n=4, multiplier=0.9))
    assert err.value.v_critical == pytest.approx(8.1724853677526768, rel=1e-12)
    with pytest.raises(InfeasibleSpeed):
        build_schedule(make_params(n=4, multiplier=1.0))


def test_sweep_count_closed_form_vs_iteration():
    p = make_params(n=4, multiplier=1.5)
    c = derived_constants(p)
    N = num_sweeps(p, c)
    R, k = p.R0 - p.r, 0
    while R + p.r > 2 * p.r:
        R = c.c2 * R + c.c1
        k += 1
    assert N == k >= 1


@pytest.mark.parametrize("n", range(2, 17, 2))
def test_final_radius_closed_form(n):
    p = make_params(n=n, multiplier=1.2)
    c = derived_constants(p)
    N = num_sweeps(p, c)
    assert final_radius(p, c, N) == pytest.approx(run_cycles(p, c, N)[-1].R_next, rel=1e-9)


def test_single_sweep_has_no_inward_sum():
    p = make_params(n=4, R0=400.0, multiplier=2.0)
    s = build_schedule(p)
    if s.N_n == 1:
        assert s.T_tilde_in == 0.0
    c = derived_constants(p)
    assert closed_form_times(p, c, 1).T_tilde_in == 0.0


def test_degenerate_small_region():
    p = make_params(n=4, R0=150.0, multiplier=1.5)
    s = build_schedule(p)
    assert s.degenerate and s.N_n == 1 and s.R_N == 150.0


def test_end_game_branches():
    p = make_params(n=4, multiplier=1.2)
    c = derived_constants(p)
    assert end_game(p, c, 2 * p.r).eta == 1
    # stationary evaders never need the extra spiral
    q = make_params(n=4, VT=0.0, Vs=5.0)
    cq = derived_constants(q)
    assert end_game(q, cq, 2 * q.r).eta == 0
    assert build_schedule(q).eta == 0


def test_end_game_epsilon_cross_check():
    s = build_schedule(make_params(n=4, multiplier=1.2))
    e = s.end
    assert e.epsilon == pytest.approx((200.0 - s.R_N) / 100.0)
    assert e.eta == (1 if e.slack < 0 else 0)
    if not e.classifications_agree:
        assert any("end-game" in d for d in s.diagnostics)


def test_frozen_four_sweeper_schedule():
    # 30 degree fans at 1.1x critical: frozen from the recursion oracle
    s = build_schedule(make_params(n=4, alpha_deg=30, multiplier=1.1))
    o = oracle(make_params(n=4, alpha_deg=30, multiplier=1.1))
    assert (s.N_n, s.eta) == (o["N"], 0) == (11, 0)
    assert s.T_total == pytest.approx(1278.448, abs=1e-3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 10.0), st.sampled_from([2, 4, 8]))
def test_length_scaling(scale, n):
    a = build_schedule(make_params(n=n, multiplier=1.3))
    b = build_schedule(make_params(n=n, multiplier=1.3, R0=1000 * scale, r=100 * scale))
    assert b.T_total == pytest.approx(scale * a.T_total, rel=1e-9)
    assert (a.N_n, a.eta) == (b.N_n, b.eta)
    assert b.constants.lam == pytest.approx(a.constants.lam, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 10.0), st.sampled_from([2, 4, 8]))
def test_speed_scaling(scale, n):
    a = build_schedule(make_params(n=n, multiplier=1.3))
    b = build_schedule(make_params(n=n, multiplier=1.3, VT=scale))
    assert b.T_total == pytest.approx(a.T_total / scale, rel=1e-9)
    assert (a.N_n, a.eta) == (b.N_n, b.eta)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_total_time_decreases_with_speed(n):
    times = [build_schedule(make_params(n=n, multiplier=m)).T_total
             for m in (1.05, 1.1, 1.3, 1.6, 2.0, 4.0)]
    assert all(a > b for a, b in zip(times, times[1:]))


def test_to_dict_layout(study_params):
    d = build_schedule(study_params).to_dict()
    assert d["N_n"] == len(d["cycles"])
    assert d["T_total"] == d["T_in_total"] + d["T_spiral_total"]
