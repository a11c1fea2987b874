"""Multi-cycle sweep schedule and total guaranteed-detection time.

The schedule is built by iterating the per-cycle recursion; the closed forms
for the sweep count, final radius and summed times are evaluated alongside
and compared against it.  Direct summation is authoritative for times.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .analytics import (
    DerivedConstants,
    SpeedBenchmarks,
    critical_speed,
    derived_constants,
    resolve_speed,
    spiral_time,
)
from .errors import DomainError, InfeasibleSpeed
from .geometry import gamma_offset
from .scenario import ScenarioParams

# relative slack when comparing against the exact critical speed / bounds
FEASIBILITY_RTOL = 1e-9
CONSISTENCY_RTOL = 1e-9


class ScheduleConsistencyError(RuntimeError):
    """Closed form and recursion disagree beyond tolerance."""


@dataclass(frozen=True)
class CycleRecord:
    i: int
    R_i: float
    R_tilde_i: float
    T_spiral_i: float
    delta_i: float
    delta_eff_i: float
    T_in_i: float
    R_next: float
    gamma_i: float = math.nan  # placement offset re-evaluated at R_i (diagnostic)


@dataclass(frozen=True)
class ClosedFormTimes:
    """Summed cycle times plus the closed-form evaluations they are checked against."""

    T_tilde_in: float
    T_tilde_spiral: float
    T_in_eq26_verbatim: float
    T_in_eq26_normalized: float
    T_spiral_recurrence: float
    T_spiral_expanded: float

    def deviation(self, name: str) -> float:
        ref = self.T_tilde_in if name.startswith("T_in") else self.T_tilde_spiral
        val = getattr(self, name)
        if ref == 0:
            return abs(val)
        return abs(val - ref) / abs(ref)

    def deviations(self) -> dict:
        return {k: self.deviation(k) for k in (
            "T_in_eq26_verbatim", "T_in_eq26_normalized",
            "T_spiral_recurrence", "T_spiral_expanded")}


@dataclass(frozen=True)
class EndGame:
    eta: int
    T_last: float
    T_in_last: float
    T_l: float
    T_in_f: float
    epsilon: float
    epsilon_c: float
    eta_from_epsilon: int
    slack: float  # 2r - (VT*T_last + VT*T_in_last + R_N)

    @property
    def classifications_agree(self) -> bool:
        return self.eta == self.eta_from_epsilon


@dataclass(frozen=True)
class SweepSchedule:
    params: ScenarioParams
    benchmarks: SpeedBenchmarks
    constants: DerivedConstants
    cycles: List[CycleRecord]
    N_n: int
    R_hat_N: float
    R_N: float
    R_N_closed_form: float
    T_tilde_in: float
    T_tilde_spiral: float
    closed_forms: ClosedFormTimes
    end: EndGame
    T_in_total: float
    T_spiral_total: float
    T_total: float
    degenerate: bool = False
    diagnostics: List[str] = field(default_factory=list)

    # flat accessors for the end-game fields
    @property
    def eta(self) -> int:
        return self.end.eta

    @property
    def T_last(self) -> float:
        return self.end.T_last

    @property
    def T_in_last(self) -> float:
        return self.end.T_in_last

    @property
    def T_l(self) -> float:
        return self.end.T_l

    @property
    def T_in_f(self) -> float:
        return self.end.T_in_f

    @property
    def Vs(self) -> float:
        return self.constants.Vs

    def to_dict(self) -> dict:
        """Plain-data record layout (see README, "Schedule record")."""
        out = {
            "params": asdict(self.params),
            "benchmarks": asdict(self.benchmarks),
            "constants": asdict(self.constants),
            "N_n": self.N_n,
            "R_hat_N": self.R_hat_N,
            "R_N": self.R_N,
            "R_N_closed_form": self.R_N_closed_form,
            "T_tilde_in": self.T_tilde_in,
            "T_tilde_spiral": self.T_tilde_spiral,
            "closed_forms": asdict(self.closed_forms),
            "closed_form_deviations": self.closed_forms.deviations(),
            "end_game": asdict(self.end),
            "T_in_total": self.T_in_total,
            "T_spiral_total": self.T_spiral_total,
            "T_total": self.T_total,
            "degenerate": self.degenerate,
            "diagnostics": list(self.diagnostics),
            "cycles": [asdict(c) for c in self.cycles],
        }
        return out


def _gamma_or_nan(R, r, alpha):
    try:
        return gamma_offset(R, r, alpha)
    except DomainError:
        return math.nan


def cycle_step(R_i: float, constants: DerivedConstants, params: ScenarioParams,
               i: int = 0) -> CycleRecord:
    """One spiral sweep at region radius ``R_i`` followed by the inward dash.

    Raises InfeasibleSpeed when the spread during the sweep leaves no room to
    meet the wavefront on the way in, i.e. when
    ``VT * T_spiral > 2 r Vs / (Vs + VT)``.
    """
    r, VT, Vs = params.r, params.VT, constants.Vs
    if not R_i > r:
        raise DomainError(f"R_i={R_i:g} must exceed r={r:g}")
    R_tilde = R_i - r
    T_spiral = spiral_time(R_tilde, constants.sweep_angle, Vs, VT)
    spread = VT * T_spiral
    budget = 2.0 * r * Vs / (Vs + VT)
    if spread > budget * (1.0 + FEASIBILITY_RTOL):
        raise InfeasibleSpeed(
            f"cycle {i}: wavefront spread {spread:.6g} exceeds the dash budget "
            f"{budget:.6g}; sweeper speed {Vs:.6g} is below critical", speed=Vs)
    delta = 2.0 * r - spread
    delta_eff = delta * Vs / (Vs + VT)
    return CycleRecord(
        i=i, R_i=R_i, R_tilde_i=R_tilde, T_spiral_i=T_spiral, delta_i=delta,
        delta_eff_i=delta_eff, T_in_i=delta_eff / Vs, R_next=R_i - delta_eff,
        gamma_i=_gamma_or_nan(R_i, r, params.alpha))


def num_sweeps(params: ScenarioParams, constants: DerivedConstants) -> int:
    """Number of spiral sweeps needed to shrink the region to radius <= 2r."""
    R0, r, VT = params.R0, params.r, params.VT
    if R0 <= 2.0 * r:
        return 1
    lam = constants.lam
    if VT == 0:
        return max(1, math.ceil((R0 - 2.0 * r) / (2.0 * r) - 1e-12))
    if not lam > 1.0:
        raise InfeasibleSpeed("lambda must exceed 1", speed=constants.Vs)
    num = r * (3.0 - lam)
    den = R0 * (1.0 - lam) + r * (1.0 + lam)
    if not (num > 0 and den > 0):
        raise InfeasibleSpeed(
            "region cannot shrink below 2r at this speed (sweep-count logarithm undefined)",
            speed=constants.Vs)
    return max(1, math.ceil(math.log(num / den) / math.log(constants.c2)))


def reduced_final_radius(params: ScenarioParams, constants: DerivedConstants, N_n: int) -> float:
    """Closed-form solution of the reduced-radius recursion after ``N_n`` steps.

    This is ``R~[N] = R[N] - r``; the region radius itself is returned by
    :func:`final_radius`.
    """
    R0, r, lam = params.R0, params.r, constants.lam
    if params.VT == 0:
        return R0 - r - 2.0 * r * N_n
    return (-2.0 * r / (1.0 - lam)
            + constants.c2 ** N_n * (R0 * (1.0 - lam) + r * (1.0 + lam)) / (1.0 - lam))


def final_radius(params: ScenarioParams, constants: DerivedConstants, N_n: int) -> float:
    """Radius of the circle bounding the evader region after ``N_n`` sweeps."""
    if params.R0 <= 2.0 * params.r:
        return min(params.R0, 2.0 * params.r)
    return reduced_final_radius(params, constants, N_n) + params.r


def run_cycles(params: ScenarioParams, constants: DerivedConstants, N_n: int) -> List[CycleRecord]:
    cycles = []
    R = params.R0
    for i in range(N_n):
        rec = cycle_step(R, constants, params, i)
        cycles.append(rec)
        R = rec.R_next
    return cycles


def closed_form_times(params: ScenarioParams, constants: DerivedConstants, N_n: int,
                      cycles: Optional[List[CycleRecord]] = None) -> ClosedFormTimes:
    """Summed inward and spiral times before the end-game, with closed forms.

    ``T_in_eq26_verbatim`` raises ``(VT + Vs*lambda)`` to ``N_n - 1`` with a
    single ``(Vs + VT)`` in the denominator, as printed; the normalized
    variant uses ``c2 ** (N_n - 1)``.  Only the summations are authoritative.
    """
    if cycles is None:
        cycles = run_cycles(params, constants, N_n)
    T_in = math.fsum(c.T_in_i for c in cycles[: max(N_n - 1, 0)])
    T_sp = math.fsum(c.T_spiral_i for c in cycles[:N_n])

    R0, r, VT = params.R0, params.r, params.VT
    Vs, lam, c2, c3 = constants.Vs, constants.lam, constants.c2, constants.c3
    if VT == 0 or lam == 1.0:
        nan = math.nan
        return ClosedFormTimes(T_in, T_sp, nan, nan, nan, nan)

    tail = R0 * (1.0 - lam) + r * (1.0 + lam)
    head = (2.0 * r / (Vs + VT) + (R0 - r) / Vs
            + 2.0 * r * (VT + Vs * lam) / (Vs * (Vs + VT) * (1.0 - lam)))
    verbatim = head - (VT + Vs * lam) ** (N_n - 1) / (Vs * (Vs + VT) * (1.0 - lam)) * tail
    normalized = head - (c2 ** (N_n - 1) * (Vs + VT)) / (Vs * (Vs + VT) * (1.0 - lam)) * tail

    T0 = cycles[0].T_spiral_i
    T_last_cycle = cycles[N_n - 1].T_spiral_i
    recurrence = (T0 - c2 * T_last_cycle + (N_n - 1) * c3) / (1.0 - c2)
    expanded = ((r - R0) * (Vs + VT) / (VT * Vs)
                - 2.0 * r * (VT + Vs * lam) / (VT * Vs * (1.0 - lam))
                + 2.0 * r * (N_n - 1) / VT
                - c2 ** N_n * ((Vs + VT) * (R0 * (lam - 1.0) - r * (lam + 1.0))
                               / (VT * Vs * (1.0 - lam))))
    return ClosedFormTimes(T_in, T_sp, verbatim, normalized, recurrence, expanded)


def end_game(params: ScenarioParams, constants: DerivedConstants, R_N: float) -> EndGame:
    """Final inward placement, circular sweep and (if needed) one extra spiral.

    The branch indicator ``eta`` comes from the direct inequality
    ``2r >= VT*T_last + VT*T_in_last + R_N``; the epsilon / epsilon_c
    classification is reported alongside for comparison only.
    """
    n, r, VT, alpha = params.n, params.r, params.VT, params.alpha
    Vs = constants.Vs
    if not 0 < R_N <= 2.0 * r * (1.0 + CONSISTENCY_RTOL):
        raise DomainError(f"R_N={R_N:g} must lie in (0, 2r]")
    arc = max(2.0 * math.pi / n - 2.0 * alpha, 0.0)
    T_last = arc * r / Vs
    T_in_last = R_N / Vs
    slack = 2.0 * r - (VT * T_last + VT * T_in_last + R_N)
    eta = 0 if slack >= 0 else 1
    T_l = spiral_time(r, constants.sweep_angle, Vs, VT)
    T_in_f = T_l * VT / Vs
    eps = (2.0 * r - R_N) / r
    eps_c = 2.0 * VT * (math.pi - n * (alpha - 1.0)) / (n * (VT + Vs))
    eta_eps = 0 if eps >= eps_c else 1
    return EndGame(eta, T_last, T_in_last, T_l, T_in_f, eps, eps_c, eta_eps, slack)


def build_schedule(params: ScenarioParams) -> SweepSchedule:
    """Full schedule and total detection time for a feasible scenario."""
    bench = critical_speed(params)
    Vs = resolve_speed(params)
    if params.VT > 0 and not Vs > bench.v_critical:
        raise InfeasibleSpeed(
            f"sweeper speed {Vs:.6g} does not exceed the critical speed "
            f"{bench.v_critical:.6g}", v_critical=bench.v_critical, speed=Vs)
    params = params.with_speed(Vs)
    const = derived_constants(params, Vs)
    r = params.r
    diagnostics = []
    degenerate = params.R0 <= 2.0 * r

    N_n = num_sweeps(params, const)
    cycles = run_cycles(params, const, N_n)
    if degenerate:
        R_N = R_N_cf = min(params.R0, 2.0 * r)
    else:
        R_N = cycles[-1].R_next
        R_N_cf = final_radius(params, const, N_n)
        if abs(R_N_cf - R_N) > CONSISTENCY_RTOL * max(abs(R_N), r):
            raise ScheduleConsistencyError(
                f"closed-form R_N={R_N_cf!r} disagrees with recursion {R_N!r}")
        prev = cycles[-1].R_i
        tol = 2.0 * r * CONSISTENCY_RTOL
        if not (R_N <= 2.0 * r + tol and prev > 2.0 * r - tol):
            raise ScheduleConsistencyError(
                f"sweep count {N_n} inconsistent with recursion "
                f"(R[N-1]={prev!r}, R[N]={R_N!r}, 2r={2 * r!r})")
        R_N = min(R_N, 2.0 * r)

    times = closed_form_times(params, const, N_n, cycles)
    for name, dev in times.deviations().items():
        if dev > 1e-6:
            diagnostics.append(f"{name} deviates from summation by {dev:.3e} (relative)")

    end = end_game(params, const, R_N)
    if not end.classifications_agree:
        diagnostics.append(
            f"end-game: direct test gives eta={end.eta}, epsilon test "
            f"(eps={end.epsilon:.6g}, eps_c={end.epsilon_c:.6g}) gives eta={end.eta_from_epsilon}")

    T_spiral_total = times.T_tilde_spiral + end.T_last + end.eta * end.T_l
    T_in_total = times.T_tilde_in + end.T_in_last + end.eta * end.T_in_f
    return SweepSchedule(
        params=params, benchmarks=bench, constants=const, cycles=cycles, N_n=N_n,
        R_hat_N=2.0 * r, R_N=R_N, R_N_closed_form=R_N_cf,
        T_tilde_in=times.T_tilde_in, T_tilde_spiral=times.T_tilde_spiral,
        closed_forms=times, end=end, T_in_total=T_in_total,
        T_spiral_total=T_spiral_total, T_total=T_in_total + T_spiral_total,
        degenerate=degenerate, diagnostics=diagnostics)
