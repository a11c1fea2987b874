"""Speed benchmarks and the spiral trajectory that tracks the wavefront.

All functions are pure.  ``VT == 0`` (stationary evaders) is handled through
the analytic limits of the expressions that divide by ``VT``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleScenario, InfeasibleSpeed, NoConvergence
from .geometry import gamma_offset, phi_heading
from .scenario import ScenarioParams

__all__ = [
    "ScenarioParams", "SpeedBenchmarks", "DerivedConstants",
    "lower_bound_speed", "lambda_factor", "simplified_critical_speed",
    "confinement_residual", "critical_speed", "resolve_speed",
    "derived_constants", "spiral_theta", "spiral_radius", "spiral_time",
]

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
# exp() overflows a double a little above 709
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class SpeedBenchmarks:
    v_lb: float
    v_simplified: float
    v_critical: float
    residual: float
    iterations: int = 0
    method: str = "newton"


@dataclass(frozen=True)
class DerivedConstants:
    """Per-scenario constants at a resolved sweeper speed ``Vs``.

    ``c1``, ``c2`` drive the reduced-radius recursion
    ``R~[i+1] = c2 * R~[i] + c1`` and ``c3`` the spiral-time recursion
    ``T[i+1] = c2 * T[i] + c3``.
    """

    gamma: float
    phi: float
    lam: float
    c1: float
    c2: float
    c3: float
    Vs: float
    sweep_angle: float

    @property
    def lam_minus_1(self) -> float:
        return self.lam - 1.0


def _check_speeds(Vs, VT):
    if VT < 0:
        raise DomainError("VT must be non-negative")
    if not Vs > VT:
        raise InfeasibleSpeed(f"sweeper speed {Vs:g} must exceed evader speed {VT:g}",
                              speed=Vs)


def _exponent(sweep_angle, Vs, VT):
    return sweep_angle * VT / math.sqrt(Vs * Vs - VT * VT)


def _expm1_safe(x):
    return math.inf if x > _EXP_LIMIT else math.expm1(x)


def lower_bound_speed(n: int, R0: float, r: float, VT: float) -> float:
    """Protocol-independent lower bound ``pi * R0 * VT / (n * r)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not r > 0:
        raise DomainError("r must be positive")
    return math.pi * R0 * VT / (n * r)


def lambda_factor(n: int, gamma: float, Vs: float, VT: float) -> float:
    """Growth factor of the sensor-centre radius over one sector sweep."""
    _check_speeds(Vs, VT)
    sweep = 2.0 * math.pi / n - gamma
    if sweep < 0:
        raise DomainError(f"sweep angle 2*pi/n - gamma = {sweep:g} is negative")
    x = _exponent(sweep, Vs, VT)
    return math.inf if x > _EXP_LIMIT else math.exp(x)


def spiral_time(R_tilde: float, sweep_angle: float, Vs: float, VT: float) -> float:
    """Time to spiral through ``sweep_angle`` from sensor-centre radius ``R_tilde``.

    Equals ``R_tilde * (lambda - 1) / VT``; for ``VT == 0`` the limit
    ``R_tilde * sweep_angle / Vs`` (a circular arc) is returned.
    """
    _check_speeds(Vs, VT)
    if VT == 0:
        return R_tilde * sweep_angle / Vs
    return R_tilde * _expm1_safe(_exponent(sweep_angle, Vs, VT)) / VT


def simplified_critical_speed(n: int, R0: float, r: float, gamma: float, VT: float) -> float:
    """Speed at which one sweep grows the sensor-centre radius from
    ``R0 - r`` to exactly ``R0 + r`` (inward-dash expansion ignored)."""
    if not R0 > r:
        raise DomainError("R0 must exceed r")
    sweep = 2.0 * math.pi / n - gamma
    log_ratio = math.log((R0 + r) / (R0 - r))
    return VT * math.sqrt(sweep * sweep / (log_ratio * log_ratio) + 1.0)


def confinement_residual(v: float, n: int, R0: float, r: float, gamma: float,
                         VT: float) -> float:
    """``(R0 - r)(lambda(v) - 1) - 2 r v / (v + VT)``, decreasing in ``v``.

    Positive below the critical speed, negative above it.
    """
    if not v > VT:
        return math.inf
    sweep = 2.0 * math.pi / n - gamma
    return (R0 - r) * _expm1_safe(_exponent(sweep, v, VT)) - 2.0 * r * v / (v + VT)


def _residual_slope(v, n, R0, r, gamma, VT):
    sweep = 2.0 * math.pi / n - gamma
    s = v * v - VT * VT
    x = sweep * VT / math.sqrt(s)
    lam = math.inf if x > _EXP_LIMIT else math.exp(x)
    return -(R0 - r) * lam * sweep * VT * v / s ** 1.5 - 2.0 * r * VT / (v + VT) ** 2


def _bisect_critical(n, R0, r, gamma, VT, tol=NEWTON_TOL):
    g = lambda v: confinement_residual(v, n, R0, r, gamma, VT)  # noqa: E731
    lo = VT * (1.0 + 1e-9)
    hi = max(2.0 * VT, lower_bound_speed(n, R0, r, VT), lo * 2.0)
    for _ in range(200):
        if g(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise InfeasibleScenario("no sign change of the confinement residual found")
    iters = 0
    while iters < 400:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        iters += 1
        if abs(gm) / (2.0 * r) < tol or hi - lo <= 4 * math.ulp(mid):
            return mid, iters
        if gm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), iters


def _newton_critical(v0, n, R0, r, gamma, VT, max_iter=NEWTON_MAX_ITER, tol=NEWTON_TOL):
    v = v0
    for it in range(1, max_iter + 1):
        g = confinement_residual(v, n, R0, r, gamma, VT)
        if abs(g) / (2.0 * r) < tol:
            return v, it
        dg = _residual_slope(v, n, R0, r, gamma, VT)
        if not (math.isfinite(g) and math.isfinite(dg)) or dg == 0:
            break
        v_next = v - g / dg
        if not (math.isfinite(v_next) and v_next > VT):
            break
        v = v_next
    raise NoConvergence(f"Newton iteration stalled near v={v:g}")


def critical_speed(params: ScenarioParams) -> SpeedBenchmarks:
    """Exact critical speed of the spiral pincer protocol.

    Solves ``(R0 - r)(lambda(v) - 1) = 2 r v / (v + VT)`` by Newton-Raphson
    started from the simplified critical speed, falling back to bisection if
    Newton misbehaves.  For ``VT == 0`` every benchmark is zero.
    """
    n, R0, r, VT = params.n, params.R0, params.r, params.VT
    gamma = gamma_offset(R0, r, params.alpha)
    v_lb = lower_bound_speed(n, R0, r, VT)
    if VT == 0:
        return SpeedBenchmarks(0.0, 0.0, 0.0, 0.0, 0, "limit")
    if not 2.0 * math.pi / n - gamma > 0:
        raise InfeasibleScenario(
            f"sector angle 2*pi/n - gamma <= 0 for n={n}; the pincer sweep is undefined")
    v_simp = simplified_critical_speed(n, R0, r, gamma, VT)
    try:
        v, iters = _newton_critical(v_simp, n, R0, r, gamma, VT)
        method = "newton"
    except NoConvergence:
        v, iters = _bisect_critical(n, R0, r, gamma, VT)
        method = "bisection"
    residual = abs(confinement_residual(v, n, R0, r, gamma, VT)) / (2.0 * r)
    return SpeedBenchmarks(v_lb, v_simp, v, residual, iters, method)


def resolve_speed(params: ScenarioParams) -> float:
    """Absolute sweeper speed: ``Vs`` if given, else multiplier * v_critical."""
    if params.Vs is not None:
        return float(params.Vs)
    if params.VT == 0:
        raise DomainError("a speed multiplier is meaningless when VT == 0 "
                          "(critical speed is zero); give Vs instead")
    return params.multiplier * critical_speed(params).v_critical


def derived_constants(params: ScenarioParams, Vs: float | None = None) -> DerivedConstants:
    Vs = resolve_speed(params) if Vs is None else Vs
    VT, r = params.VT, params.r
    _check_speeds(Vs, VT)
    gamma = gamma_offset(params.R0, r, params.alpha)
    sweep = 2.0 * math.pi / params.n - gamma
    if sweep < 0:
        raise InfeasibleScenario(f"sector angle 2*pi/n - gamma = {sweep:g} is negative")
    phi = phi_heading(Vs, VT)
    lam = lambda_factor(params.n, gamma, Vs, VT)
    c1 = -2.0 * r * Vs / (Vs + VT)
    c2 = (VT + Vs * lam) / (Vs + VT)
    # c3 = c1 * (lambda - 1) / VT, written through spiral_time for the VT -> 0 limit
    c3 = c1 * spiral_time(1.0, sweep, Vs, VT)
    return DerivedConstants(gamma, phi, lam, c1, c2, c3, Vs, sweep)


def spiral_theta(t: float, Ri: float, r: float, Vs: float, VT: float) -> float:
    """Polar angle swept after time ``t`` on a spiral started at region radius ``Ri``."""
    _check_speeds(Vs, VT)
    if t < 0:
        raise DomainError("t must be non-negative")
    if not Ri > r:
        raise DomainError("Ri must exceed r")
    rt = Ri - r
    if VT == 0:
        return Vs * t / rt
    return math.sqrt(Vs * Vs - VT * VT) / VT * math.log1p(VT * t / rt)


def spiral_radius(theta: float, Ri: float, r: float, Vs: float, VT: float) -> float:
    """Sensor-centre distance from the region centre after sweeping ``theta``."""
    _check_speeds(Vs, VT)
    if theta < 0:
        raise DomainError("theta must be non-negative")
    return (Ri - r) * math.exp(_exponent(theta, Vs, VT))
