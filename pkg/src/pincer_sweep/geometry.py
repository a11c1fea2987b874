"""Fan-sensor footprint, back-to-back pair deployment and placement angles.

Frame conventions: the evader region is centred at the origin, polar angles
are measured counter-clockwise from +x, and the first pair is deployed on the
ray through ``P = (0, R0)``.  A sweeper's sensor central line is radial: its
inner tip sits at ``radial_distance - r`` and its outer tip at
``radial_distance + r`` along the pose's polar angle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import DomainError, InfeasibleSpeed, OddTeamSize
from .scenario import ScenarioParams

TWO_PI = 2.0 * math.pi


class FootprintModel(enum.Enum):
    # Circular sector of radius 2r and half-angle alpha whose apex is the
    # inner tip of the central line, opening outward along the line.
    SECTOR_APEX_INNER = "sector_apex_inner"


class RotationSense(enum.IntEnum):
    CLOCKWISE = -1
    COUNTERCLOCKWISE = 1

    def flipped(self) -> "RotationSense":
        return RotationSense(-int(self))


def normalize_angle(theta: float) -> float:
    """Map ``theta`` into the half-open interval [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if t >= TWO_PI:
        t = 0.0
    return t


@dataclass(frozen=True)
class SensorGeometry:
    r: float
    alpha: float
    footprint_model: FootprintModel = FootprintModel.SECTOR_APEX_INNER

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("sensor half-length r must be positive")
        if not 0 <= self.alpha < math.pi / 2:
            raise DomainError("fan half-angle must lie in [0, pi/2)")


@dataclass(frozen=True)
class SweeperPose:
    """Sensor-centre position in polar form plus the direction of motion."""

    radial_distance: float
    polar_angle: float
    heading: float
    rotation_sense: RotationSense

    def __post_init__(self):
        if self.radial_distance < 0:
            raise DomainError("radial_distance must be non-negative")
        object.__setattr__(self, "polar_angle", normalize_angle(self.polar_angle))
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def xy(self) -> Tuple[float, float]:
        return (self.radial_distance * math.cos(self.polar_angle),
                self.radial_distance * math.sin(self.polar_angle))

    def rotated(self, angle: float) -> "SweeperPose":
        return SweeperPose(self.radial_distance, self.polar_angle + angle,
                           self.heading + angle, self.rotation_sense)


@dataclass(frozen=True)
class Deployment:
    poses: List[SweeperPose]
    sector_half_pairs: List[Tuple[int, int]]
    sector_angle: float
    gamma: float = field(default=0.0)

    @property
    def n(self) -> int:
        return len(self.poses)


def gamma_offset(R0: float, r: float, alpha: float) -> float:
    """Angular offset between a sweeper's sensor centre and the pair's shared
    boundary point, from the law-of-cosines placement triangle."""
    base = R0 + r * math.cos(alpha) - 2.0 * r
    den = 2.0 * R0 * base
    if not den > 0:
        raise DomainError(
            f"placement triangle degenerate: R0 + r*cos(alpha) - 2r = {base:g} <= 0")
    c = math.cos(alpha)
    num = 2.0 * R0 * R0 + 2.0 * R0 * r * (c - 2.0) + r * r * c * (c - 2.0)
    arg = num / den
    if not -1.0 <= arg <= 1.0:
        # within rounding of the domain edge, clamp instead of failing
        if abs(arg) - 1.0 < 1e-14:
            arg = max(-1.0, min(1.0, arg))
        else:
            raise DomainError(
                f"arccos argument {arg:.6g} outside [-1, 1]: sensor too large for region")
    return math.acos(arg)


def law_of_cosines_gamma(R0: float, r: float, alpha: float) -> float:
    """Offset angle solved directly from the placement triangle.

    Differs from :func:`gamma_offset` in the ``r**2`` term of the numerator
    (``cos(alpha) - 4`` instead of ``cos(alpha) - 2``).  Reported alongside
    the closed form; the planner uses :func:`gamma_offset`.
    """
    b = R0 - 2.0 * r + r * math.cos(alpha)
    if not b > 0:
        raise DomainError(f"placement triangle degenerate: R0 + r*cos(alpha) - 2r = {b:g} <= 0")
    arg = (R0 * R0 + b * b - 4.0 * r * r) / (2.0 * R0 * b)
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 < 1e-14:
            arg = max(-1.0, min(1.0, arg))
        else:
            raise DomainError(f"arccos argument {arg:.6g} outside [-1, 1]")
    return math.acos(arg)


def placement_residual(R0: float, r: float, alpha: float, gamma: float) -> float:
    """Relative residual of the law-of-cosines relation at ``gamma``."""
    b = R0 - 2.0 * r + r * math.cos(alpha)
    return abs(4 * r * r - R0 * R0 - b * b + 2 * R0 * b * math.cos(gamma)) / (4 * r * r)


def phi_heading(Vs: float, VT: float) -> float:
    """Heading offset that keeps the outer tip on an expanding wavefront."""
    if VT < 0:
        raise DomainError("VT must be non-negative")
    if not Vs > VT:
        raise InfeasibleSpeed(
            f"sweeper speed {Vs:g} must exceed evader speed {VT:g}", speed=Vs)
    return math.asin(VT / Vs)


def travel_heading(polar_angle: float, sense: RotationSense, phi: float) -> float:
    """Direction of motion: tangential in ``sense``, tilted outward by ``phi``."""
    if sense is RotationSense.COUNTERCLOCKWISE:
        return polar_angle + math.pi / 2 - phi
    return polar_angle - math.pi / 2 + phi


def initial_deployment(params: ScenarioParams, phi: Optional[float] = None) -> Deployment:
    """Back-to-back pairs spaced evenly around the boundary.

    Pair ``k`` sits at polar angle ``pi/2 + 4*pi*k/n``; its even member turns
    counter-clockwise and its odd member clockwise.  ``phi`` defaults to the
    heading offset at the scenario's resolved speed.
    """
    n = params.n
    if n < 2 or n % 2:
        raise OddTeamSize(f"team size must be even and >= 2, got n={n}")
    gamma = gamma_offset(params.R0, params.r, params.alpha)
    if phi is None:
        from .analytics import resolve_speed

        phi = phi_heading(resolve_speed(params), params.VT) if params.VT > 0 else 0.0
    rho = params.R0 - params.r
    poses = []
    pairs = []
    for k in range(n // 2):
        psi = math.pi / 2 + 2.0 * TWO_PI * k / n
        for sense in (RotationSense.COUNTERCLOCKWISE, RotationSense.CLOCKWISE):
            poses.append(SweeperPose(rho, psi, travel_heading(psi, sense, phi), sense))
        pairs.append((2 * k, 2 * k + 1))
    return Deployment(poses, pairs, TWO_PI / n - gamma, gamma)


def footprint_contains(pose: SweeperPose, sensor: SensorGeometry, point) -> bool:
    """True iff ``point`` (x, y) lies in the closed fan footprint of ``pose``."""
    x, y = point
    return bool(footprint_mask(pose, sensor, np.asarray(x, float), np.asarray(y, float)))


def footprint_mask(pose: SweeperPose, sensor: SensorGeometry, x: np.ndarray,
                   y: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vectorised footprint test over coordinate arrays ``x`` and ``y``."""
    if sensor.footprint_model is not FootprintModel.SECTOR_APEX_INNER:
        raise NotImplementedError(sensor.footprint_model)
    ux, uy = math.cos(pose.polar_angle), math.sin(pose.polar_angle)
    apex = pose.radial_distance - sensor.r
    dx = x - apex * ux
    dy = y - apex * uy
    reach = 2.0 * sensor.r
    dist2 = dx * dx + dy * dy
    along = dx * ux + dy * uy
    # angle to the axis <= alpha  <=>  along >= |d| cos(alpha)
    scale = reach * tol
    in_range = dist2 <= (reach + scale) ** 2
    in_wedge = along >= np.sqrt(dist2) * math.cos(sensor.alpha) - scale
    return in_range & in_wedge
