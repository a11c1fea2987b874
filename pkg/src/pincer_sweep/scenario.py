"""Problem instance for a pincer sweep: region, team and speeds."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import OddTeamSize, ValidationError


@dataclass(frozen=True)
class ScenarioParams:
    """A circular evader region searched by ``n`` fan-sensor sweepers.

    Exactly one of ``Vs`` (absolute sweeper speed) or ``multiplier`` (factor
    over the exact critical speed) must be set.  Angles are radians.
    """

    n: int
    R0: float
    r: float
    alpha: float
    VT: float
    Vs: Optional[float] = None
    multiplier: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValidationError(f"n must be an integer, got {self.n!r}", "n")
        if self.n < 2 or self.n % 2:
            raise OddTeamSize(f"team size must be even and >= 2, got n={self.n}")
        for name in ("R0", "r", "alpha", "VT"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite", name)
        if not self.r > 0:
            raise ValidationError("r must be positive", "r")
        if not self.R0 > self.r:
            raise ValidationError("R0 must exceed r", "R0")
        if not 0 <= self.alpha < math.pi / 2:
            raise ValidationError("alpha must lie in [0, pi/2)", "alpha")
        if self.VT < 0:
            raise ValidationError("VT must be non-negative", "VT")
        if (self.Vs is None) == (self.multiplier is None):
            raise ValidationError("give exactly one of Vs or multiplier", "Vs")
        if self.Vs is not None and not self.Vs > 0:
            raise ValidationError("Vs must be positive", "Vs")
        if self.multiplier is not None and not self.multiplier > 0:
            raise ValidationError("multiplier must be positive", "multiplier")

    def with_speed(self, Vs: float) -> "ScenarioParams":
        return replace(self, Vs=Vs, multiplier=None)

    def with_multiplier(self, multiplier: float) -> "ScenarioParams":
        return replace(self, Vs=None, multiplier=multiplier)

    def with_n(self, n: int) -> "ScenarioParams":
        return replace(self, n=n)

    @property
    def sector_angle(self) -> float:
        """Full angular share 2*pi/n of one sweeper (before the offset)."""
        return 2.0 * math.pi / self.n
