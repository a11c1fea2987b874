import math

import pytest

from pincer_sweep.scenario import ScenarioParams

# region radius, sensor half-length and evader speed of the team-size study
R0, R, VT = 1000.0, 100.0, 1.0


def make_params(n=4, alpha_deg=10.0, multiplier=1.1, Vs=None, R0=R0, r=R, VT=VT):
    if Vs is not None:
        multiplier = None
    return ScenarioParams(n=n, R0=R0, r=r, alpha=math.radians(alpha_deg), VT=VT,
                          Vs=Vs, multiplier=multiplier)


@pytest.fixture
def study_params():
    return make_params()
