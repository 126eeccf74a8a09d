import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from specframe.extension import MaskFamily
from specframe.fiber import uniform_grid
from specframe.signals import bspline, haar_wavelet

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

R2 = np.sqrt(2.0)
HAAR_TAPS = ([0.5, 0.5], [[0.5, -0.5]])
FRAMELET_TAPS = ([0.25, 0.5, 0.25], [[R2 / 4, 0.0, -R2 / 4], [-0.25, 0.5, -0.25]])


def haar_family(n=1024, normalization="unit"):
    ref, wl = HAAR_TAPS
    fam = MaskFamily.from_taps(ref, wl, uniform_grid(n), "unit", phi=bspline(1))
    return fam.to(normalization)


def framelet_family(n=1024):
    ref, wl = FRAMELET_TAPS
    return MaskFamily.from_taps(ref, wl, uniform_grid(n), "unit", phi=bspline(2))


@pytest.fixture(scope="session")
def haar_fam():
    return haar_family()


@pytest.fixture(scope="session")
def framelet_fam():
    return framelet_family()


@pytest.fixture(scope="session")
def haar():
    return haar_wavelet()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    RESULTS = mod.RESULTS
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        for line in RESULTS[n]:
            terminalreporter.write_line(line)
