import datetime as dt

import numpy as np
import pytest

from thermolag.data import DailySeries, StratumKey
from thermolag.simulate import SimSpec, Truth, generate


def make_series(temps, start="2006-01-01", counts=None, rh=None, pm10=None, holiday=None):
    temps = np.asarray(temps, dtype=float)
    n = temps.size
    start = np.datetime64(start, "D")
    dates = np.arange(start, start + n, dtype="datetime64[D]")
    if counts is None:
        counts = np.full(n, 5, dtype=np.int64)
    return DailySeries(
        dates=dates,
        temp_mean=temps,
        rh=np.full(n, 80.0) if rh is None else np.asarray(rh, float),
        pm10=np.full(n, 30.0) if pm10 is None else np.asarray(pm10, float),
        holiday=np.zeros(n, bool) if holiday is None else np.asarray(holiday, bool),
        deaths={StratumKey("CVD"): np.asarray(counts, dtype=np.int64)},
    )


@pytest.fixture(scope="session")
def sim_series():
    """Ten-year synthetic series, two strata, no injected effect."""
    return generate(SimSpec(seed=11, truth=Truth(strata={"CVD_all": 41.3, "RESP_all": 17.7})))


@pytest.fixture(scope="session")
def short_series():
    return generate(SimSpec(years=2, seed=5))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
