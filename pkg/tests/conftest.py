"""Shared fixtures. Warms the jitted neighbour kernel once per session so
compile time never lands inside a timed test."""

import datetime as dt

import numpy as np
import pytest

# one line per acceptance criterion, echoed verbatim at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)

from aotspot import (
    GaussianMixtureSpec,
    GaussianMode,
    GridGeometry,
    GsoParams,
    ScalarGrid,
    render_mixture,
    run,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 8, 8)
    spec = GaussianMixtureSpec(modes=(GaussianMode(0.5, 0.5, 1.0, 0.2),))
    grid = render_mixture(spec, geom, dt.date(2000, 1, 1))
    run(grid, GsoParams(iterations=2, seed=0))


@pytest.fixture
def unit_geometry():
    return GridGeometry(74.0, 75.0, 31.0, 32.0, 60, 60)


def make_grid(values, lon_min=0.0, lon_max=1.0, lat_min=0.0, lat_max=1.0,
              date=dt.date(2017, 1, 1)):
    """Build a ScalarGrid from a nested list; None marks a missing cell."""
    arr = np.array([[np.nan if v is None else float(v) for v in row]
                    for row in values], dtype=np.float64)
    mask = ~np.isnan(arr)
    return ScalarGrid(lon_min, lon_max, lat_min, lat_max,
                      arr.shape[1], arr.shape[0],
                      np.where(mask, arr, 0.0), mask, date)
