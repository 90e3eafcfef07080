"""Shared fixtures; expensive states and trajectory runs are built once per session."""
from __future__ import annotations

import warnings

import numpy as np
import pytest

from superband import bohmian
from superband.grid import make_grid
from superband.synthesis import SynthesisParams, state_spectrum

#: (criterion number, title, passed, detail) appended by tests/test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def spectra(grid):
    """Exact-normalized ``t = 0`` spectra for the three standard alphas."""
    return {a: state_spectrum(SynthesisParams(alpha=a), grid) for a in (0.0, 1.0, 1.8)}


@pytest.fixture(scope="session")
def long_bohm_runs(grid):
    """10^4 Born-sampled trajectories to t = 50 for alpha in {0, 1}."""
    runs = {}
    times = np.array([0.0, 1.0, 3.0, 5.0, 45.0, 50.0])
    for alpha in (0.0, 1.0):
        p = SynthesisParams(alpha=alpha)
        x0 = bohmian.sample_initial_positions(p, 10_000, "born_sampled", seed=7, grid=grid)
        runs[alpha] = bohmian.integrate_trajectories(p, x0, 50.0, times=times,
                                                     initial_mode="born_sampled", seed=7)
    return runs


@pytest.fixture(scope="session")
def long_histograms(long_bohm_runs):
    out = {}
    for alpha, ts in long_bohm_runs.items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out[alpha] = bohmian.asymptotic_velocities(ts)
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail}")
