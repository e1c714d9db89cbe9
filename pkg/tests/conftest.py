import math

import numpy as np
import pytest

import skyrme_dyon as sd

ACCEPT_POINTS = [
    (0.55 * math.pi, 0.05, 1.0),
    (0.75 * math.pi, 0.30, 1.0),
    (0.90 * math.pi, 0.05, 1.0),
]
SWEEP_QS = [0.30, 0.20, 0.10, 0.05, 0.02]


@pytest.fixture(scope="session")
def grid60():
    return sd.build_grid(60.0, 2000)


@pytest.fixture(scope="session")
def grid_small():
    return sd.build_grid(30.0, 300)


@pytest.fixture(scope="session")
def solved_points(grid60):
    """Converged dyons at the three production parameter points, N=2000, R=60."""
    out = {}
    for omega, q, kappa in ACCEPT_POINTS:
        p = sd.validate_params(omega, q, kappa)
        profile, report = sd.continuation_solve(p, grid60)
        assert report.converged, report.message
        out[(omega, q, kappa)] = (p, profile, report)
    return out


@pytest.fixture(scope="session")
def solved_kappa0(grid60):
    """Converged sigma-model-limit run (kappa = 0)."""
    p = sd.validate_params(0.75 * math.pi, 0.1, 0.0)
    profile, report = sd.continuation_solve(p, grid60)
    assert report.converged, report.message
    return p, profile, report


@pytest.fixture(scope="session")
def sweep_runs(grid60):
    """Warm-started q-sweep at omega = 0.75 pi used by the charge-trend checks."""
    runs = []
    prev = None
    for q in SWEEP_QS:
        p = sd.validate_params(0.75 * math.pi, q, 1.0)
        if prev is None:
            profile, report = sd.continuation_solve(p, grid60)
        else:
            guess = prev.copy()
            guess.g *= q / q_prev
            guess.g[-1] = q
            profile, report = sd.newton_solve(p, grid60, guess)
        assert report.converged, report.message
        runs.append((p, profile, report))
        prev, q_prev = profile, q
    return runs


@pytest.fixture(scope="session")
def monopole_small(grid_small):
    p = sd.validate_params(0.75 * math.pi, 0.0, 1.0)
    profile, report = sd.newton_solve(p, grid_small, sd.initial_guess(p, grid_small))
    assert report.converged
    return p, profile, report


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
