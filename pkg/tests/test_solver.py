import math

import numpy as np
import pytest

import skyrme_dyon as sd
from skyrme_dyon.errors import ParameterError
from skyrme_dyon.solver import _jacobian_banded, _pack, _residual_vector, _unpack

OMEGA = 0.75 * math.pi


def test_initial_guess_shapes_and_bounds():
    g = sd.build_grid(30.0, 300)
    p = sd.validate_params(OMEGA, 0.3, 1.0)
    s = sd.initial_guess(p, g)
    s.validate(p)
    assert np.all(np.diff(s.f) > 0.0) and np.all(np.diff(s.a) < 0.0)
    assert np.all(s.f[1:-1] > 0.0) and np.all(s.f[1:-1] < p.f_infinity)
    assert np.all(s.g[1:-1] > 0.0) and np.all(s.g[1:-1] < p.q)
    assert np.all(s.a[:-1] > 0.0)
    assert s.f[-1] == p.f_infinity
    p0 = sd.validate_params(OMEGA, 0.0, 1.0)
    assert np.all(sd.initial_guess(p0, g).g == 0.0)


def test_newton_restart_from_solution_converges_immediately(monopole_small):
    p, s, _ = monopole_small
    s2, rep = sd.newton_solve(p, s.grid, s)
    assert rep.converged and rep.iterations <= 2
    assert rep.final_residual_norm <= 1e-10


def test_newton_monopole_keeps_g_identically_zero(monopole_small):
    p, s, rep = monopole_small
    assert rep.converged and p.q == 0.0
    assert np.all(s.g == 0.0)


def test_newton_report_contract(monopole_small):
    _, _, rep = monopole_small
    assert rep.path == "newton"
    assert rep.converged and rep.final_residual_norm <= 1e-10
    assert rep.action is not None and np.isfinite(rep.action.E)
    assert rep.properties_ok


def test_newton_failure_is_reported_not_raised():
    g = sd.build_grid(30.0, 300)
    p = sd.validate_params(OMEGA, 0.3, 1.0)
    cfg = sd.SolveConfig(max_newton_iters=1)
    _, rep = sd.newton_solve(p, g, sd.initial_guess(p, g), cfg)
    assert not rep.converged
    assert rep.final_residual_norm > cfg.tol_residual


def test_jacobian_matches_finite_differences(rng):
    g = sd.build_grid(40.0, 400)
    p = sd.validate_params(OMEGA, 0.2, 1.0)
    prof = sd.initial_guess(p, g)
    prof.a[1:-1] *= 1.0 + 0.05 * rng.standard_normal(g.N - 1)
    prof.f[1:-1] += 0.05 * rng.standard_normal(g.N - 1)
    prof.g[1:-1] += 0.01 * rng.standard_normal(g.N - 1)
    x = _pack(prof)
    ab = _jacobian_banded(p, prof)
    n = x.size
    worst = 0.0
    for j in rng.choice(n, 90, replace=False):
        h = 1e-6 * (1.0 + abs(x[j]))
        xp = x.copy()
        xp[j] += h
        xm = x.copy()
        xm[j] -= h
        rp, _ = _residual_vector(p, _unpack(xp, p, g))
        rm, _ = _residual_vector(p, _unpack(xm, p, g))
        fd = (rp - rm) / (2.0 * h)
        col = np.zeros(n)
        for i in range(max(0, j - 5), min(n, j + 6)):
            col[i] = ab[5 + i - j, j]
        worst = max(worst, np.max(np.abs(fd - col)) / (1.0 + np.max(np.abs(col))))
    assert worst <= 1e-6


def test_flow_from_converged_solution_terminates_immediately(monopole_small):
    p, s, _ = monopole_small
    s2, rep = sd.flow_solve(p, s.grid, s)
    assert rep.converged and rep.iterations == 0


def test_flow_matches_newton_and_j_monotone():
    g = sd.build_grid(30.0, 300)
    p = sd.validate_params(OMEGA, 0.1, 1.0)
    guess = sd.initial_guess(p, g)
    sn, rn = sd.newton_solve(p, g, guess)
    sf, rf = sd.flow_solve(p, g, guess)
    assert rn.converged and rf.converged
    assert rf.path == "flow"
    diff = max(np.max(np.abs(sn.a - sf.a)), np.max(np.abs(sn.f - sf.f)), np.max(np.abs(sn.g - sf.g)))
    assert diff <= 1e-4
    jt = np.asarray(rf.j_trace)
    assert np.all(np.diff(jt) <= 1e-12 * (1.0 + np.abs(jt[:-1])))


def test_flow_keeps_g_zero_in_monopole_limit():
    g = sd.build_grid(30.0, 300)
    p = sd.validate_params(OMEGA, 0.0, 1.0)
    s, rep = sd.flow_solve(p, g, sd.initial_guess(p, g))
    assert rep.converged
    assert np.all(s.g == 0.0)


def test_continuation_single_leg_at_q_zero(grid_small):
    p = sd.validate_params(OMEGA, 0.0, 1.0)
    s, rep = sd.continuation_solve(p, grid_small)
    assert rep.converged
    assert len(rep.continuation_trace) == 1
    assert rep.continuation_trace[0].q == 0.0


def test_continuation_six_legs(grid_small):
    p = sd.validate_params(OMEGA, 0.3, 1.0)
    s, rep = sd.continuation_solve(p, grid_small)
    assert rep.converged
    assert len(rep.continuation_trace) == 6
    qs = [leg.q for leg in rep.continuation_trace]
    assert qs[0] == 0.0 and qs[-1] == pytest.approx(0.3)
    assert all(b >= a for a, b in zip(qs, qs[1:]))
    assert all(leg.converged for leg in rep.continuation_trace)


def test_continuation_validates_step_list(grid_small):
    p = sd.validate_params(OMEGA, 0.3, 1.0)
    with pytest.raises(ParameterError, match="nondecreasing"):
        sd.continuation_solve(p, grid_small, sd.SolveConfig(continuation_steps=[0.0, 0.2, 0.1, 0.3]))
    with pytest.raises(ParameterError, match="target"):
        sd.continuation_solve(p, grid_small, sd.SolveConfig(continuation_steps=[0.0, 0.2]))


def test_solve_config_validation():
    with pytest.raises(ParameterError):
        sd.SolveConfig(tol_residual=-1.0).validate()
    with pytest.raises(ParameterError):
        sd.SolveConfig(backtrack_factor=1.5).validate()
    sd.SolveConfig().validate()


def test_continuation_flow_fallback_rescues_crippled_newton(grid_small):
    # a 2-iteration Newton budget cannot converge from a cold guess, so the
    # continuation legs must fall back to the flow route and polish from there
    p = sd.validate_params(OMEGA, 0.1, 1.0)
    cfg = sd.SolveConfig(max_newton_iters=2)
    s, rep = sd.continuation_solve(p, grid_small, cfg)
    assert rep.converged
    assert rep.path == "both"
    assert rep.final_residual_norm <= cfg.tol_residual


def test_solves_near_admissible_boundary():
    g = sd.build_grid(60.0, 2000)
    for omega, q in [(OMEGA, 0.35), (0.52 * math.pi, 0.01), (0.97 * math.pi, 0.01)]:
        p = sd.validate_params(omega, q, 1.0)
        s, rep = sd.continuation_solve(p, g)
        assert rep.converged and rep.properties_ok, (omega, q, rep.message)


def test_flow_matches_newton_in_sigma_model_limit(grid_small):
    p = sd.validate_params(OMEGA, 0.1, 0.0)
    sn, rn = sd.newton_solve(p, grid_small, sd.initial_guess(p, grid_small))
    sf, rf = sd.flow_solve(p, grid_small, sd.initial_guess(p, grid_small))
    assert rn.converged and rf.converged
    diff = max(np.max(np.abs(sn.a - sf.a)), np.max(np.abs(sn.f - sf.f)), np.max(np.abs(sn.g - sf.g)))
    assert diff <= 1e-4


def test_oracle_equivalence_battery():
    """Newton and flow agree nodewise on the documented parameter battery."""
    g = sd.build_grid(40.0, 400)
    for omega, q in [(0.75 * math.pi, 0.1), (0.75 * math.pi, 0.3), (0.6 * math.pi, 0.4)]:
        p = sd.validate_params(omega, q, 1.0)
        sn, rn = sd.continuation_solve(p, g)
        sf, rf = sd.flow_solve(p, g, sd.initial_guess(p, g))
        assert rn.converged and rf.converged, (rn.message, rf.message)
        diff = max(np.max(np.abs(sn.a - sf.a)), np.max(np.abs(sn.f - sf.f)), np.max(np.abs(sn.g - sf.g)))
        assert diff <= 1e-4
