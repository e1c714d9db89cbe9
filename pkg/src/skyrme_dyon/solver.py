"""Nonlinear boundary-value solvers: damped Newton, constrained flow, continuation.

Two structurally different routes to the same discrete root:

* newton_solve treats the stacked interior residuals as a root problem and
  runs damped Newton with the analytic block-tridiagonal Jacobian (3x3
  blocks per node, solved as a bandwidth-5 banded system) and a
  backtracking line search on the residual norm.  Indefiniteness of the
  action is irrelevant on this route.

* flow_solve mirrors the constrained-minimization structure: the electric
  potential is eliminated through the inner solve at every step and the
  reduced functional J(a, f) = E1(a, f) - E2(a, g(a)) is driven downhill.
  Because the residuals are the exact gradients of the discrete action and
  the inner solution makes the g-gradient vanish, the descent directions
  are exactly the (a, f) residuals with g frozen at the inner solution.
  Steps are preconditioned with the implicit linear stiffness
  (I - dt*A)^(-1) - an SPD operator, so directions stay descent directions
  - and accepted only if J does not increase; dt adapts by halving/growth.
  A plain explicit update would need dt ~ h_min^2 and is hopeless at
  production resolutions, which is the only deviation from a textbook
  explicit flow.

* continuation_solve walks q from the monopole limit q = 0 to the target,
  warm-starting each leg and falling back to flow (plus a Newton polish)
  on any failed leg.

Both routes keep g identically zero when q = 0 and the starting g
vanishes: every coupling of the g-sector to (a, f) carries a factor g.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import ParameterError
from .grid import RadialGrid
from .inner import solve_inner_g
from .model import (
    ActionBreakdown,
    FieldProfile,
    ModelParams,
    action_breakdown,
    residuals,
    solution_properties_ok,
    validate_params,
)

__all__ = [
    "SolveConfig",
    "SolveReport",
    "LegRecord",
    "initial_guess",
    "newton_solve",
    "flow_solve",
    "continuation_solve",
]

logger = logging.getLogger(__name__)

CORE_SCALE = 1.0  # length scale of the closed-form initial guess


@dataclass
class SolveConfig:
    """Solver knobs; defaults are production settings for desk-scale runs."""

    tol_residual: float = 1e-10
    max_newton_iters: int = 40
    backtrack_factor: float = 0.5
    min_step: float = 1e-8
    continuation_steps: Sequence[float] | None = None
    flow_dt: float = 0.1
    flow_max_steps: int = 200_000
    flow_tol: float = 1e-8

    def validate(self) -> None:
        if not self.tol_residual > 0.0:
            raise ParameterError(f"tol_residual must be positive, got {self.tol_residual}")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ParameterError(f"backtrack_factor must lie in (0, 1), got {self.backtrack_factor}")
        if not self.min_step > 0.0:
            raise ParameterError(f"min_step must be positive, got {self.min_step}")
        if self.max_newton_iters < 1 or self.flow_max_steps < 1:
            raise ParameterError("iteration limits must be >= 1")
        if not (self.flow_dt > 0.0 and self.flow_tol > 0.0):
            raise ParameterError("flow_dt and flow_tol must be positive")


@dataclass
class LegRecord:
    """One continuation leg: the q value solved and how the solve went."""

    q: float
    converged: bool
    iterations: int
    residual: float
    path: str
    L: float = float("nan")
    E: float = float("nan")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_residual_norm: float
    action: ActionBreakdown | None
    path: str
    continuation_trace: list[LegRecord] = field(default_factory=list)
    properties_ok: bool = False
    message: str = ""
    j_trace: list[float] = field(default_factory=list)
    wall_time: float = 0.0


def initial_guess(p: ModelParams, grid: RadialGrid) -> FieldProfile:
    """Closed-form profile shapes satisfying the boundary data and strict bounds.

    a = 1/(1 + (r/rc)^2), f = (pi - omega)(1 - exp(-r/rc)), g = q r/(r + rc)
    with rc = 1, endpoints clipped to the exact boundary values.
    """
    r = grid.r
    a = 1.0 / (1.0 + (r / CORE_SCALE) ** 2)
    f = p.f_infinity * (1.0 - np.exp(-r / CORE_SCALE))
    g = p.q * r / (r + CORE_SCALE)
    a[0], f[0], g[0] = 1.0, 0.0, 0.0
    a[-1], f[-1], g[-1] = 0.0, p.f_infinity, p.q
    return FieldProfile(grid, a, f, g)


# -- stacked-vector helpers ---------------------------------------------------------


def _pack(s: FieldProfile) -> np.ndarray:
    x = np.empty(3 * (s.grid.N - 1))
    x[0::3] = s.a[1:-1]
    x[1::3] = s.f[1:-1]
    x[2::3] = s.g[1:-1]
    return x


def _unpack(x: np.ndarray, p: ModelParams, grid: RadialGrid) -> FieldProfile:
    n = grid.N + 1
    a = np.empty(n)
    f = np.empty(n)
    g = np.empty(n)
    a[1:-1], f[1:-1], g[1:-1] = x[0::3], x[1::3], x[2::3]
    a[0], f[0], g[0] = 1.0, 0.0, 0.0
    a[-1], f[-1], g[-1] = 0.0, p.f_infinity, p.q
    return FieldProfile(grid, a, f, g)


def _residual_vector(p: ModelParams, s: FieldProfile) -> tuple[np.ndarray, float]:
    ra, rf, rg = residuals(p, s)
    vec = np.empty(3 * ra.size)
    vec[0::3], vec[1::3], vec[2::3] = ra, rf, rg
    norm = float(np.max(np.abs(vec))) if vec.size else 0.0
    return vec, norm


def _scatter(ab: np.ndarray, vals: np.ndarray, rf: int, cf: int, doff: int, n: int) -> None:
    """Place d(residual rf at node k)/d(field cf at node k+doff) into banded storage."""
    band = 5 + rf - cf - 3 * doff
    if doff == 0:
        ab[band, cf::3] = vals
    elif doff == 1:
        ab[band, 3 + cf :: 3] = vals[:-1]
    else:
        ab[band, cf : 3 * (n - 1) : 3] = vals[1:]


def _jacobian_banded(p: ModelParams, s: FieldProfile) -> np.ndarray:
    """Analytic Jacobian of the stacked residuals in LAPACK banded form (l = u = 5)."""
    grid = s.grid
    a, f, g = s.a, s.f, s.g
    h = grid.h
    hm, hp = h[:-1], h[1:]
    w = grid.w[1:-1]
    rj = grid.r[1:-1]
    Pm, Pp = grid.p_half[:-1], grid.p_half[1:]
    k = p.kappa
    n = grid.N - 1

    am, aj, ap = a[:-2], a[1:-1], a[2:]
    fm, fj, fp = f[:-2], f[1:-1], f[2:]
    gj = g[1:-1]

    df = np.diff(f) / h
    Dfm, Dfp = df[:-1], df[1:]
    qbar = (hm * Dfm * Dfm + hp * Dfp * Dfp) / (2.0 * w)
    inv_r2 = 1.0 / (rj * rj)
    iw_hm = 1.0 / (hm * w)
    iw_hp = 1.0 / (hp * w)

    sj, cj = np.sin(fj), np.cos(fj)
    sm, cm = np.sin(fm), np.cos(fm)
    sp_, cp_ = np.sin(fp), np.cos(fp)
    s2 = sj * sj
    sc = sj * cj
    cos2 = cj * cj - sj * sj
    Cm = 0.5 * (am * am * sm * sm + aj * aj * s2)
    Cp = 0.5 * (aj * aj * s2 + ap * ap * sp_ * sp_)

    ab = np.zeros((11, 3 * n))

    # residual_a partials
    _scatter(ab, iw_hm, 0, 0, -1, n)
    _scatter(ab, iw_hp, 0, 0, 1, n)
    ra_aj = -(iw_hm + iw_hp) - (
        (3.0 * aj * aj - 1.0) * inv_r2
        + 0.25 * s2
        + k * s2 * qbar
        + 3.0 * k * aj * aj * s2 * s2 * inv_r2
        - 0.5 * gj * gj
    )
    _scatter(ab, ra_aj, 0, 0, 0, n)
    _scatter(ab, k * aj * s2 * Dfm / w, 0, 1, -1, n)
    _scatter(ab, -k * aj * s2 * Dfp / w, 0, 1, 1, n)
    ra_fj = -(
        0.5 * aj * sc
        + 2.0 * k * aj * sc * qbar
        + k * aj * s2 * (Dfm - Dfp) / w
        + 4.0 * k * aj**3 * s2 * sc * inv_r2
    )
    _scatter(ab, ra_fj, 0, 1, 0, n)
    _scatter(ab, aj * gj, 0, 2, 0, n)

    # residual_f partials
    rf_fm = 8.0 * k * (Cm / hm - am * am * sm * cm * Dfm) / w + Pm * iw_hm + 8.0 * k * aj * aj * sc * Dfm / w
    rf_fp = 8.0 * k * (Cp / hp + ap * ap * sp_ * cp_ * Dfp) / w + Pp * iw_hp - 8.0 * k * aj * aj * sc * Dfp / w
    rf_fj = (
        8.0 * k * (aj * aj * sc * (Dfp - Dfm) - Cp / hp - Cm / hm) / w
        - (Pp / hp + Pm / hm) / w
        - (
            2.0 * aj * aj * cos2
            + 8.0 * k * aj * aj * cos2 * qbar
            + 8.0 * k * aj * aj * sc * (Dfm - Dfp) / w
            + 8.0 * k * aj**4 * s2 * (3.0 * cj * cj - s2) * inv_r2
        )
    )
    _scatter(ab, rf_fm, 1, 1, -1, n)
    _scatter(ab, rf_fp, 1, 1, 1, n)
    _scatter(ab, rf_fj, 1, 1, 0, n)
    _scatter(ab, -8.0 * k * am * sm * sm * Dfm / w, 1, 0, -1, n)
    _scatter(ab, 8.0 * k * ap * sp_ * sp_ * Dfp / w, 1, 0, 1, n)
    rf_aj = 8.0 * k * aj * s2 * (Dfp - Dfm) / w - (
        4.0 * aj * sc + 16.0 * k * aj * sc * qbar + 32.0 * k * aj**3 * s2 * sc * inv_r2
    )
    _scatter(ab, rf_aj, 1, 0, 0, n)

    # residual_g partials
    _scatter(ab, Pm * iw_hm, 2, 2, -1, n)
    _scatter(ab, Pp * iw_hp, 2, 2, 1, n)
    _scatter(ab, -(Pp / hp + Pm / hm) / w - 2.0 * aj * aj, 2, 2, 0, n)
    _scatter(ab, -4.0 * aj * gj, 2, 0, 0, n)
    return ab


def newton_solve(
    p: ModelParams, grid: RadialGrid, guess: FieldProfile, cfg: SolveConfig | None = None
) -> tuple[FieldProfile, SolveReport]:
    """Damped Newton on the stacked interior residuals.

    Returns the best iterate and a report; line-search stalls and Jacobian
    factorization failures produce a non-converged report, never a crash.
    """
    cfg = cfg or SolveConfig()
    cfg.validate()
    t0 = time.perf_counter()
    s = _unpack(_pack(guess), p, grid)  # clamps boundary data exactly
    x = _pack(s)
    rvec, norm = _residual_vector(p, s)
    best_x, best_norm = x, norm
    iters = 0
    message = ""
    while norm > cfg.tol_residual and iters < cfg.max_newton_iters:
        ab = _jacobian_banded(p, s)
        try:
            delta = solve_banded((5, 5), ab, -rvec)
        except (np.linalg.LinAlgError, ValueError) as exc:
            message = f"jacobian factorization failed: {exc}"
            break
        if not np.all(np.isfinite(delta)):
            message = "jacobian solve produced non-finite step"
            break
        step = 1.0
        accepted = False
        while step >= cfg.min_step:
            x_try = x + step * delta
            s_try = _unpack(x_try, p, grid)
            rvec_try, norm_try = _residual_vector(p, s_try)
            if np.isfinite(norm_try) and (norm_try <= (1.0 - 1e-4 * step) * norm or norm_try <= cfg.tol_residual):
                x, s, rvec, norm = x_try, s_try, rvec_try, norm_try
                accepted = True
                break
            step *= cfg.backtrack_factor
        if not accepted:
            message = f"line search stalled at step < {cfg.min_step} (residual {norm:.3e})"
            break
        iters += 1
        if norm < best_norm:
            best_x, best_norm = x, norm
    if best_norm < norm:
        x = best_x
        s = _unpack(x, p, grid)
        rvec, norm = _residual_vector(p, s)
    # Polish: near the round-off floor the Armijo test starves, but a short
    # scan over damped steps still shaves the last fraction off the norm.
    # Polish rounds count against the iteration budget.
    for _ in range(6):
        if norm <= cfg.tol_residual or iters >= cfg.max_newton_iters:
            break
        try:
            delta = solve_banded((5, 5), _jacobian_banded(p, s), -rvec)
        except (np.linalg.LinAlgError, ValueError):
            break
        if not np.all(np.isfinite(delta)):
            break
        best_step = None
        for t in (1.0, 0.5, 0.25, 0.1, 0.03, 0.01):
            s_try = _unpack(x + t * delta, p, grid)
            rvec_try, norm_try = _residual_vector(p, s_try)
            if np.isfinite(norm_try) and norm_try < norm and (best_step is None or norm_try < best_step[1]):
                best_step = (x + t * delta, norm_try, rvec_try, s_try)
        if best_step is None:
            break
        x, norm, rvec, s = best_step
        iters += 1
    converged = norm <= cfg.tol_residual
    if converged:
        message = ""
    props_ok, prop_msg = solution_properties_ok(p, s)
    action = None
    try:
        action = action_breakdown(p, s)
    except Exception as exc:  # non-finite transients only
        message = message or f"action not evaluable: {exc}"
    if converged and not props_ok:
        message = f"converged residuals but solution properties violated: {prop_msg}"
    report = SolveReport(
        converged=converged,
        iterations=iters,
        final_residual_norm=norm,
        action=action,
        path="newton",
        properties_ok=props_ok,
        message=message,
        wall_time=time.perf_counter() - t0,
    )
    return s, report


def _implicit_step_matrix(grid: RadialGrid, coeff_half: np.ndarray, c: float, reaction: np.ndarray) -> np.ndarray:
    """Banded (I - c*(K - diag(reaction))), K u = (coeff_p Du_p - coeff_m Du_m)/w.

    reaction >= 0 is the stabilizing (positive) part of the local reaction
    rate; folding it into the implicit operator keeps the preconditioner
    positive definite while removing the explicit stability limit of the
    stiff zero-order terms (notably (3a^2-1)/r^2 near the origin).
    """
    h = grid.h
    hm, hp = h[:-1], h[1:]
    w = grid.w[1:-1]
    km, kp = coeff_half[:-1], coeff_half[1:]
    n = grid.N - 1
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + c * ((km / hm + kp / hp) / w + reaction)
    ab[0, 1:] = (-c * kp / (hp * w))[:-1]
    ab[2, :-1] = (-c * km / (hm * w))[1:]
    return ab


def _flow_reactions(p: ModelParams, s: FieldProfile):
    """Positive parts of the diagonal reaction rates of the a- and f-equations."""
    grid = s.grid
    a, f, g = s.a, s.f, s.g
    aj, fj, gj = a[1:-1], f[1:-1], g[1:-1]
    rj = grid.r[1:-1]
    inv_r2 = 1.0 / (rj * rj)
    sj, cj = np.sin(fj), np.cos(fj)
    s2 = sj * sj
    k = p.kappa
    qbar = grid.avg_grad_sq(f)[1:-1]
    react_a = (
        (3.0 * aj * aj - 1.0) * inv_r2
        + 0.25 * s2
        + k * s2 * qbar
        + 3.0 * k * aj * aj * s2 * s2 * inv_r2
        - 0.5 * gj * gj
    )
    cos2 = cj * cj - sj * sj
    react_f = (
        2.0 * aj * aj * cos2
        + 8.0 * k * aj * aj * cos2 * qbar
        + 8.0 * k * aj**4 * s2 * (3.0 * cj * cj - s2) * inv_r2
    )
    return np.maximum(react_a, 0.0), np.maximum(react_f, 0.0)


def flow_solve(
    p: ModelParams, grid: RadialGrid, guess: FieldProfile, cfg: SolveConfig | None = None
) -> tuple[FieldProfile, SolveReport]:
    """Descent on the reduced functional J(a, f) = E1(a, f) - E2(a, g(a)).

    g is re-solved from a at every step (so the g-equation holds exactly
    along the whole path), descent directions are the preconditioned
    residuals of the remaining two equations, and steps that would raise J
    are rejected with dt halved.  Terminates when the full residual norm
    drops below cfg.flow_tol or flow_max_steps is exhausted.
    """
    cfg = cfg or SolveConfig()
    cfg.validate()
    t0 = time.perf_counter()
    a = guess.a.copy()
    f = guess.f.copy()
    a[0], a[-1] = 1.0, 0.0
    f[0], f[-1] = 0.0, p.f_infinity
    g = solve_inner_g(p, grid, a)
    s = FieldProfile(grid, a, f, g)
    J = action_breakdown(p, s).L
    j_trace = [J]
    dt = cfg.flow_dt
    accepted = 0
    message = ""
    converged = False
    norm = float("inf")
    for _ in range(cfg.flow_max_steps):
        ra, rf, rg = residuals(p, s)
        norm = max(np.max(np.abs(ra)), np.max(np.abs(rf)), np.max(np.abs(rg)))
        if norm <= cfg.flow_tol:
            converged = True
            break
        c_half = 0.5 * ((s.a[:-1] * np.sin(s.f[:-1])) ** 2 + (s.a[1:] * np.sin(s.f[1:])) ** 2)
        react_a, react_f = _flow_reactions(p, s)
        stepped = False
        while dt >= 1e-12:
            ab_a = _implicit_step_matrix(grid, np.ones(grid.N), 8.0 * dt, react_a)
            ab_f = _implicit_step_matrix(grid, grid.p_half + 8.0 * p.kappa * c_half, dt, react_f)
            da = solve_banded((1, 1), ab_a, 8.0 * dt * ra)
            df = solve_banded((1, 1), ab_f, dt * rf)
            a_try = s.a.copy()
            f_try = s.f.copy()
            a_try[1:-1] += da
            f_try[1:-1] += df
            g_try = solve_inner_g(p, grid, a_try)
            s_try = FieldProfile(grid, a_try, f_try, g_try)
            try:
                J_try = action_breakdown(p, s_try).L
            except Exception:
                J_try = float("inf")
            if np.isfinite(J_try) and J_try <= J + 1e-12 * (1.0 + abs(J)):
                s, J = s_try, J_try
                j_trace.append(J)
                accepted += 1
                dt = min(dt * 1.3, 1e3)
                stepped = True
                break
            dt *= 0.5
        if not stepped:
            message = "flow step size underflow"
            break
    else:
        message = f"flow step budget exhausted at residual {norm:.3e}"
    props_ok, prop_msg = solution_properties_ok(p, s)
    if converged and not props_ok:
        message = f"converged residuals but solution properties violated: {prop_msg}"
    report = SolveReport(
        converged=converged,
        iterations=accepted,
        final_residual_norm=float(norm),
        action=action_breakdown(p, s),
        path="flow",
        properties_ok=props_ok,
        message=message,
        j_trace=j_trace,
        wall_time=time.perf_counter() - t0,
    )
    return s, report


def default_continuation_steps(q_target: float, legs: int = 6) -> list[float]:
    """q values walked during continuation: 0 up to the target inclusive."""
    if q_target == 0.0:
        return [0.0]
    if legs < 2:
        raise ParameterError(f"need at least 2 continuation legs for q > 0, got {legs}")
    return list(np.linspace(0.0, q_target, legs))


def _warm_start(prev: FieldProfile, p_next: ModelParams, q_prev: float) -> FieldProfile:
    """Reuse the previous leg's profile, rescaling g toward the new boundary value."""
    s = prev.copy()
    if q_prev > 0.0:
        s.g *= p_next.q / q_prev
    else:
        s.g = p_next.q * s.grid.r / (s.grid.r + CORE_SCALE)
    s.g[0] = 0.0
    s.g[-1] = p_next.q
    return s


def continuation_solve(
    p_target: ModelParams, grid: RadialGrid, cfg: SolveConfig | None = None
) -> tuple[FieldProfile, SolveReport]:
    """Solve at q = 0 first, then continue in q to the target.

    Each leg reuses the previous converged profile as its guess; a failed
    Newton leg falls back to flow followed by a Newton polish.  If a leg
    still fails, the report carries the last good q in its message.
    """
    cfg = cfg or SolveConfig()
    cfg.validate()
    t0 = time.perf_counter()
    steps = list(cfg.continuation_steps) if cfg.continuation_steps is not None else default_continuation_steps(p_target.q)
    if not steps:
        raise ParameterError("continuation step list must be nonempty")
    if any(b < a for a, b in zip(steps, steps[1:])):
        raise ParameterError(f"continuation q values must be nondecreasing, got {steps}")
    if abs(steps[-1] - p_target.q) > 1e-12:
        raise ParameterError(f"last continuation step {steps[-1]} must equal target q {p_target.q}")

    trace: list[LegRecord] = []
    used_flow = False
    profile: FieldProfile | None = None
    report: SolveReport | None = None
    q_prev = 0.0
    for q_k in steps:
        p_k = validate_params(p_target.omega, q_k, p_target.kappa)
        guess = initial_guess(p_k, grid) if profile is None else _warm_start(profile, p_k, q_prev)
        sol, rep = newton_solve(p_k, grid, guess, cfg)
        if not (rep.converged and rep.properties_ok):
            # flow is the globally robust route; its output warm-starts a
            # final Newton polish, which must still meet tol_residual for
            # the leg to count as converged
            logger.info("newton leg at q=%.6g failed (%s); falling back to flow", q_k, rep.message)
            flow_sol, _ = flow_solve(p_k, grid, guess, cfg)
            used_flow = True
            sol, rep = newton_solve(p_k, grid, flow_sol, cfg)
        leg = LegRecord(
            q=q_k,
            converged=rep.converged,
            iterations=rep.iterations,
            residual=rep.final_residual_norm,
            path=rep.path,
            L=rep.action.L if rep.action else float("nan"),
            E=rep.action.E if rep.action else float("nan"),
        )
        trace.append(leg)
        if not rep.converged:
            rep.message = f"continuation aborted at q={q_k:.6g}; last converged q={q_prev:.6g}. {rep.message}"
            rep.continuation_trace = trace
            rep.path = "both" if used_flow else "newton"
            rep.wall_time = time.perf_counter() - t0
            return sol, rep
        profile, report = sol, rep
        q_prev = q_k
    assert profile is not None and report is not None
    report.continuation_trace = trace
    report.path = "both" if used_flow else "newton"
    report.wall_time = time.perf_counter() - t0
    return profile, report
