"""Model parameters, field profiles, energies, and Euler-Lagrange residuals.

Fields live on a RadialGrid as nodal arrays (a, f, g) in the working
convention

    a(0) = 1,  f(0) = 0,      g(0) = 0,
    a(R) = 0,  f(R) = pi - omega,  g(R) = q,

with omega in (pi/2, pi), 0 <= q < q_max(omega) and kappa >= 0.  The
original convention with f(0) = pi is recovered at the observables layer
through f_orig = pi - f; the energy densities are invariant under that
reflection.

Energy densities:

    e1 = 2*(2*a'^2 + (a^2-1)^2/r^2) + (r^2*f'^2 + 2*a^2*sin(f)^2)/2
         + 2*kappa*a^2*sin(f)^2*(2*f'^2 + a^2*sin(f)^2/r^2)
    e2 = r^2*g'^2 + 2*a^2*g^2

with static action L = integral(e1 - e2) and energy E = integral(e1 + e2).

Discretization.  Derivative-squared terms are assembled per interval
(difference quotients, with half-node coefficients r_i*r_{i+1} for r^2 and
arithmetic means for a^2*sin(f)^2); zero-order terms per node with
trapezoid weights.  density_e1/density_e2 fold the interval terms back to
nodes with the dual-cell average, so trapezoid integration of the density
arrays reproduces the interval assembly exactly, and the residuals below
are the exact gradients of the discrete action:

    dL/da_j = -8 * w_j * residual_a(j)
    dL/df_j = -1 * w_j * residual_f(j)
    dL/dg_j = +2 * w_j * residual_g(j)

(w_j the dual-cell width).  The flow solver, the inner electric solve and
the gradient checks all rely on this identity, so any change here must
keep densities and residuals in exact correspondence.

At r = 0 the nodal 1/r^2 terms take their regular-limit value 0, which
requires the origin data a_0 = +-1, sin(f_0) = 0; other origin values make
the energy divergent and are reported as non-finite.  Residuals are never
evaluated at the endpoints: Dirichlet data supplies the two boundary rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError, RegionError
from .grid import RadialGrid

__all__ = [
    "ModelParams",
    "FieldProfile",
    "ActionBreakdown",
    "validate_params",
    "admissible_q_max",
    "density_e1",
    "density_e2",
    "density_e1_array",
    "density_e2_array",
    "action_breakdown",
    "e2_energy",
    "residual_a",
    "residual_f",
    "residual_g",
    "residuals",
    "solution_properties_ok",
]


@dataclass(frozen=True)
class ModelParams:
    """Validated model parameters; construct through validate_params."""

    omega: float
    q: float
    kappa: float
    q_max: float

    @property
    def f_infinity(self) -> float:
        return math.pi - self.omega


def admissible_q_max(omega: float) -> float:
    """Upper bound min(sin(omega)/sqrt(2), sqrt(2)*(1 - omega/pi)) on q."""
    return min(math.sin(omega) / math.sqrt(2.0), math.sqrt(2.0) * (1.0 - omega / math.pi))


def validate_params(omega: float, q: float, kappa: float) -> ModelParams:
    """Check (omega, q, kappa) against the admissible region and package them.

    omega must lie strictly between pi/2 and pi; q in [0, q_max) where
    q_max = min(sin(omega)/sqrt(2), sqrt(2)*(1 - omega/pi)); kappa >= 0.
    q = 0 is admitted as the monopole limit used to start continuation.
    kappa = 0 selects the gauged sigma-model limit.
    """
    for name, val in (("omega", omega), ("q", q), ("kappa", kappa)):
        if not np.isfinite(val):
            raise ParameterError(f"{name} must be finite, got {val}")
    if not math.pi / 2.0 < omega < math.pi:
        raise RegionError(f"omega must lie strictly inside (pi/2, pi), got omega={omega}")
    q_max = admissible_q_max(omega)
    if q < 0.0 or q >= q_max:
        raise RegionError(f"q must lie in [0, q_max) with q_max={q_max:.6g} at omega={omega}, got q={q}")
    if kappa < 0.0:
        raise ParameterError(f"kappa must be >= 0, got {kappa}")
    return ModelParams(omega=float(omega), q=float(q), kappa=float(kappa), q_max=float(q_max))


@dataclass
class FieldProfile:
    """Nodal arrays (a, f, g) on a shared grid.

    Construction does not enforce the boundary data (unit tests probe
    synthetic configurations freely); validate() checks the full contract.
    """

    grid: RadialGrid
    a: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def copy(self) -> "FieldProfile":
        return FieldProfile(self.grid, self.a.copy(), self.f.copy(), self.g.copy())

    def validate(self, p: ModelParams) -> None:
        n = self.grid.N + 1
        for name, arr in (("a", self.a), ("f", self.f), ("g", self.g)):
            if arr.shape != (n,):
                raise ParameterError(f"{name} must have {n} nodal values, got {arr.shape}")
            bad = ~np.isfinite(arr)
            if np.any(bad):
                raise NumericError(f"non-finite {name} at node {int(np.flatnonzero(bad)[0])}")
        bcs = (
            ("a(0)", self.a[0], 1.0),
            ("f(0)", self.f[0], 0.0),
            ("g(0)", self.g[0], 0.0),
            ("a(R)", self.a[-1], 0.0),
            ("f(R)", self.f[-1], p.f_infinity),
            ("g(R)", self.g[-1], p.q),
        )
        for name, got, want in bcs:
            if abs(got - want) > 1e-12 * (1.0 + abs(want)):
                raise ParameterError(f"boundary value {name}={got!r} differs from required {want!r}")


@dataclass(frozen=True)
class ActionBreakdown:
    """Split of the static action: L = E1 - E2, E = E1 + E2, E1, E2 >= 0."""

    E1: float
    E2: float
    L: float
    E: float


def _interval_e1(p: ModelParams, grid: RadialGrid, a, f):
    """Per-interval part of e1: 4*a'^2 + r^2*f'^2/2 + 4*kappa*(a^2 sin^2 f)*f'^2."""
    da = np.diff(a) / grid.h
    df = np.diff(f) / grid.h
    sin2 = np.sin(f) ** 2
    c_half = 0.5 * (a[:-1] ** 2 * sin2[:-1] + a[1:] ** 2 * sin2[1:])
    return 4.0 * da * da + (0.5 * grid.p_half + 4.0 * p.kappa * c_half) * df * df


def _nodal_e1(p: ModelParams, grid: RadialGrid, a, f):
    """Per-node part of e1: 2*(a^2-1)^2/r^2 + a^2 sin^2 f + 2*kappa*a^4 sin^4 f / r^2."""
    dtype = np.result_type(a, f, float)
    r = grid.r
    a2 = a * a
    sin2 = np.sin(f) ** 2
    core = np.empty(grid.N + 1, dtype=dtype)
    core[1:] = (a2[1:] - 1.0) ** 2 / r[1:] ** 2
    core[0] = 0.0 if a2[0] == 1.0 else np.inf
    out = 2.0 * core + a2 * sin2
    if p.kappa != 0.0:
        sky = np.empty(grid.N + 1, dtype=dtype)
        sky[1:] = (a2[1:] * sin2[1:]) ** 2 / r[1:] ** 2
        sky[0] = 0.0 if sin2[0] == 0.0 else np.inf
        out = out + 2.0 * p.kappa * sky
    return out


def density_e1_array(p: ModelParams, s: FieldProfile) -> np.ndarray:
    """Nodal density array of e1 (trapezoid-integrating it gives E1)."""
    grid = s.grid
    return grid.nodal_from_intervals(_interval_e1(p, grid, s.a, s.f)) + _nodal_e1(p, grid, s.a, s.f)


def density_e2_array(p: ModelParams, s: FieldProfile) -> np.ndarray:
    """Nodal density array of e2 (trapezoid-integrating it gives E2)."""
    grid = s.grid
    dg = np.diff(s.g) / grid.h
    return grid.nodal_from_intervals(grid.p_half * dg * dg) + 2.0 * s.a**2 * s.g**2


def density_e1(p: ModelParams, s: FieldProfile, i: int) -> float:
    """e1 evaluated with discrete derivatives at interior node i."""
    s.grid._check_interior(i)
    return float(density_e1_array(p, s)[i])


def density_e2(p: ModelParams, s: FieldProfile, i: int) -> float:
    """e2 evaluated with discrete derivatives at interior node i."""
    s.grid._check_interior(i)
    return float(density_e2_array(p, s)[i])


def e2_energy(grid: RadialGrid, a, g):
    """Discrete E2(a, g) = sum over intervals + nodes; kappa-independent."""
    dg = np.diff(g) / grid.h
    return np.dot(grid.p_half * dg * dg, grid.h) + np.dot(2.0 * a * a * g * g, grid.w)


def action_breakdown(p: ModelParams, s: FieldProfile) -> ActionBreakdown:
    """Integrate the density arrays: E1, E2, L = E1 - E2, E = E1 + E2."""
    e1 = density_e1_array(p, s)
    e2 = density_e2_array(p, s)
    for name, arr in (("e1", e1), ("e2", e2)):
        bad = ~np.isfinite(arr)
        if np.any(bad):
            raise NumericError(f"non-finite {name} density at node {int(np.flatnonzero(bad)[0])}")
    E1 = s.grid.integrate(e1)
    E2 = s.grid.integrate(e2)
    return ActionBreakdown(E1=E1, E2=E2, L=E1 - E2, E=E1 + E2)


def _residual_core(p: ModelParams, grid: RadialGrid, a, f, g):
    """All three residual arrays over interior nodes 1..N-1.

    residual_a = a'' - [a(a^2-1)/r^2 + a sin^2(f)/4 + kappa a sin^2(f) f'^2
                        + kappa a^3 sin^4(f)/r^2 - a g^2/2]
    residual_f = 8 kappa D(a^2 sin^2(f) f') + (r^2 f')'
                 - [2 a^2 sin f cos f + 8 kappa a^2 sin f cos f f'^2
                    + 8 kappa a^4 sin^3(f) cos f / r^2]
    residual_g = (r^2 g')' - 2 a^2 g

    f'^2 factors use the dual-cell average of interval difference quotients
    and D(.) the conservative flux stencil, so each residual is the exact
    gradient of the discrete action (see module docstring).
    """
    h = grid.h
    hm, hp = h[:-1], h[1:]
    w = grid.w[1:-1]
    rj = grid.r[1:-1]
    Pm, Pp = grid.p_half[:-1], grid.p_half[1:]
    k = p.kappa

    am, aj, ap = a[:-2], a[1:-1], a[2:]
    fm, fj, fp = f[:-2], f[1:-1], f[2:]
    gj = g[1:-1]

    da = np.diff(a) / h
    df = np.diff(f) / h
    dg = np.diff(g) / h
    Dfm, Dfp = df[:-1], df[1:]

    app = (da[1:] - da[:-1]) / w
    qbar = (hm * Dfm * Dfm + hp * Dfp * Dfp) / (2.0 * w)
    inv_r2 = 1.0 / (rj * rj)

    sj, cj = np.sin(fj), np.cos(fj)
    s2 = sj * sj
    res_a = app - (
        aj * (aj * aj - 1.0) * inv_r2
        + 0.25 * aj * s2
        + k * aj * s2 * qbar
        + k * aj**3 * s2 * s2 * inv_r2
        - 0.5 * aj * gj * gj
    )

    sl_f = (Pp * Dfp - Pm * Dfm) / w
    c_nodal = a * a * np.sin(f) ** 2
    Cm = 0.5 * (c_nodal[:-2] + c_nodal[1:-1])
    Cp = 0.5 * (c_nodal[1:-1] + c_nodal[2:])
    flux_f = (Cp * Dfp - Cm * Dfm) / w
    res_f = (
        8.0 * k * flux_f
        + sl_f
        - (
            2.0 * aj * aj * sj * cj
            + 8.0 * k * aj * aj * sj * cj * qbar
            + 8.0 * k * aj**4 * s2 * sj * cj * inv_r2
        )
    )

    sl_g = (Pp * dg[1:] - Pm * dg[:-1]) / w
    res_g = sl_g - 2.0 * aj * aj * gj
    return res_a, res_f, res_g


def residuals(p: ModelParams, s: FieldProfile):
    """Vectorized (residual_a, residual_f, residual_g) over interior nodes."""
    return _residual_core(p, s.grid, s.a, s.f, s.g)


def residual_a(p: ModelParams, s: FieldProfile, i: int) -> float:
    """Gauge-profile equation residual at interior node i; zero at a solution."""
    s.grid._check_interior(i)
    return float(residuals(p, s)[0][i - 1])


def residual_f(p: ModelParams, s: FieldProfile, i: int) -> float:
    """Skyrme-profile equation residual at interior node i; zero at a solution."""
    s.grid._check_interior(i)
    return float(residuals(p, s)[1][i - 1])


def residual_g(p: ModelParams, s: FieldProfile, i: int) -> float:
    """Electric-potential equation residual at interior node i; zero at a solution."""
    s.grid._check_interior(i)
    return float(residuals(p, s)[2][i - 1])


def solution_properties_ok(p: ModelParams, s: FieldProfile) -> tuple[bool, str]:
    """Pointwise bounds and strict monotonicity a solution must satisfy.

    a > 0 and strictly decreasing; 0 < f < pi - omega and strictly
    increasing; 0 < g < q and strictly increasing (g identically zero in
    the monopole limit q = 0).  Interior nodes, strict inequalities on the
    stored values.
    """
    a, f, g = s.a, s.f, s.g
    f_inf = p.f_infinity
    checks = [
        (np.all(a[:-1] > 0.0), "a > 0 violated"),
        (np.all(np.diff(a) < 0.0), "a not strictly decreasing"),
        (np.all(f[1:-1] > 0.0) and np.all(f[1:-1] < f_inf), "0 < f < pi - omega violated"),
        (np.all(np.diff(f) > 0.0), "f not strictly increasing"),
    ]
    if p.q == 0.0:
        checks.append((bool(np.all(g == 0.0)), "g not identically zero at q = 0"))
    else:
        checks.append((np.all(g[1:-1] > 0.0) and np.all(g[1:-1] < p.q), "0 < g < q violated"))
        checks.append((np.all(np.diff(g) > 0.0), "g not strictly increasing"))
    for ok, msg in checks:
        if not ok:
            return False, msg
    return True, ""
