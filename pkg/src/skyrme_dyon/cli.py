"""Command-line entry point.

Commands:
  solve   solve one parameter point, write profile/observables/verify files
  sweep   solve a list of parameter points, write a summary CSV
  verify  re-run the property battery on a stored profile CSV
  table   write the analytic tables (no solving)

Angles accept raw radians or a literal pi suffix, e.g. `--omega 0.75pi`.
Exit codes: 0 success, 1 invalid configuration, 2 non-convergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SkyrmeDyonError
from .grid import DEFAULT_CLUSTER, build_grid
from .io import read_profile_csv, write_profile_csv, write_summary_csv
from .model import admissible_q_max, validate_params
from .observables import observables, skyrme_charge_closed
from .solver import SolveConfig, continuation_solve, default_continuation_steps, newton_solve
from .verify import Tolerances, run_suite

__all__ = ["main", "run_solve", "run_sweep", "run_table", "run_verify", "parse_angle", "RunConfig"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_VERIFY_FAILED = 3


def parse_angle(token: str) -> float:
    """Parse '0.75pi' or plain radians like '2.356'."""
    token = token.strip().lower()
    if token.endswith("pi"):
        prefix = token[:-2]
        return (float(prefix) if prefix else 1.0) * math.pi
    return float(token)


@dataclass
class RunConfig:
    command: str
    omega: float = 0.75 * math.pi
    q: float = 0.0
    kappa: float = 1.0
    rmax: float = 60.0
    nodes: int = 2000
    grading: float = DEFAULT_CLUSTER
    tol: float = 1e-10
    continuation: list[float] | int = 6
    sweep_param: str = "q"
    sweep_values: list[float] = field(default_factory=list)
    omegas: list[float] = field(default_factory=list)
    out: Path = Path(".")
    seed: int = 42

    def solve_config(self, q_target: float) -> SolveConfig:
        if isinstance(self.continuation, int):
            steps = default_continuation_steps(q_target, max(self.continuation, 1) if q_target == 0.0 else max(self.continuation, 2))
        else:
            steps = list(self.continuation)
        return SolveConfig(tol_residual=self.tol, continuation_steps=steps)


def _parse_continuation(token: str) -> list[float] | int:
    if "," not in token and "." not in token:
        return int(token)
    return [float(t) for t in token.split(",") if t.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skyrme-dyon", description="Radial dyon solver for the minimally gauged Skyrme model")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, with_params=True):
        if with_params:
            sp.add_argument("--omega", type=parse_angle, default=0.75 * math.pi, help="vacuum angle, radians or e.g. 0.75pi")
            sp.add_argument("--q", type=float, default=0.0, help="asymptotic electric potential")
            sp.add_argument("--kappa", type=float, default=1.0, help="quartic coupling (0 = sigma-model limit)")
        sp.add_argument("--rmax", type=float, default=60.0, help="outer truncation radius")
        sp.add_argument("--nodes", type=int, default=2000, help="number of mesh intervals")
        sp.add_argument("--grading", type=float, default=DEFAULT_CLUSTER, help="mesh cluster parameter in [0, 1]")
        sp.add_argument("--tol", type=float, default=1e-10, help="residual infinity-norm target")
        sp.add_argument("--continuation-steps", type=str, default="6", help="leg count or comma list of q values")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--seed", type=int, default=42, help="seed for verification test functions")

    sp = sub.add_parser("solve", help="solve one parameter point")
    add_common(sp)
    sp = sub.add_parser("sweep", help="solve a list of points along one parameter")
    add_common(sp)
    sp.add_argument("--sweep-param", choices=["q", "omega", "kappa"], default="q")
    sp.add_argument("--sweep-values", type=str, required=True, help="comma list; angle tokens allowed for omega")
    sp = sub.add_parser("verify", help="verify a stored profile CSV")
    sp.add_argument("profile", type=Path)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", type=Path, default=None, help="optional path for the report (default: stdout only)")
    sp = sub.add_parser("table", help="write analytic tables over an omega grid")
    sp.add_argument("--omegas", type=str, default="", help="comma list of omega tokens; default 51 points on [0.5pi, pi]")
    sp.add_argument("--out", type=Path, default=Path("."))
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("omega", "q", "kappa", "rmax", "nodes", "grading", "tol", "out", "seed", "sweep_param"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "continuation_steps", None) is not None:
        cfg.continuation = _parse_continuation(args.continuation_steps)
    if getattr(args, "sweep_values", None):
        cfg.sweep_values = [parse_angle(t) if args.sweep_param == "omega" else float(t) for t in args.sweep_values.split(",") if t.strip()]
    if getattr(args, "omegas", ""):
        cfg.omegas = [parse_angle(t) for t in args.omegas.split(",") if t.strip()]
    return cfg


def _solve_point(p, grid, cfg: RunConfig):
    solve_cfg = cfg.solve_config(p.q)
    return continuation_solve(p, grid, solve_cfg)


def run_solve(cfg: RunConfig) -> int:
    p = validate_params(cfg.omega, cfg.q, cfg.kappa)
    grid = build_grid(cfg.rmax, cfg.nodes, cluster=cfg.grading)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    profile, report = _solve_point(p, grid, cfg)
    write_profile_csv(out / "profile.csv", p, profile)
    if not report.converged:
        (out / "solve.txt").write_text(f"converged 0\nresidual {report.final_residual_norm:.6g}\n{report.message}\n", encoding="utf-8")
        print(f"solve failed: {report.message}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    obs = observables(p, profile, strict=False)
    (out / "observables.txt").write_text(obs.as_text(), encoding="utf-8")
    suite = run_suite(p, profile, Tolerances(residual=cfg.tol, seed=cfg.seed))
    (out / "verify.txt").write_text(suite.format(), encoding="utf-8")
    print(suite.format(), end="")
    if not suite.overall:
        print("verification failed; see verify.txt", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def run_sweep(cfg: RunConfig) -> int:
    if not cfg.sweep_values:
        raise SkyrmeDyonError("sweep value list is empty")
    base = {"omega": cfg.omega, "q": cfg.q, "kappa": cfg.kappa}
    points = []
    for val in cfg.sweep_values:
        point = dict(base)
        point[cfg.sweep_param] = val
        points.append(validate_params(point["omega"], point["q"], point["kappa"]))

    grid = build_grid(cfg.rmax, cfg.nodes, cluster=cfg.grading)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    all_ok = True
    prev = None
    for p in points:
        # explicit continuation lists cannot track a sweep; use the default path
        cold_cfg = SolveConfig(tol_residual=cfg.tol)
        if prev is None:
            profile, report = continuation_solve(p, grid, cold_cfg)
        else:
            guess = _adapt_profile(prev[0], prev[1], p)
            profile, report = newton_solve(p, grid, guess, SolveConfig(tol_residual=cfg.tol))
            if not report.converged:
                profile, report = continuation_solve(p, grid, cold_cfg)
        ok = report.converged
        all_ok &= ok
        if ok:
            obs = observables(p, profile, strict=False)
            rows.append(
                {
                    "omega": p.omega,
                    "q": p.q,
                    "kappa": p.kappa,
                    "Qe": obs.Qe,
                    "QS_numeric": obs.QS_numeric,
                    "QS_closed": obs.QS_closed,
                    "gamma_fit": obs.gamma_fit,
                    "gamma_theory": obs.gamma_theory,
                    "E": report.action.E,
                    "L": report.action.L,
                    "converged": True,
                }
            )
            prev = (p, profile)
        else:
            rows.append(
                {"omega": p.omega, "q": p.q, "kappa": p.kappa, "Qe": float("nan"), "QS_numeric": float("nan"),
                 "QS_closed": skyrme_charge_closed(p.omega), "gamma_fit": float("nan"), "gamma_theory": float("nan"),
                 "E": float("nan"), "L": float("nan"), "converged": False}
            )
    write_summary_csv(out / "summary.csv", rows)
    return EXIT_OK if all_ok else EXIT_NO_CONVERGENCE


def _adapt_profile(p_old, profile, p_new):
    """Warm-start guess across a parameter change, re-clamping boundary data."""
    s = profile.copy()
    if p_new.f_infinity != p_old.f_infinity:
        s.f *= p_new.f_infinity / p_old.f_infinity
    if p_old.q > 0.0:
        s.g *= p_new.q / p_old.q
    else:
        s.g = p_new.q * s.grid.r / (s.grid.r + 1.0)
    s.f[0], s.g[0] = 0.0, 0.0
    s.f[-1], s.g[-1] = p_new.f_infinity, p_new.q
    s.a[0], s.a[-1] = 1.0, 0.0
    return s


def run_table(cfg: RunConfig) -> int:
    omegas = np.asarray(cfg.omegas if cfg.omegas else np.linspace(0.5 * math.pi, math.pi, 51))
    if omegas.size == 0 or np.any(omegas < 0.0) or np.any(omegas > math.pi):
        raise SkyrmeDyonError(f"omega grid must be nonempty and inside [0, pi], got {omegas}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    qmax = np.array([admissible_q_max(w) for w in omegas])
    qs = np.array([skyrme_charge_closed(w) for w in omegas])
    gamma0 = 0.5 * np.abs(np.sin(omegas))
    lines = ["omega,q_max,QS,gamma_q0"]
    for w, qm, s, gm in zip(omegas, qmax, qs, gamma0):
        lines.append(f"{w:.17g},{qm:.17g},{s:.17g},{gm:.17g}")
    (out / "table.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for name, col in (("qmax_vs_omega.dat", qmax), ("qs_vs_omega.dat", qs), ("gamma0_vs_omega.dat", gamma0)):
        (out / name).write_text("\n".join(f"{w:.17g} {v:.17g}" for w, v in zip(omegas, col)) + "\n", encoding="utf-8")
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    p, profile = read_profile_csv(args.profile)
    suite = run_suite(p, profile, Tolerances(residual=args.tol, seed=args.seed))
    text = suite.format()
    print(text, end="")
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK if suite.overall else EXIT_VERIFY_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        if args.command == "verify":
            return run_verify(args)
        cfg = _config_from_args(args)
        if args.command == "solve":
            return run_solve(cfg)
        if args.command == "sweep":
            return run_sweep(cfg)
        if args.command == "table":
            return run_table(cfg)
        raise SkyrmeDyonError(f"unknown command {args.command}")
    except SkyrmeDyonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
