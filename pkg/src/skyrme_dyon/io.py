"""Profile and summary file formats.

Profile CSV: header lines `# key=value` for omega, q, kappa, R, N, grading
(17 significant digits, lossless float round-trip), a column header line
`r,a,f,g`, then one row per node.  Grids are reconstructed from the stored
nodes, so re-reading a profile reproduces every derived quantity bitwise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError
from .grid import grid_from_nodes
from .model import FieldProfile, ModelParams, validate_params

__all__ = ["write_profile_csv", "read_profile_csv", "write_summary_csv", "SUMMARY_COLUMNS"]

SUMMARY_COLUMNS = ["omega", "q", "kappa", "Qe", "QS_numeric", "QS_closed", "gamma_fit", "gamma_theory", "E", "L", "converged"]


def write_profile_csv(path: str | Path, p: ModelParams, s: FieldProfile) -> None:
    grid = s.grid
    grading = "none" if grid.grading is None else f"{grid.grading:.17g}"
    lines = [
        f"# omega={p.omega:.17g}",
        f"# q={p.q:.17g}",
        f"# kappa={p.kappa:.17g}",
        f"# R={grid.R:.17g}",
        f"# N={grid.N}",
        f"# grading={grading}",
        "r,a,f,g",
    ]
    for r, a, f, g in zip(grid.r, s.a, s.f, s.g):
        lines.append(f"{r:.17g},{a:.17g},{f:.17g},{g:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_profile_csv(path: str | Path) -> tuple[ModelParams, FieldProfile]:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    for line in text:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            header[key.strip()] = value.strip()
        elif line.startswith("r,"):
            continue
        else:
            rows.append([float(tok) for tok in line.split(",")])
    for key in ("omega", "q", "kappa", "R", "N", "grading"):
        if key not in header:
            raise ParameterError(f"profile file {path} is missing header line '# {key}='")
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 4:
        raise ParameterError(f"profile file {path} must have 4 columns r,a,f,g")
    n_expected = int(header["N"]) + 1
    if data.shape[0] != n_expected:
        raise ParameterError(f"profile file {path} has {data.shape[0]} rows, header says {n_expected}")
    grading = None if header["grading"] == "none" else float(header["grading"])
    grid = grid_from_nodes(data[:, 0], grading=grading)
    p = validate_params(float(header["omega"]), float(header["q"]), float(header["kappa"]))
    s = FieldProfile(grid, data[:, 1].copy(), data[:, 2].copy(), data[:, 3].copy())
    return p, s


def write_summary_csv(path: str | Path, rows: list[dict]) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in rows:
        cells = []
        for col in SUMMARY_COLUMNS:
            val = row[col]
            cells.append(str(int(val)) if col == "converged" else f"{val:.17g}")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
