import math

import numpy as np
import pytest

import skyrme_dyon as sd
from skyrme_dyon.cli import main, parse_angle
from skyrme_dyon.io import read_profile_csv, write_profile_csv


def test_parse_angle():
    assert parse_angle("0.75pi") == pytest.approx(0.75 * math.pi)
    assert parse_angle("pi") == pytest.approx(math.pi)
    assert parse_angle("2.356") == pytest.approx(2.356)
    assert parse_angle(" 0.5PI ") == pytest.approx(0.5 * math.pi)


def test_solve_end_to_end(tmp_path):
    out = tmp_path / "run1"
    code = main(
        [
            "solve", "--omega", "0.75pi", "--q", "0.3", "--kappa", "1",
            "--rmax", "60", "--nodes", "2000", "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "profile.csv").exists()
    assert (out / "observables.txt").exists()
    assert (out / "verify.txt").exists()
    assert "overall PASS" in (out / "verify.txt").read_text()

    # round trip: the stored profile reproduces the recorded observables exactly
    p, s = read_profile_csv(out / "profile.csv")
    recorded = {}
    for line in (out / "observables.txt").read_text().splitlines():
        parts = line.split()
        if len(parts) == 2:
            recorded[parts[0]] = float(parts[1])
    qe = sd.electric_charge(s)
    energy = sd.action_breakdown(p, s).E
    assert abs(qe - recorded["Qe"]) <= 1e-12 * abs(recorded["Qe"])
    obs = sd.observables(p, s)
    assert abs(obs.QS_numeric - recorded["QS_numeric"]) <= 1e-12 * (1 + abs(recorded["QS_numeric"]))
    assert np.isfinite(energy)


def test_solve_region_error_exit_code(tmp_path):
    code = main(["solve", "--omega", "0.4pi", "--q", "0.1", "--out", str(tmp_path)])
    assert code == 1


def test_solve_under_resolved_domain_is_diagnosed(tmp_path):
    code = main(["solve", "--omega", "0.75pi", "--q", "0.1", "--rmax", "5", "--nodes", "100", "--out", str(tmp_path)])
    assert code in (2, 3)


def test_sweep_end_to_end(tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep", "--omega", "0.75pi", "--kappa", "1", "--nodes", "2000",
            "--sweep-param", "q", "--sweep-values", "0.30,0.20,0.10,0.05,0.02",
            "--out", str(out),
        ]
    )
    assert code == 0
    lines = (out / "summary.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["omega", "q", "kappa", "Qe", "QS_numeric", "QS_closed", "gamma_fit", "gamma_theory", "E", "L", "converged"]
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 5
    qe = [float(row[header.index("Qe")]) for row in rows]
    assert all(b < a for a, b in zip(qe, qe[1:]))
    assert all(row[-1] == "1" for row in rows)


def test_sweep_omega_checks_closed_form(tmp_path):
    out = tmp_path / "sweep_omega"
    code = main(
        [
            "sweep", "--q", "0.05", "--kappa", "1", "--nodes", "2000",
            "--sweep-param", "omega", "--sweep-values", "0.55pi,0.75pi,0.9pi",
            "--out", str(out),
        ]
    )
    assert code == 0
    lines = (out / "summary.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        row = line.split(",")
        omega = float(row[header.index("omega")])
        qs_closed = float(row[header.index("QS_closed")])
        assert qs_closed == pytest.approx(1.0 + (0.5 * math.sin(2 * omega) - omega) / math.pi, abs=1e-12)


def test_sweep_empty_values_exit_one(tmp_path):
    code = main(["sweep", "--sweep-param", "q", "--sweep-values", ",", "--out", str(tmp_path)])
    assert code == 1


def test_sweep_records_per_point_failures(tmp_path):
    # an unreachable residual target forces honest non-convergence
    out = tmp_path / "failing"
    code = main(
        [
            "sweep", "--omega", "0.75pi", "--nodes", "300", "--rmax", "30",
            "--sweep-param", "q", "--sweep-values", "0.1", "--tol", "1e-16",
            "--out", str(out),
        ]
    )
    assert code == 2
    lines = (out / "summary.csv").read_text().strip().splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[-1] == "0"


def test_table_reference_values(tmp_path):
    out = tmp_path / "table"
    code = main(["table", "--omegas", "0.5pi,0.75pi,pi", "--out", str(out)])
    assert code == 0
    lines = (out / "table.csv").read_text().strip().splitlines()
    rows = {round(float(r.split(",")[0]), 10): [float(x) for x in r.split(",")[1:]] for r in lines[1:]}
    qmax, qs, gamma0 = rows[round(0.75 * math.pi, 10)]
    assert qs == pytest.approx(0.0908450569081046, abs=1e-12)
    assert qmax == pytest.approx(0.35355339059327379, abs=1e-12)
    assert gamma0 == pytest.approx(0.35355339059327379, abs=1e-12)
    half = rows[round(0.5 * math.pi, 10)]
    assert half[1] == pytest.approx(0.5, abs=1e-14)
    full = rows[round(math.pi, 10)]
    assert full[1] == pytest.approx(0.0, abs=1e-14)
    for name in ("qmax_vs_omega.dat", "qs_vs_omega.dat", "gamma0_vs_omega.dat"):
        dat = (out / name).read_text().strip().splitlines()
        assert len(dat) == 3 and all(len(line.split()) == 2 for line in dat)


def test_table_invalid_range(tmp_path):
    assert main(["table", "--omegas", "1.5pi", "--out", str(tmp_path)]) == 1


def test_solve_with_explicit_continuation_list(tmp_path):
    out = tmp_path / "steps"
    code = main(
        [
            "solve", "--omega", "0.75pi", "--q", "0.2", "--nodes", "2000",
            "--continuation-steps", "0.0,0.1,0.2", "--out", str(out),
        ]
    )
    assert code == 0
    assert "overall PASS" in (out / "verify.txt").read_text()


def test_verify_command_on_stored_profile(tmp_path):
    grid = sd.build_grid(60.0, 2000)
    p = sd.validate_params(0.75 * math.pi, 0.1, 1.0)
    profile, report = sd.continuation_solve(p, grid)
    assert report.converged
    path = tmp_path / "profile.csv"
    write_profile_csv(path, p, profile)
    assert main(["verify", str(path)]) == 0
    profile.g[50] = -profile.g[50]
    write_profile_csv(path, p, profile)
    assert main(["verify", str(path)]) == 3


def test_profile_csv_bitwise_roundtrip(tmp_path, grid_small):
    p = sd.validate_params(0.75 * math.pi, 0.2, 1.0)
    s = sd.initial_guess(p, grid_small)
    path = tmp_path / "p.csv"
    write_profile_csv(path, p, s)
    p2, s2 = read_profile_csv(path)
    assert p2.omega == p.omega and p2.q == p.q and p2.kappa == p.kappa
    assert np.array_equal(s2.grid.r, s.grid.r)
    assert np.array_equal(s2.a, s.a) and np.array_equal(s2.f, s.f) and np.array_equal(s2.g, s.g)
