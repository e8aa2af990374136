import json
import os

import numpy as np
import pytest

from paraopt_kit.cli import (
    ConfigError,
    ExperimentId,
    RunConfig,
    fit_geometric_rate,
    main,
    solve_case,
    write_csv,
)


def read_lines(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


class TestRunConfig:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_bad_problem_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(problem="wave").validate()

    def test_tracking_fdto_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(objective="tracking", coarse_variant="ie_fdto").validate()

    def test_tolerance_range(self):
        with pytest.raises(ConfigError):
            RunConfig(inner_tol=1.5).validate()

    def test_file_roundtrip(self, tmp_path):
        cfg = RunConfig(problem="scalar", sigma=2.0, L=5)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        loaded = RunConfig.from_file(str(path))
        assert loaded == cfg

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"problme": "heat"}')
        with pytest.raises(ConfigError):
            RunConfig.from_file(str(path))


class TestCsvContract:
    def test_version_header_and_precision(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_csv(path, ["a", "b"], [(1, 1.0 / 3.0), (2, 0.1)])
        lines = read_lines(path)
        assert lines[0] == "# paraopt-kit v1"
        assert lines[1] == "a,b"
        assert lines[2] == "1,%.17g" % (1.0 / 3.0)
        with open(path, "rb") as f:
            assert b"\r" not in f.read()


class TestBoundCommand:
    def test_single_point_grid(self, tmp_path):
        out = str(tmp_path / "out")
        rc = main(["bound", "--sigma-grid", "1:1:1", "--gamma-grid", "1:1:1",
                   "-o", out])
        assert rc == 0
        lines = read_lines(os.path.join(out, "rho_star.csv"))
        assert lines[1] == "sigma_hat,gamma_hat,rho_star"
        assert len(lines) == 3

    def test_invalid_grid_is_config_error(self, tmp_path):
        rc = main(["bound", "--sigma-grid", "nonsense",
                   "-o", str(tmp_path / "x")])
        assert rc == 2

    def test_tracking_fdto_is_config_error(self, tmp_path):
        rc = main(["bound", "--objective", "tracking",
                   "--coarse-variant", "fdto", "--sigma-grid", "1:1:1",
                   "--gamma-grid", "1:1:1", "-o", str(tmp_path / "x")])
        assert rc == 2


class TestSolveCommand:
    def _args(self, out, extra=()):
        return ["solve", "--problem", "scalar", "--objective", "tracking",
                "--sigma", "1.0", "--gamma", "1.0", "--T", "5", "--L", "5",
                "--j-fine", "8", "--j-coarse", "1", "--no-precond",
                "--output", out, *extra]

    def test_writes_artifacts_and_succeeds(self, tmp_path):
        out = str(tmp_path / "run")
        assert main(self._args(out)) == 0
        lines = read_lines(os.path.join(out, "solve_log.csv"))
        assert lines[1] == "iteration,residual,inner_iters,seconds"
        summary = json.loads(open(os.path.join(out, "summary.json")).read())
        assert summary["converged"] is True
        assert summary["config"]["problem"] == "scalar"

    def test_deterministic_reruns_byte_identical(self, tmp_path):
        outs = [str(tmp_path / f"run{i}") for i in range(2)]
        contents = []
        for out in outs:
            assert main(self._args(out)) == 0
            # timing column is wall clock; compare everything else
            rows = read_lines(os.path.join(out, "solve_log.csv"))
            contents.append([",".join(r.split(",")[:3]) for r in rows])
        assert contents[0] == contents[1]

    def test_nonconvergence_exit_code(self, tmp_path):
        out = str(tmp_path / "run")
        rc = main(self._args(out, ["--max-outer", "1", "--outer-tol", "1e-14"]))
        assert rc == 1
        # partial log retained
        assert os.path.exists(os.path.join(out, "solve_log.csv"))

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = RunConfig(problem="scalar", objective="tracking", sigma=1.0,
                        gamma=1.0, T=5.0, L=5, J_fine=8, J_coarse=1,
                        precond_enabled=False, output="ignored")
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        out = str(tmp_path / "run")
        rc = main(["solve", "--config", str(path), "--output", out])
        assert rc == 0
        summary = json.loads(open(os.path.join(out, "summary.json")).read())
        assert summary["config"]["output"] == out

    def test_preconditioned_scalar_solve(self, tmp_path):
        out = str(tmp_path / "run")
        rc = main(["solve", "--problem", "scalar", "--objective", "tracking",
                   "--sigma", "1.0", "--gamma", "1.0", "--T", "5", "--L", "5",
                   "--j-fine", "8", "--j-coarse", "1", "--precond",
                   "--precond-method", "general", "--alpha-real", "-1",
                   "--output", out])
        assert rc == 0


class TestExperimentCommand:
    def test_unknown_id_is_config_error(self, tmp_path):
        assert main(["experiment", "NoSuchThing",
                     "-o", str(tmp_path / "x")]) == 2

    def test_tc_fotd_vs_fdto_writes_manifest(self, tmp_path):
        out = str(tmp_path / "exp")
        assert main(["experiment", "TcFotdVsFdto", "-o", out]) == 0
        manifest = json.loads(open(os.path.join(out, "manifest.json")).read())
        assert manifest["experiment"] == "TcFotdVsFdto"
        for fname in manifest["files"]:
            assert os.path.exists(os.path.join(out, fname))

    def test_scalar_weak_scaling(self, tmp_path):
        out = str(tmp_path / "exp")
        assert main(["experiment", "ScalarWeakScaling", "-o", out]) == 0
        lines = read_lines(os.path.join(out, "weak_scaling.csv"))
        assert lines[1] == "regime,L_hat,rho_star,exact_rho"
        # exact rho never exceeds the bound in either regime
        for line in lines[2:]:
            _, _, bound, exact = line.split(",")
            assert float(exact) <= float(bound) + 1e-12

    def test_all_ids_are_registered(self):
        from paraopt_kit.cli import _EXPERIMENTS
        assert set(_EXPERIMENTS) == set(ExperimentId)


class TestFitGeometricRate:
    def test_recovers_exact_geometric_sequence(self):
        rate = 0.37
        residuals = [rate ** k for k in range(10)]
        assert fit_geometric_rate(residuals) == pytest.approx(rate, rel=1e-12)

    def test_ignores_stagnation_tail(self):
        residuals = [0.5 ** k for k in range(30)] + [1e-16] * 10
        assert fit_geometric_rate(residuals) == pytest.approx(0.5, rel=1e-6)

    def test_too_short_history_rejected(self):
        with pytest.raises(ValueError):
            fit_geometric_rate([1.0, 0.5])
