"""CSV/manifest serialization and the command-line interface."""

import json
import math

import numpy as np
import pytest

import grainkin as gk
import grainkin.io as gio
from grainkin.cli import main as cli_main
from test_diagnostics import make_report

FAST = ["--n-max", "9", "--domain-length", "4", "--cells", "40",
        "--tol", "1e-8", "--seed", "3"]


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny")
    rc = cli_main(["solve", *FAST, "--out", str(out)])
    assert rc == 0
    return out


class TestProfileCsv:
    def test_zero_profile_rows(self, tmp_path):
        p = gk.Parameters(beta=1.0, n_max=7, domain_length=2, cells=4)
        grid = gk.Grid.from_parameters(p)
        report = make_report(gk.State.zeros(p), grid, p, gamma=0.0)
        path = tmp_path / "profile.csv"
        gio.write_profile_csv(report, grid, p, path)
        n, k, xi, g = gio.read_profile_csv(path)
        assert n.size == (p.n_max - 1) * (p.cells + 1)
        assert np.all(g == 0.0)
        text = path.read_bytes()
        assert b"\r" not in text
        assert text.decode().splitlines()[0] == "n,k,xi,g"

    def test_round_trip_and_moment_match(self, tiny_run):
        manifest = gio.read_manifest(tiny_run / "manifest.json")
        conf = manifest["config"]
        p = gk.Parameters(
            beta=conf["beta"], n_max=conf["n_max"],
            domain_length=conf["domain_length"], cells=conf["cells"],
            area_target=conf["area"], dt_safety=conf["dt_safety"],
            seed=conf["seed"],
        )
        grid = gk.Grid.from_parameters(p)
        state = gio.state_from_profile(tiny_run / "profile.csv", p)
        m = gk.moments(state, grid, p)
        nm, X, Y, lnX = gio.read_moments_csv(tiny_run / "moments.csv")
        assert m.X == pytest.approx(X, rel=1e-15)
        assert m.A == pytest.approx(manifest["moments"]["A"], rel=1e-15)
        assert float(np.sum(m.X)) == pytest.approx(manifest["moments"]["sum_X"], rel=1e-15)

    def test_lnx_column(self, tmp_path, small_params, small_grid):
        state = gk.State.zeros(small_params)
        state.g[0, 1] = 2.0
        state = gk.State(state.g, validate=False)
        report = make_report(state, small_grid, small_params, gamma=1.0)
        path = tmp_path / "moments.csv"
        gio.write_moments_csv(report, small_params, path)
        rows = path.read_text().strip().splitlines()[1:]
        assert len(rows) == small_params.num_classes
        first = rows[0].split(",")
        assert float(first[3]) == pytest.approx(math.log(float(first[1])), rel=1e-15)
        assert rows[1].endswith(",")       # X = 0 leaves lnX empty


class TestManifest:
    def test_round_trip_lossless(self, tiny_run):
        m1 = gio.read_manifest(tiny_run / "manifest.json")
        text = json.dumps(m1, indent=2, sort_keys=True)
        assert json.loads(text) == m1
        assert m1["schema_version"] == "1"
        assert m1["converged"] is True


class TestCli:
    def test_invalid_cells_is_config_error(self, tmp_path, capsys):
        rc = cli_main(["solve", "--cells", "401", "--out", str(tmp_path)])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_config_file_and_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# fast case\nn_max = 9\ndomain_length = 4\ncells = 40\n"
            "tol = 1e-8\nseed = 3\nbeta = 0.8\n"
        )
        out = tmp_path / "out"
        rc = cli_main(["solve", "--config", str(cfg), "--beta", "1.0",
                       "--out", str(out)])
        assert rc == 0
        manifest = gio.read_manifest(out / "manifest.json")
        assert manifest["config"]["beta"] == 1.0      # flag wins
        assert manifest["config"]["n_max"] == 9       # file value survives

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("betta = 1.0\n")
        assert cli_main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_determinism_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli_main(["solve", *FAST, "--out", str(out1)]) == 0
        assert cli_main(["solve", *FAST, "--out", str(out2)]) == 0
        assert (out1 / "profile.csv").read_bytes() == (out2 / "profile.csv").read_bytes()
        assert (out1 / "moments.csv").read_bytes() == (out2 / "moments.csv").read_bytes()
        m1 = gio.read_manifest(out1 / "manifest.json")
        m2 = gio.read_manifest(out2 / "manifest.json")
        m1.pop("wall_clock_seconds")
        m2.pop("wall_clock_seconds")
        assert m1 == m2

    def test_not_converged_exit_code(self, tmp_path):
        out = tmp_path / "nc"
        rc = cli_main(["solve", *FAST, "--max-steps", "10", "--out", str(out)])
        assert rc == 4
        err = gio.read_manifest(out / "error.json")
        assert err["error"] == "NotConverged"
        assert gio.read_manifest(out / "manifest.json")["converged"] is False

    def test_verify_reproduces_solve(self, tiny_run, capsys):
        rc = cli_main(["verify", "--out", str(tiny_run)])
        assert rc == 0
        verified = gio.read_manifest(tiny_run / "manifest_verified.json")
        assert verified["verified"] is True
        assert "table" in verified["singularities"]

    def test_verify_detects_corruption(self, tmp_path):
        out = tmp_path / "c"
        assert cli_main(["solve", *FAST, "--out", str(out)]) == 0
        manifest = gio.read_manifest(out / "manifest.json")
        manifest["gamma"] *= 1.001
        gio.write_manifest(manifest, out / "manifest.json")
        assert cli_main(["verify", "--out", str(out)]) == 1

    def test_sweep_single_beta(self, tmp_path):
        out = tmp_path / "sweep"
        rc = cli_main(["sweep", *FAST, "--betas", "1.0", "--workers", "1",
                       "--out", str(out)])
        assert rc == 0
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert rows[0] == "beta,gamma,sum_X"
        assert len(rows) == 2
        assert (out / "beta_1" / "manifest.json").exists()

    def test_converge_subcommand(self, tmp_path):
        out = tmp_path / "conv"
        rc = cli_main(["converge", "--n-max", "9", "--domain-length", "4",
                       "--tol", "1e-8", "--seed", "3",
                       "--eps-list", "0.2,0.1", "--out", str(out)])
        assert rc == 0
        rows = (out / "convergence.csv").read_text().strip().splitlines()
        assert rows[0] == "eps,gamma,l1_to_finest"
        assert len(rows) == 3
