"""End-to-end runs of the ``circspec`` command line."""
import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from circspec import io
from circspec.analytic import spectral_law, wishart_cdf
from circspec.cli import main
from circspec.graphs import GraphSpec, surrogate_params
from circspec.model import ModelParams
from circspec.presets import FIG5_PARAMS, PRESETS


def run(args):
    return main([str(a) for a in args])


def read(path):
    return io.read_csv(path)


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


class TestLaw:
    def test_unit_n1_stdout(self, capsys):
        assert run(["law", "--n", 1, "--sigma2", 1, "--tau2", 1]) == 0
        out = capsys.readouterr().out
        nu_part, t_part = out.split("\n\n")
        assert nu_part.splitlines() == ["k,nu", "1,0.0", "2,0.0"]
        assert t_part.splitlines() == ["k,l,T", "1,1,1.0", "1,2,0.0", "2,1,0.0", "2,2,1.0"]

    def test_files_and_meta(self, tmp_path):
        prefix = tmp_path / "fig1"
        assert run(["law", "--preset", "fig1", "--out", prefix]) == 0
        _, nu = read(f"{prefix}.nu.csv")
        _, t = read(f"{prefix}.T.csv")
        law = spectral_law(PRESETS["fig1"]["params"])
        np.testing.assert_array_equal(nu[:, 1], law.nu)
        np.testing.assert_array_equal(t[:, 2].reshape(10, 10), law.T)
        meta = json.loads((tmp_path / "fig1.meta.json").read_text())
        assert meta["command"] == "law" and "version" in meta and "seed" in meta
        assert ModelParams.from_dict(meta["params"]) == PRESETS["fig1"]["params"]

    def test_json(self, capsys):
        assert run(["law", "--n", 2, "--u", "1,2", "--sigma2", "1/4", "--tau2", "1", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n"] == 2 and len(doc["T"]) == 4
        assert doc["nu"][0] == 3.0

    def test_graph_surrogate(self, capsys):
        assert run(["law", "--kind", "undirected", "--n", 50, "--p1", "1/3", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert ModelParams.from_dict(doc["params"]) == surrogate_params(GraphSpec(50, "undirected", 1 / 3))

    def test_lf_line_endings(self, tmp_path):
        run(["law", "--preset", "fig5", "--out", tmp_path / "x"])
        raw = (tmp_path / "x.nu.csv").read_bytes()
        assert b"\r" not in raw and raw.startswith(b"k,nu\n")


class TestDensity:
    def test_fig5_wishart_grid(self, tmp_path):
        prefix = tmp_path / "w"
        assert run(["density", "--preset", "fig5", "--density", "wishart", "--grid", "0:200:0.5", "--out", prefix]) == 0
        header, data = read(f"{prefix}.density.csv")
        assert header == ["x", "density"]
        assert data.shape == (401, 2)
        x, d = data.T
        assert np.all(d >= 0)
        tail = 1.0 - float(wishart_cdf(spectral_law(FIG5_PARAMS), 200.0))
        mass = np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(x)) + tail
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_pair_grid(self, capsys):
        assert run(["density", "--preset", "fig1", "--density", "pair", "--eigen", 2, "--grid=-5:5:1", "--grid-y", "0:2:1"]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows[0] == ["x", "y", "density"] and len(rows) == 1 + 11 * 3

    def test_points(self, tmp_path, capsys):
        pts = tmp_path / "pts.csv"
        io.write_csv(pts, [f"{p}_{j}" for j in (1, 2) for p in ("re", "im")], [[0, 0, 0, 0], [1, 0, -1, 0.5]])
        assert run(["density", "--n", 2, "--sigma2", 1, "--tau2", 1, "--density", "unordered", "--points", pts]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows[0][-2:] == ["density", "log_density"]
        assert float(rows[1][4]) == pytest.approx((2 * np.pi * 2) ** -2)

    def test_exclusion_marginal(self, capsys):
        code = run(["density", "--kind", "directed", "--n", 100, "--p1", "0.1", "--density", "im", "--grid=-1:1:0.5", "--exclude-forced-real"])
        assert code == 0

    def test_singular_exit_3(self, capsys):
        code = run(["density", "--kind", "directed", "--n", 100, "--p1", "0.1", "--density", "im", "--grid=-1:1:0.5"])
        assert code == 3
        err = last_error(capsys)
        assert err["exit_code"] == 3 and err["columns"]

    def test_capacity_exit_4(self, tmp_path, capsys):
        pts = tmp_path / "p.csv"
        io.write_csv(pts, [f"c{k}" for k in range(18)], [[0.0] * 18])
        assert run(["density", "--n", 9, "--sigma2", 1, "--tau2", 1, "--density", "unordered", "--points", pts]) == 4
        assert last_error(capsys)["error"] == "CapacityError"

    def test_missing_grid_exit_2(self, capsys):
        assert run(["density", "--preset", "fig5", "--density", "wishart"]) == 2
        assert last_error(capsys)["exit_code"] == 2


class TestSimulate:
    def test_outputs(self, tmp_path):
        prefix = tmp_path / "s"
        assert run(["simulate", "--preset", "fig5", "--m", 500, "--seed", 3, "--out", prefix]) == 0
        header, samples = read(f"{prefix}.samples.csv")
        assert header == ["w"] and samples.shape == (1500, 1)
        hheader, hist = read(f"{prefix}.hist.csv")
        assert hheader == ["left", "right", "count", "density"]
        assert hist[:, 2].sum() == 1500
        meta = json.loads((tmp_path / "s.meta.json").read_text())
        assert meta["seed"] == 3 and meta["m"] == 500

    def test_ordered_eta_header(self, tmp_path):
        prefix = tmp_path / "e"
        run(["simulate", "--preset", "fig1", "--m", 10, "--ordered", "true", "--out", prefix])
        header, data = read(f"{prefix}.samples.csv")
        assert header[:3] == ["re_1", "im_1", "re_2"] and data.shape == (10, 10)

    def test_streaming_matches_materialised(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        common = ["simulate", "--preset", "fig5", "--m", 9000, "--seed", 1, "--grid", "0:400:2"]
        run(common + ["--out", a])
        run(common + ["--no-samples", "--out", b])
        assert (tmp_path / "a.hist.csv").read_bytes() == (tmp_path / "b.hist.csv").read_bytes()

    def test_memory_budget_exit_4(self, capsys):
        assert run(["simulate", "--preset", "fig1", "--m", 1000, "--memory-budget", 100]) == 4

    def test_bad_bool_exit_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["simulate", "--preset", "fig1", "--m", 10, "--ordered", "maybe"])
        assert info.value.code == 2
        assert last_error(capsys)["exit_code"] == 2


class TestGraphAndCompare:
    def test_fig7_end_to_end(self, tmp_path, capsys):
        prefix = tmp_path / "g"
        assert run(["graph", "--preset", "fig7", "--seed", 1, "--out", prefix, "--columns"]) == 0
        header, spectrum = read(f"{prefix}.spectrum.csv")
        assert header == ["re", "im"] and spectrum.shape == (200_000, 2)
        params = ModelParams.from_json((tmp_path / "g.params.json").read_text())
        assert params == surrogate_params(GraphSpec(100, "directed", 0.1))
        _, cols = read(f"{prefix}.columns.csv")
        assert cols.shape == (2000, 200)

        code = run([
            "compare", "--params", f"{prefix}.params.json", "--samples", f"{prefix}.spectrum.csv",
            "--density", "im", "--exclude-forced-real", "--drop-zero", "--out", tmp_path / "c",
        ])
        assert code == 0
        report = json.loads((tmp_path / "c.compare.json").read_text())
        assert report["ks"] < 0.02
        rheader, resid = read(tmp_path / "c.residuals.csv")
        assert rheader == ["left", "right", "count", "expected", "residual"]
        assert resid[:, 2].sum() == report["n_samples"]

    def test_compare_wishart_from_eta(self, tmp_path, capsys):
        prefix = tmp_path / "s"
        run(["simulate", "--preset", "fig5", "--observable", "eta", "--ordered", "false", "--m", 4000, "--out", prefix])
        assert run(["compare", "--preset", "fig5", "--samples", f"{prefix}.samples.csv", "--density", "wishart"]) == 0
        assert json.loads(capsys.readouterr().out)["ks"] < 0.03

    def test_graph_needs_kind(self, capsys):
        assert run(["graph", "--n", 10, "--m", 5]) == 2


class TestRunConfig:
    def test_refuses_overwrite(self, tmp_path, capsys):
        args = ["law", "--preset", "fig5", "--out", tmp_path / "x"]
        assert run(args) == 0
        assert run(args) == 2
        assert "force" in last_error(capsys)["message"]
        assert run(args + ["--force"]) == 0

    def test_config_reproduces_artifacts(self, tmp_path):
        assert run(["graph", "--preset", "fig10a", "--m", 300, "--seed", 5, "--out", tmp_path / "a"]) == 0
        config = json.loads((tmp_path / "a.meta.json").read_text())["config"]
        config["out"] = str(tmp_path / "b")
        (tmp_path / "cfg.json").write_text(json.dumps(config))
        assert run(["--config", tmp_path / "cfg.json", "graph"]) == 0
        for name in ("spectrum.csv", "params.json"):
            assert (tmp_path / f"a.{name}").read_bytes() == (tmp_path / f"b.{name}").read_bytes()

    def test_config_supplies_required(self, tmp_path, capsys):
        (tmp_path / "cfg.json").write_text(json.dumps({"preset": "fig5", "density": "wishart", "grid": "0:1:0.5"}))
        assert run(["--config", tmp_path / "cfg.json", "density"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 4

    def test_config_command_mismatch(self, tmp_path, capsys):
        (tmp_path / "cfg.json").write_text(json.dumps({"command": "graph"}))
        assert run(["--config", tmp_path / "cfg.json", "law", "--preset", "fig5"]) == 2

    def test_missing_model(self, capsys):
        assert run(["law"]) == 2

    def test_params_file(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        path.write_text(FIG5_PARAMS.to_json())
        assert run(["law", "--params", path, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert ModelParams.from_dict(doc["params"]) == FIG5_PARAMS

    def test_unreadable_params(self, tmp_path, capsys):
        assert run(["law", "--params", tmp_path / "nope.json"]) == 2

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "circspec", "--help"], capture_output=True, text=True)
        assert out.returncode == 0
        for cmd in ("law", "density", "simulate", "graph", "compare"):
            assert cmd in out.stdout
