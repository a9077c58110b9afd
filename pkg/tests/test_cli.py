import json

import numpy as np
import pytest

from spherefit.cli import main
from spherefit.experiments import load_design, read_records
from spherefit.geometry import fibonacci_grid


@pytest.fixture()
def eval_file(tmp_path):
    path = tmp_path / "queries.txt"
    grid = fibonacci_grid(50)
    path.write_text("\n".join(" ".join(f"{v:.17g}" for v in row) for row in grid))
    return path


class TestUsage:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "fit" in capsys.readouterr().out

    def test_subcommand_help(self):
        for cmd in ("fit", "cv", "simulate", "diagnose", "quadrature"):
            assert main([cmd, "--help"]) == 0

    def test_unknown_flag_exits_one(self, capsys):
        assert main(["fit", "--bogus"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_inputs_exits_one(self):
        assert main(["fit"]) == 1

    def test_runtime_error_exits_two(self, tmp_path):
        missing = tmp_path / "nope.txt"
        assert main(["fit", "--points", str(missing)]) == 2


class TestFit:
    def test_ki_roundtrip(self, tmp_path, eval_file):
        out = tmp_path / "pred.csv"
        code = main([
            "fit", "--sampler", "tdesign", "--t", "7",
            "--eval-points", str(eval_file), "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,y,z,prediction"
        assert len(lines) == 51

    def test_wsf_with_filter(self, tmp_path, eval_file):
        out = tmp_path / "pred.csv"
        model_out = tmp_path / "model.csv"
        code = main([
            "fit", "--sampler", "tdesign", "--t", "7", "--noise-delta", "0.5",
            "--filter", "cutoff", "--param", "0.01",
            "--eval-points", str(eval_file), "--out", str(out),
            "--model-out", str(model_out),
        ])
        assert code == 0
        assert model_out.exists()
        assert "cutoff" in model_out.read_text()

    def test_labeled_point_file(self, tmp_path, eval_file):
        design = load_design(7)
        labeled = tmp_path / "train.txt"
        rows = [
            f"{x:.17g} {y:.17g} {z:.17g} 1.0" for x, y, z in design.coords
        ]
        labeled.write_text("\n".join(rows))
        out = tmp_path / "pred.csv"
        code = main([
            "fit", "--points", str(labeled), "--filter", "tikhonov",
            "--param", "0.1", "--eval-points", str(eval_file),
            "--out", str(out),
        ])
        assert code == 0

    def test_param_l_landweber(self, tmp_path, eval_file):
        out = tmp_path / "pred.csv"
        code = main([
            "fit", "--sampler", "tdesign", "--t", "7", "--param-l", "8",
            "--eval-points", str(eval_file), "--out", str(out),
        ])
        assert code == 0


class TestQuadrature:
    def test_design_rule(self, tmp_path):
        out = tmp_path / "rule.csv"
        code = main([
            "quadrature", "--sampler", "tdesign", "--t", "11",
            "--degree", "auto", "--out", str(out),
        ])
        assert code == 0
        text = out.read_text()
        assert text.startswith("# degree=11")

    def test_random_points_auto_degree(self, tmp_path):
        out = tmp_path / "rule.csv"
        code = main([
            "quadrature", "--sampler", "random", "--n", "200", "--seed", "5",
            "--out", str(out),
        ])
        assert code == 0
        assert out.read_text().startswith("# degree=")


class TestDiagnose:
    def test_prints_conditioning(self, capsys, tmp_path):
        out = tmp_path / "spectrum.csv"
        code = main([
            "diagnose", "--sampler", "tdesign", "--t", "7", "--out", str(out),
        ])
        assert code == 0
        text = capsys.readouterr().out
        assert "cnkm=" in text and "mesh_norm=" in text
        assert out.read_text().startswith("index,eigenvalue")


class TestCv:
    def test_split_mode(self, tmp_path):
        out = tmp_path / "scores.csv"
        code = main([
            "cv", "--sampler", "random", "--n", "150", "--seed", "3",
            "--noise-delta", "0.3", "--filter", "tikhonov",
            "--grid", "1.0,0.1,0.01", "--split", "0.5", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "lambda,score,chosen"
        assert sum(line.endswith(",1") for line in lines[1:]) == 1

    def test_val_design_mode(self, tmp_path):
        out = tmp_path / "scores.csv"
        code = main([
            "cv", "--sampler", "tdesign", "--t", "19", "--noise-delta", "0.5",
            "--filter", "landweber", "--val-t", "11", "--out", str(out),
        ])
        assert code == 0

    def test_kfold_mode(self, tmp_path):
        out = tmp_path / "scores.csv"
        code = main([
            "cv", "--sampler", "tdesign", "--t", "11", "--noise-delta", "0.3",
            "--filter", "tikhonov", "--folds", "3", "--grid", "1.0,0.1",
            "--out", str(out),
        ])
        assert code == 0


class TestSimulate:
    def test_sim4_writes_results(self, tmp_path):
        out = tmp_path / "results.csv"
        code = main([
            "simulate", "--scenario", "sim4", "--sampler", "tdesign",
            "--sizes", "3,7", "--delta", "0.5", "--trials", "1",
            "--seed", "9", "--out", str(out),
        ])
        assert code == 0
        records = read_records(out)
        assert {r.n_train for r in records} == {8, 34}

    def test_rerun_byte_identical(self, tmp_path):
        args = [
            "simulate", "--scenario", "sim2", "--sampler", "tdesign",
            "--sizes", "7", "--delta", "0.3", "--trials", "1", "--seed", "4",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_config_prefills_flags(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "simulate": {
                "scenario": "sim4", "sizes": "3", "delta": [0.5],
                "trials": 1, "seed": 2, "sampler": ["tdesign"],
            }
        }))
        out = tmp_path / "results.csv"
        code = main([
            "--config", str(config), "simulate", "--scenario", "sim4",
            "--out", str(out),
        ])
        assert code == 0
        records = read_records(out)
        assert {r.n_train for r in records} == {8}
