import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import spectramap as sm
from spectramap.cli import main


def run_cli(*args):
    return main([str(a) for a in args])


class TestGenData:
    def test_blobs_round_trip(self, tmp_path):
        out = tmp_path / "blobs.csv"
        assert run_cli("gen-data", "--gen", "blobs", "--n", 40, "--out", out) == 0
        ds = sm.load_csv(out, has_labels=True)
        assert ds.data.n == 40
        assert set(ds.labels.tolist()) == {0, 1}

    def test_moons(self, tmp_path):
        out = tmp_path / "moons.csv"
        assert run_cli("gen-data", "--gen", "moons", "--n", 30, "--out", out) == 0
        ds = sm.load_csv(out, has_labels=True)
        assert ds.data.n == 30


class TestEmbed:
    def _embed(self, tmp_path, *extra):
        out = tmp_path / "run"
        code = run_cli(
            "embed", "--gen", "blobs", "--n", 60, "--k", 8, "--epochs", 20,
            "--out-dir", out, *extra,
        )
        return code, out

    def test_outputs_and_shapes(self, tmp_path):
        code, out = self._embed(tmp_path)
        assert code == 0
        emb = sm.load_csv(out / "embedding.csv", has_labels=True)
        assert emb.data.n == 60 and emb.data.dim == 2
        assert (out / "trace.jsonl").exists()
        assert (out / "run.json").exists()
        report = json.loads((out / "run.json").read_text())
        assert report["final_total"] < report["initial_total"]

    def test_svg_well_formed_one_marker_per_point(self, tmp_path):
        code, out = self._embed(tmp_path)
        assert code == 0
        tree = ET.parse(out / "scatter.svg")
        circles = tree.getroot().findall(
            ".//{http://www.w3.org/2000/svg}circle"
        )
        assert len(circles) == 60

    def test_random_init_runs_identical(self, tmp_path):
        out = tmp_path / "run"
        args = (
            "embed", "--gen", "blobs", "--n", 40, "--k", 6, "--epochs", 5,
            "--init", "random", "--seed", 7, "--out-dir", out,
        )
        assert run_cli(*args) == 0
        names = ("embedding.csv", "trace.jsonl", "scatter.svg", "run.json")
        first = {name: (out / name).read_bytes() for name in names}
        assert run_cli(*args) == 0
        for name in names:
            assert (out / name).read_bytes() == first[name]

    def test_gaussian_trace_matches_quadratic_form(self, tmp_path):
        code, out = self._embed(
            tmp_path, "--kernel", "gaussian", "--tau", "1.0", "--n", 50,
        )
        assert code == 0
        for line in (out / "trace.jsonl").read_text().strip().splitlines():
            rec = json.loads(line)
            assert rec["laplacian_form"] == pytest.approx(
                rec["attract"], rel=1e-10
            )

    def test_dump_graph(self, tmp_path):
        code, out = self._embed(tmp_path, "--dump-graph")
        assert code == 0
        V = sm.SimilarityGraph.load_edge_list(out / "graph.txt")
        assert V.n == 60

    def test_csv_input(self, tmp_path):
        data = tmp_path / "in.csv"
        ds = sm.gen_blobs(20, [(0, 0), (8, 0)], 0.5, 3)
        sm.save_csv(ds, data)
        out = tmp_path / "run"
        code = run_cli(
            "embed", "--input", data, "--has-labels", "--k", 5,
            "--epochs", 5, "--out-dir", out,
        )
        assert code == 0
        emb = sm.load_csv(out / "embedding.csv", has_labels=True)
        assert np.array_equal(emb.labels, ds.labels)

    def test_bad_k_reports_module(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = run_cli(
            "embed", "--gen", "blobs", "--n", 10, "--k", 10, "--out-dir", out
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "graph" in err and "k=10" in err


class TestVerify:
    def test_default_claims_pass(self, tmp_path):
        out = tmp_path / "verify"
        code = run_cli("verify", "--draws", 20000, "--out-dir", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["all_passed"] is True
        assert (out / "report.txt").exists()

    def test_claim_filter_runs_single_claim(self, tmp_path):
        out = tmp_path / "verify"
        code = run_cli("verify", "--claims", "lemmaA1", "--out-dir", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert {r["claim"] for r in report["reports"]} == {"lemmaA1"}

    def test_sabotage_exits_nonzero(self, tmp_path, capsys):
        out = tmp_path / "verify"
        code = run_cli(
            "verify", "--claims", "thm3.1a", "--sabotage", "laplacian-sign",
            "--out-dir", out,
        )
        assert code == 1
        assert "thm3.1a" in capsys.readouterr().err

    def test_verify_deterministic(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli("verify", "--draws", 20000, "--out-dir", out) == 0
            outs.append(out)
        assert (outs[0] / "report.json").read_bytes() == (
            outs[1] / "report.json"
        ).read_bytes()


class TestFitAb:
    def test_prints_values(self, capsys):
        assert run_cli("fit-ab", "--min-dist", "0.1") == 0
        out = capsys.readouterr().out
        assert "a=1.57" in out and "b=0.89" in out and "rmse=" in out

    def test_zero_min_dist(self, capsys):
        assert run_cli("fit-ab", "--min-dist", "0.0") == 0
        out = capsys.readouterr().out
        assert "a=1.93" in out


class TestConfigFile:
    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("min-dist=0.5\n")
        assert run_cli("fit-ab", "--config", cfg) == 0
        out1 = capsys.readouterr().out
        assert "min_dist=0.5" in out1
        # explicit flag beats the file
        assert run_cli("fit-ab", "--config", cfg, "--min-dist", "0.1") == 0
        out2 = capsys.readouterr().out
        assert "min_dist=0.1" in out2

    def test_config_applies_to_embed(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("epochs=3\nk=6\n")
        out = tmp_path / "run"
        code = run_cli(
            "embed", "--gen", "blobs", "--n", 40, "--config", cfg,
            "--out-dir", out,
        )
        assert code == 0
        report = json.loads((out / "run.json").read_text())
        assert report["config"]["epochs"] == 3
        assert report["config"]["k"] == 6
