import json
import subprocess
import sys

import pytest

from satplace.bench import CSV_HEADER
from satplace.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTopologies:
    def test_lists_all_bundled_names(self, capsys):
        code, out, err = run_cli(capsys, "topologies")
        assert code == 0
        names = out.split()
        assert "Nsfnet" in names
        assert "Tinet" in names
        assert len(names) == 9

    def test_console_script_installed(self):
        proc = subprocess.run(
            ["satplace", "topologies"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "Nsfnet" in proc.stdout


class TestPlace:
    def test_gateway_reliability_document(self, capsys):
        code, out, _ = run_cli(
            capsys, "place", "gateway", "--topo", "Nsfnet", "--gmax", "3"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["stage"] == "gateway"
        assert doc["mode"] == "reliability"
        assert doc["n_nodes"] == 13
        assert 1 <= len(doc["gateway"]["open"]) <= 3
        assert len(doc["gateway"]["assign"]) == 13
        assert len(doc["gateway"]["open_names"]) == len(doc["gateway"]["open"])
        assert doc["objective"] > 0.0
        assert doc["evaluations"] >= 1

    def test_gateway_latency_exact(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "place", "gateway", "--topo", "Nsfnet", "--mode", "latency",
            "--method", "exact",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["method"] == "exact"
        assert doc["evaluations"] == 2**13

    def test_same_seed_prints_identical_bytes(self, capsys):
        argv = (
            "place", "gateway", "--topo", "Nsfnet", "--mode", "latency",
            "--case", "2", "--seed", "3", "--restarts", "5",
        )
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second

    def test_case_changes_the_sampled_instance(self, capsys):
        base = (
            "place", "gateway", "--topo", "Nsfnet", "--gmax", "3", "--seed", "0",
        )
        _, no_case, _ = run_cli(capsys, *base)
        _, with_case, _ = run_cli(capsys, *base, "--case", "4")
        rel_a = json.loads(no_case)["avg_reliability"]
        rel_b = json.loads(with_case)["avg_reliability"]
        assert rel_b < rel_a

    def test_controller_overhead_with_pinned_gateways(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "place", "controller", "--topo", "Nsfnet", "--mode", "overhead",
            "--method", "exact", "--gateways", "0,5",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["gateway"]["open"] == [0, 5]
        assert doc["controller"]["open"]
        assert doc["objective"] > 0.0

    def test_joint_document(self, capsys):
        code, out, _ = run_cli(
            capsys, "place", "joint", "--topo", "Sinet", "--mode", "reliability"
        )
        assert code == 0
        doc = json.loads(out)
        assert set(doc["evaluations"]) == {"gateway", "controller"}
        assert "joint_utility" in doc["metrics"]
        assert doc["metrics"]["joint_utility"] > 0.0

    def test_out_writes_file(self, capsys, tmp_path):
        target = tmp_path / "place.json"
        code, out, _ = run_cli(
            capsys,
            "place", "gateway", "--topo", "Nsfnet", "--out", str(target),
        )
        assert code == 0
        assert f"wrote {target}" in out
        doc = json.loads(target.read_text())
        assert doc["stage"] == "gateway"

    def test_invalid_mode_for_stage(self, capsys):
        code, _, err = run_cli(
            capsys, "place", "gateway", "--topo", "Nsfnet", "--mode", "overhead"
        )
        assert code == 2
        assert err.startswith("error:")

    def test_unknown_topology(self, capsys):
        code, _, err = run_cli(capsys, "place", "gateway", "--topo", "Atlantis")
        assert code == 2
        assert "error:" in err

    def test_invalid_case(self, capsys):
        code, _, err = run_cli(
            capsys, "place", "gateway", "--topo", "Nsfnet", "--case", "7"
        )
        assert code == 2
        assert "case" in err

    def test_exact_refused_on_large_instance(self, capsys):
        code, _, err = run_cli(
            capsys,
            "place", "gateway", "--topo", "Chinanet", "--mode", "latency",
            "--method", "exact",
        )
        assert code == 3
        assert "error:" in err


class TestBench:
    def bench_args(self, out_dir, *extra):
        return (
            "bench", "--exp", "A", "--topo", "Nsfnet", "--trials", "2",
            "--restarts", "5", "--out", str(out_dir), *extra,
        )

    def test_writes_csv_report(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, *self.bench_args(tmp_path))
        assert code == 0
        target = tmp_path / "expA.csv"
        assert f"wrote {target}" in out
        lines = target.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert "objective mean=" in out

    def test_identical_reports_for_identical_seeds(self, capsys, tmp_path):
        run_cli(capsys, *self.bench_args(tmp_path / "one", "--seed", "4"))
        run_cli(capsys, *self.bench_args(tmp_path / "two", "--seed", "4"))
        first = (tmp_path / "one" / "expA.csv").read_bytes()
        second = (tmp_path / "two" / "expA.csv").read_bytes()
        assert first == second

    def test_json_format(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, *self.bench_args(tmp_path, "--format", "json"))
        assert code == 0
        doc = json.loads((tmp_path / "expA.json").read_text())
        assert doc["experiment"] == "A"
        assert doc["rows"]

    def test_no_exact_drops_baseline_rows(self, capsys, tmp_path):
        run_cli(capsys, *self.bench_args(tmp_path, "--no-exact"))
        lines = (tmp_path / "expA.csv").read_text().splitlines()
        data = lines[1 : lines.index("")]
        methods = {line.split(",")[2] for line in data}
        assert methods == {"approx"}

    def test_sweep_flag_reaches_the_grid(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys,
            "bench", "--exp", "B", "--topo", "Nsfnet", "--trials", "1",
            "--sweep", "g_max=2,3", "--out", str(tmp_path),
        )
        assert code == 0
        body = (tmp_path / "expB.csv").read_text()
        assert "Nsfnet|g_max=2," in body
        assert "Nsfnet|g_max=3," in body

    def test_malformed_sweep(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys,
            "bench", "--exp", "A", "--topo", "Nsfnet", "--trials", "1",
            "--sweep", "alpha", "--out", str(tmp_path),
        )
        assert code == 2
        assert "sweep" in err

    def test_unknown_sweep_key(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys,
            "bench", "--exp", "A", "--topo", "Nsfnet", "--trials", "1",
            "--sweep", "gamma=1,2", "--out", str(tmp_path),
        )
        assert code == 2
        assert "sweep" in err

    def test_dump_tables(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, *self.bench_args(tmp_path, "--dump-tables"))
        assert code == 0
        tables_dir = tmp_path / "tables"
        assert (tables_dir / "Nsfnet_d.csv").exists()
        assert (tables_dir / "Nsfnet_r_sat.csv").exists()
        assert (tables_dir / "Nsfnet_r_ctl.csv").exists()
        assert str(tables_dir / "Nsfnet_d.csv") in out


class TestArgparseBehavior:
    def test_missing_subcommand_exits_nonzero(self):
        with pytest.raises(SystemExit):
            main([])

    def test_bad_stage_choice(self):
        with pytest.raises(SystemExit):
            main(["place", "router", "--topo", "Nsfnet"])
