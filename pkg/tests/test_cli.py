from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from cotypelab import PointMap, save_map, space_from_json

GOLDEN = Path(__file__).parent / "golden"


def run_cli(*argv, check=False):
    proc = subprocess.run(
        [sys.executable, "-m", "cotypelab", *argv],
        capture_output=True,
        text=True,
    )
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
    return proc


class TestGolden:
    def test_analyze_cantor2(self):
        proc = run_cli("analyze", "--gen", "cantor-level=2", "--json", check=True)
        assert proc.stdout == (GOLDEN / "analyze_cantor2.json").read_text()

    def test_analyze_random_ultrametric(self):
        proc = run_cli("analyze", "--gen", "random-ultrametric=8,seed=7", "--json", check=True)
        assert proc.stdout == (GOLDEN / "analyze_rum8.json").read_text()
        payload = json.loads(proc.stdout)
        assert payload["ultrametric"]["ok"] is True
        assert payload["separation"]["c_sep"] == 1.0

    def test_cotype_exhaustive_hypercube(self):
        proc = run_cli(
            "cotype", "--gen", "hypercube=2", "-p", "2", "-q", "2", "-n", "1",
            "-m", "4", "--strategy", "exhaustive", "--json", check=True,
        )
        assert proc.stdout == (GOLDEN / "cotype_hypercube2_exhaustive.json").read_text()


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ("analyze", "--gen", "random-euclidean=7,3,seed=11", "--json"),
            (
                "cotype", "--gen", "random-ultrametric=5,seed=2", "-q", "2", "-n", "1",
                "-m", "4", "--strategy", "local", "--budget", "200", "--seed", "6",
                "--certify", "--json",
            ),
            ("isoperimetry", "-n", "1", "-m", "8", "--exhaustive", "--json"),
            ("isoperimetry", "-n", "1", "-m", "8", "--samples", "20", "--seed", "3", "--json"),
            ("tree", "--gen", "cantor-level=2", "--json"),
            ("chain", "--gen", "cycle=8", "-a", "0", "-b", "4", "--epsilon", "1.5", "--json"),
        ],
    )
    def test_byte_identical_reruns(self, argv):
        first = run_cli(*argv, check=True)
        second = run_cli(*argv, check=True)
        assert first.stdout == second.stdout

    def test_threads_do_not_change_output(self):
        base = ("analyze", "--gen", "random-euclidean=6,2,seed=4", "--json")
        a = run_cli(*base, "--threads", "1", check=True)
        b = run_cli(*base, "--threads", "4", check=True)
        assert a.stdout == b.stdout

    def test_threads_env_fallback(self):
        import os

        env = dict(os.environ, COTYPELAB_THREADS="3")
        proc = subprocess.run(
            [sys.executable, "-m", "cotypelab", "analyze", "--gen", "cycle=4", "--json"],
            capture_output=True, text=True, env=env,
        )
        assert proc.returncode == 0
        plain = run_cli("analyze", "--gen", "cycle=4", "--json", check=True)
        assert proc.stdout == plain.stdout


class TestExitCodes:
    def test_corrupted_matrix_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "labels": ["a", "b", "c"],
            "matrix": [[0, 1, 3.5], [1, 0, 2], [3.5, 2, 0]],
        }))
        proc = run_cli("analyze", "--input", str(bad))
        assert proc.returncode == 2
        assert "TriangleViolation" in proc.stderr

    def test_odd_m_isoperimetry_exits_2(self):
        proc = run_cli("isoperimetry", "-n", "1", "-m", "5", "--exhaustive")
        assert proc.returncode == 2

    def test_cotype_q1_without_m_exits_2(self):
        proc = run_cli("cotype", "--gen", "cycle=4", "-q", "1", "-n", "1",
                       "--strategy", "exhaustive")
        assert proc.returncode == 2

    def test_missing_seed_for_random_exits_2(self):
        proc = run_cli("cotype", "--gen", "cycle=4", "-q", "2", "-n", "1",
                       "--strategy", "random", "--budget", "10")
        assert proc.returncode == 2

    def test_tree_below_c_sep_exits_1(self):
        proc = run_cli("tree", "--gen", "cantor-level=2", "-C", "1.5")
        assert proc.returncode == 1
        assert "NoValidSplit" in proc.stderr

    def test_usage_error_exits_2(self):
        proc = run_cli("analyze")
        assert proc.returncode == 2


class TestCommands:
    def test_chain_found_and_not_found(self):
        found = json.loads(run_cli(
            "chain", "--gen", "cycle=6", "-a", "0", "-b", "3", "--epsilon", "1.5",
            "--json", check=True).stdout)
        assert found["chain"] == [0, 1, 2, 3]
        missing = json.loads(run_cli(
            "chain", "--gen", "cycle=6", "-a", "0", "-b", "3", "--epsilon", "1.0",
            "--json", check=True).stdout)
        assert missing["found"] is False and missing["chain"] is None

    def test_gen_round_trip(self, tmp_path):
        out = tmp_path / "space.json"
        run_cli("gen", "--gen", "dyadic=3", "--output", str(out), check=True)
        space = space_from_json(out.read_text())
        assert len(space) == 4
        proc = run_cli("analyze", "--input", str(out), "--json", check=True)
        assert json.loads(proc.stdout)["points"] == 4

    def test_gen_csv_round_trip(self, tmp_path):
        out = tmp_path / "space.csv"
        run_cli("gen", "--gen", "cycle=5", "--output", str(out), check=True)
        proc = run_cli("analyze", "--input", str(out), "--json", check=True)
        assert json.loads(proc.stdout)["points"] == 5

    def test_isoperimetry_csv_schema(self):
        proc = run_cli("isoperimetry", "-n", "1", "-m", "4", "--exhaustive", check=True)
        lines = proc.stdout.strip().split("\n")
        assert lines[0] == "n,m,size,min_boundary,linfty_bound,bl_bound,verdict"
        assert len(lines) == 1 + 3  # sizes 0, 1, 2
        assert all(line.endswith("pass") for line in lines[1:])

    def test_tree_dot_output(self):
        proc = run_cli("tree", "--gen", "cantor-level=1", "--format", "dot", check=True)
        assert proc.stdout.startswith("digraph")
        assert '"r0"' in proc.stdout

    def test_transfer_check_and_verify(self, tmp_path):
        space_path = tmp_path / "x.json"
        run_cli("gen", "--gen", "random-euclidean=5,2,seed=3", "--output",
                str(space_path), check=True)
        space = space_from_json(space_path.read_text())
        pmap = PointMap(space, space, tuple(range(len(space))))
        map_path = tmp_path / "map.json"
        save_map(pmap, map_path)
        check = json.loads(run_cli(
            "transfer", "--map", str(map_path), "--kind", "bilip", "--L", "1.0",
            "--json", check=True).stdout)
        assert check["check"]["passed"] is True
        verify = json.loads(run_cli(
            "transfer", "--map", str(map_path), "--kind", "bilip", "--verify",
            "--gamma", "3.0", "-p", "2", "-q", "2", "-n", "1", "-m", "4",
            "--samples", "5", "--seed", "1", "--json", check=True).stdout)
        assert verify["verify"]["all_hold"] is True

    def test_cotype_save_f(self, tmp_path):
        out = tmp_path / "f.json"
        run_cli(
            "cotype", "--gen", "cycle=4", "-q", "2", "-n", "1", "-m", "4",
            "--strategy", "random", "--budget", "10", "--seed", "2",
            "--save-f", str(out), check=True,
        )
        payload = json.loads(out.read_text())
        assert payload["n"] == 1 and payload["m"] == 4
        assert len(payload["values"]) == 4

    def test_human_output_mentions_gamma(self):
        proc = run_cli(
            "cotype", "--gen", "cycle=4", "-q", "2", "-n", "1", "-m", "4",
            "--strategy", "exhaustive", check=True,
        )
        assert "best implied gamma" in proc.stdout
