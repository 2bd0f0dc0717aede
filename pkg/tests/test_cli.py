import json
import os
import subprocess
import sys

import pytest

from momentlab.random_instances import random_curve_supported


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "momentlab", *argv], capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def fixture_path(tmp_path_factory):
    import random

    f = random_curve_supported(random.Random(0), 3, 2, 2, 4, 2)
    path = tmp_path_factory.mktemp("fixtures") / "g.json"
    path.write_text(json.dumps(f.to_json()))
    return str(path)


class TestSubcommands:
    def test_exponents_csv_reference_row(self):
        r = run_cli(
            "exponents", "--k", "2", "--p0", "4", "--c0", "2",
            "--eps", "0.01", "--p-max", "40", "--format", "csv",
        )
        assert r.returncode == 0
        rows = [line for line in r.stdout.splitlines() if line and not line.startswith("#")]
        p8 = next(line for line in rows if line.startswith("8,"))
        assert ",11/8," in p8

    def test_count_vinogradov(self):
        r = run_cli("count-vinogradov", "--s", "2", "--k", "2", "--X", "2")
        data = json.loads(r.stdout)
        assert r.returncode == 0 and data["count"] == 6
        assert data["version"] and data["config"]["s"] == 2

    def test_count_vinogradov_with_congruence(self):
        r = run_cli(
            "count-vinogradov", "--s", "3", "--k", "2", "--X", "6",
            "--mod-p", "5", "--residue", "2",
        )
        data = json.loads(r.stdout)
        assert data["count_pinned_residue"] <= data["count_distinct_mod_p"] <= data["count"]

    def test_linnik_exhaustive(self):
        r = run_cli("linnik", "--k", "2", "--p", "3", "--exhaustive")
        data = json.loads(r.stdout)
        assert r.returncode == 0
        assert data["max_count"] <= data["bound"] == 6

    def test_karatsuba_trace(self):
        r = run_cli("karatsuba", "--s", "4", "--k", "2", "--X", "8")
        data = json.loads(r.stdout)
        assert r.returncode == 0
        assert data["symbolic_exponent"] == data["closed_form_exponent"]
        assert any(not s.get("base_case") for s in data["steps"])

    def test_counting_lemma(self):
        r = run_cli(
            "counting-lemma", "--q", "3", "--k", "2", "--delta-exp", "2", "--kappa-exp", "1"
        )
        data = json.loads(r.stdout)
        assert r.returncode == 0 and data["worst_count"] <= data["bound"]

    def test_ratio_main_lemma_reverse_square(self, fixture_path):
        r = run_cli("ratio", "--input", fixture_path, "--p", "8", "--delta-exp", "2")
        assert r.returncode == 0
        data = json.loads(r.stdout)
        assert 0 < data["ratio"] <= data["trivial_ceiling"] * (1 + 1e-9)

        r = run_cli("main-lemma", "--input", fixture_path, "--p", "8", "--delta-exp", "2")
        assert r.returncode == 0 and json.loads(r.stdout)["holds"]

        r = run_cli(
            "reverse-square", "--input", fixture_path, "--delta-exp", "2", "--kappa-exp", "1"
        )
        assert r.returncode == 0 and json.loads(r.stdout)["recursion_holds"]

    def test_pigeonhole_report_deterministic(self):
        args = (
            "pigeonhole-report", "--q", "3", "--k", "2", "--delta-exp", "2",
            "--p", "8", "--seed", "5",
        )
        a, b = run_cli(*args), run_cli(*args)
        assert a.returncode == 0
        assert a.stdout == b.stdout
        data = json.loads(a.stdout)
        assert data["n_buckets"] <= data["class_bound"]


class TestVerifyAll:
    def test_degree_one_suite_exits_clean(self):
        # k = 1 runs the arithmetic/transform/counting suites only, quickly
        r = run_cli("verify-all", "--q", "3", "--k", "1")
        assert r.returncode == 0
        data = json.loads(r.stdout)
        assert data["passed"] and all(s["passed"] for s in data["suites"])
        assert data["threads"] >= 1
        assert "PASS" in r.stderr


class TestFailureModes:
    def test_missing_fixture_is_usage_error_without_partial_output(self, tmp_path):
        out = tmp_path / "report.json"
        r = run_cli(
            "ratio", "--input", str(tmp_path / "missing.json"),
            "--p", "8", "--delta-exp", "2", "--output", str(out),
        )
        assert r.returncode == 2
        assert not out.exists()
        assert "usage" in r.stderr

    def test_nonprime_q_rejected(self):
        r = run_cli("verify-all", "--q", "4", "--k", "2")
        assert r.returncode == 2

    def test_budget_exit_code(self):
        r = run_cli(
            "count-vinogradov", "--s", "8", "--k", "2", "--X", "50", "--budget", "100"
        )
        assert r.returncode == 3
        assert "budget" in r.stderr

    def test_bad_fixture_support_is_verification_failure(self, tmp_path):
        from momentlab.geometry import ball
        from momentlab.stepfn import ModulatedStep

        path = tmp_path / "bad.json"
        path.write_text(json.dumps(ModulatedStep.indicator(ball(3, 2, 0)).to_json()))
        r = run_cli("ratio", "--input", str(path), "--p", "8", "--delta-exp", "2")
        assert r.returncode == 4
        assert "verification-failure" in r.stderr

    def test_output_file_written_atomically(self, tmp_path):
        out = tmp_path / "r.json"
        r = run_cli(
            "count-vinogradov", "--s", "2", "--k", "2", "--X", "3", "--output", str(out)
        )
        assert r.returncode == 0
        data = json.loads(out.read_text())
        assert data["count"] == 15
        assert not os.path.exists(str(out) + ".tmp")
