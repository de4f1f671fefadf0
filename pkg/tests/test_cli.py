import json
import shutil
import subprocess

import pytest

from conftest import FIXTURES

FITCH_MI = shutil.which("fitch-mi")

pytestmark = pytest.mark.skipif(FITCH_MI is None, reason="fitch-mi not installed")


def run(*args, stdin: str = ""):
    return subprocess.run(
        [FITCH_MI, *args], input=stdin, capture_output=True, text=True, timeout=120
    )


def test_check_fixture_exits_zero():
    proc = run("check", str(FIXTURES / "peano.proof"))
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines == [
        "modus-ponens: Proved",
        "sum-zero-rhs: Proved",
        "sum-s-rhs: Proved",
        "sum-total-comm: Proved",
    ]


def test_check_broken_fixture_reports_line():
    proc = run("check", str(FIXTURES / "peano_broken.proof"))
    assert proc.returncode == 1
    assert "sum-total-comm: Failed (line 71)" in proc.stdout


def test_check_json_diagnostics():
    proc = run("check", "--diagnostics", "json", str(FIXTURES / "peano.proof"))
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["ok"] is True
    assert len(data["theorems"]) == 4


def test_check_no_auto_fails_on_prove_lines():
    proc = run("check", "--no-auto", str(FIXTURES / "peano.proof"))
    assert proc.returncode == 1


def test_missing_file_is_a_file_error():
    proc = run("check", "no-such-file.proof")
    assert proc.returncode == 2


def test_parse_error_is_a_file_error(tmp_path):
    bad = tmp_path / "bad.proof"
    bad.write_text("data data data\n", encoding="utf-8")
    proc = run("check", str(bad))
    assert proc.returncode == 2


def test_unknown_option_is_a_usage_error():
    proc = run("check", "--frobnicate", str(FIXTURES / "peano.proof"))
    assert proc.returncode == 64


def test_unknown_command_is_a_usage_error():
    proc = run("frobnicate")
    assert proc.returncode == 64


def test_prove_with_script_writes_recheckable_module(tmp_path):
    out = tmp_path / "elaborated.proof"
    proc = run(
        "prove",
        str(FIXTURES / "peano.proof"),
        "sum-total-comm",
        "--script", str(FIXTURES / "sum_total_comm.responses"),
        "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    assert "My goal is" in proc.stdout
    again = run("check", str(out))
    assert again.returncode == 0

    full = tmp_path / "full.proof"
    proc = run(
        "prove",
        str(FIXTURES / "peano.proof"),
        "sum-total-comm",
        "--script", str(FIXTURES / "sum_total_comm.responses"),
        "--elaborate", "full",
        "--out", str(full),
    )
    assert proc.returncode == 0
    again = run("check", "--no-auto", str(full))
    assert again.returncode == 0


def test_prove_reads_stdin_commands():
    proc = run(
        "prove", str(FIXTURES / "peano.proof"), "sum-total-comm", stdin="abort\n"
    )
    assert proc.returncode == 1
    assert "failed" in proc.stderr


def test_prove_exhausted_responses_fail():
    proc = run("prove", str(FIXTURES / "peano.proof"), "sum-total-comm", stdin="")
    assert proc.returncode == 1
    assert "no more responses" in proc.stderr


def test_prove_skip_emits_gapped_module():
    proc = run(
        "prove", str(FIXTURES / "peano.proof"), "sum-total-comm", stdin="skip\n"
    )
    assert proc.returncode == 0
    assert "by induction" in proc.stdout


def test_prove_unknown_theorem():
    proc = run("prove", str(FIXTURES / "peano.proof"), "nope", stdin="")
    assert proc.returncode == 2
