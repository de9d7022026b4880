"""CLI surface: exit codes, output streams, JSON report schema."""

import json
import subprocess
import sys
from pathlib import Path

from shapecheck.cli import main

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def run_cli(*argv, capsys):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fixed_file_exits_zero_and_says_so(capsys):
    code, out, err = run_cli("check", str(CORPUS / "feed_order_fixed.json"), capsys=capsys)
    assert code == 0
    assert "no error detected" in out
    assert err == ""


def test_buggy_file_exits_one_with_diagnostic_on_stderr(capsys):
    code, out, err = run_cli("check", str(CORPUS / "feed_order_buggy.json"), capsys=capsys)
    assert code == 1
    assert "images" in err and "shape error" in err
    assert "no error detected" not in out


def test_truncated_file_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1,')
    code, _, err = run_cli("check", str(bad), capsys=capsys)
    assert code == 2
    assert "error" in err


def test_missing_file_exits_two(capsys):
    code, _, err = run_cli("check", "no/such/file.json", capsys=capsys)
    assert code == 2


def test_json_format_schema(capsys):
    code, out, _ = run_cli("check", str(CORPUS / "minibatch_assign_buggy.json"),
                           "--format", "json", capsys=capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["exit_code"] == 1 and doc["ok"] is False
    diag = doc["runs"][0]["diagnostic"]
    assert set(diag) == {"node", "op", "inputs", "iteration", "kind", "message"}
    assert diag["node"] == "mm" and diag["iteration"] == 2
    assert diag["kind"] == "ShapeMismatch"
    assert all(isinstance(s, str) for s in diag["inputs"])


def test_trace_prints_every_node_shape(capsys):
    code, out, _ = run_cli("check", str(CORPUS / "control_fixed.json"),
                           "--trace", capsys=capsys)
    assert code == 0
    for node in ("x", "y", "z", "prod", "prod2", "sum", "harmonic"):
        assert f" {node} -> []" in out


def test_max_iterations_stops_before_the_bug(capsys):
    code, out, err = run_cli("check", str(CORPUS / "minibatch_assign_buggy.json"),
                             "--max-iterations", "1", capsys=capsys)
    assert code == 0  # the bug needs iteration 2
    assert "no error detected" in out


def test_corpus_subcommand(capsys):
    code, out, _ = run_cli("corpus", str(CORPUS), capsys=capsys)
    assert code == 0
    assert "recall 10/10" in out
    assert "false positives 0" in out


def test_corpus_json(capsys):
    code, out, _ = run_cli("corpus", str(CORPUS), "--format", "json", capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] and doc["recall"] == 1.0 and doc["false_positives"] == 0


def test_oracle_subcommand(capsys):
    code, out, _ = run_cli("oracle", str(CORPUS / "control_fixed.json"),
                           "--seed", "3", capsys=capsys)
    assert code == 0 and "no error detected" in out
    code, _, err = run_cli("oracle", str(CORPUS / "minibatch_assign_buggy.json"),
                           capsys=capsys)
    assert code == 1 and "iteration 2" in err


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "shapecheck.cli", "check",
         str(CORPUS / "control_fixed.json")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "no error detected" in proc.stdout
