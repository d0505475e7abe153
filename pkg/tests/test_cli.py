import json
import subprocess
import sys

import pytest

from parityformer.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_default_spec(capsys):
    code, out, _ = run(capsys, "run", "--input", "101")
    assert code == 0
    assert out.split()[0] == "accept" and len(out.strip().splitlines()) == 1
    code, out, _ = run(capsys, "run", "--input", "1")
    assert out.split() == ["reject", "0.5"]


def test_run_rejects_non_binary(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--input", "10a2"])
    assert exc.value.code == 2


def test_missing_spec_file(capsys, tmp_path):
    missing = tmp_path / "none.json"
    code, _, err = run(capsys, "run", "--spec", str(missing), "--input", "1")
    assert code == 2 and str(missing) in err


def test_build_then_run_from_file(capsys, tmp_path):
    path = tmp_path / "spec.json"
    assert run(capsys, "build", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "run", "--spec", str(path), "--input", "0110", "--precision", "120")
    assert code == 0 and out.startswith("accept")


def test_run_writes_trace(capsys, tmp_path):
    path = tmp_path / "t.json"
    assert run(capsys, "run", "--input", "011", "--trace", str(path))[0] == 0
    doc = json.loads(path.read_text())
    assert doc["decision"] == "accept" and doc["semantic"]["sigma"] == 2


def test_trace_command(capsys):
    code, out, _ = run(capsys, "trace", "--input", "10")
    assert code == 0
    assert json.loads(out)["decision"] == "reject"


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--max-n", "10")
    assert code == 0 and "PASS" in out


def test_verify_random_is_deterministic(capsys):
    argv = ("verify", "--max-n", "3", "--random", "4", "--len", "20", "--seed", "11")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_verify_failure_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.json"
    run(capsys, "build", "--alpha", "0.9", "--out", str(path))
    code, out, _ = run(capsys, "verify", "--spec", str(path), "--max-n", "4")
    assert code == 1 and "witness='01'" in out


def test_audit(capsys):
    assert run(capsys, "audit", "--max-n", "40")[0] == 0
    code, out, _ = run(capsys, "audit", "--max-n", "10", "--alpha", "0.2")
    assert code == 1 and "FAIL" in out


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--n", "10")
    assert code == 0 and "sufficient" in out


def test_build_is_byte_identical(capsys):
    assert run(capsys, "build") == run(capsys, "build")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "parityformer", "run", "--input", "11"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("accept")
