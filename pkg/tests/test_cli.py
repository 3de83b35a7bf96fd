import json
import subprocess
import sys

import pytest

from ipsdual.cli import run

SMALL = {
    "classify": [],
    "pathwise": ["--reps", "50"],
    "exact-dual": ["--n-max", "3", "--draws", "2", "--t-grid", "0.5,1"],
    "prototype": ["--N-list", "20,40"],
    "sde-dual": ["--kind", "moment", "--reps", "500", "--dt", "0.05"],
    "scaling": ["--kind", "pure-death", "--N-list", "25,100"],
}


def _run_to(tmp_path, name, argv):
    out = tmp_path / name
    rc = run([argv[0], *argv[1:], "--out", str(out)])
    return rc, out.read_bytes()


@pytest.mark.parametrize("command", sorted(SMALL))
def test_rerun_is_byte_identical(tmp_path, command):
    argv = [command, *SMALL[command]]
    rc1, a = _run_to(tmp_path, "a.csv", argv)
    rc2, b = _run_to(tmp_path, "b.csv", argv)
    assert rc1 == rc2
    assert a == b
    first = a.decode().splitlines()[0]
    assert first.startswith("# ")
    params = json.loads(first[2:])
    assert json.loads((tmp_path / "a.csv.json").read_text()) == params


def test_seed_changes_output(tmp_path):
    _, a = _run_to(tmp_path, "a.csv", ["pathwise", "--reps", "20", "--seed", "1"])
    _, b = _run_to(tmp_path, "b.csv", ["pathwise", "--reps", "20", "--seed", "2"])
    assert a != b


def test_classify_content(capsys):
    assert run(["classify", "--out", "-"]) == 0
    lines = capsys.readouterr().out.splitlines()
    params = json.loads(lines[0][2:])
    assert params["with_dual"] == 16 and params["self_dual"] == 8
    assert lines[1] == "f,g,self_dual"
    assert len(lines) == 2 + 16


def test_pathwise_summary_on_stderr(capsys):
    assert run(["pathwise", "--reps", "30", "--out", "-"]) == 0
    captured = capsys.readouterr()
    assert "holds: 30/30" in captured.err
    assert "holds:" not in captured.out


def test_json_format(capsys):
    assert run(["prototype", "--N-list", "20,40", "--format", "json", "--out", "-"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert [r["N"] for r in payload["rows"]] == [20, 40]


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("IPSDUAL_OUT_DIR", str(tmp_path))
    assert run(["classify"]) == 0
    assert (tmp_path / "classify.csv").exists()
    assert (tmp_path / "classify.csv.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["exact-dual", "--n-max", "0"],
        ["exact-dual", "--n-max", "20"],
        ["pathwise", "--n", "1"],
        ["pathwise", "--rates", "1,2,3"],
        ["prototype", "--k-frac", "1.5"],
        ["sde-dual", "--reps", "1"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2


def test_failed_check_exits_one(tmp_path):
    # floor(y sqrt N) stays at 10 while sqrt N grows, so the error grows
    assert run(["scaling", "--kind", "pure-death", "--N-list", "100,110",
                "--out", str(tmp_path / "s.csv")]) == 1
    assert run(["prototype", "--N-list", "3,4,5", "--n", "2",
                "--out", str(tmp_path / "p.csv")]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ipsdual", "classify"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# ")
