import json
import shutil
import subprocess

import pytest

from lorentzmax.cli import main
from lorentzmax.io import load_function, load_space, save_function, save_space
from lorentzmax.lorentz import CellFunction
from lorentzmax.space import BallProfile, Cell, CellularSpace
from lorentzmax.extreal import ExtReal


@pytest.fixture
def first(tmp_path):
    path = tmp_path / "s.json"
    assert main(["gen", "first", "--m", "1,1", "--out", str(path)]) == 0
    return path


def test_gen_families(tmp_path):
    cases = [
        ["first", "--m", "1,2"],
        ["first-prime", "--m", "1,2"],
        ["second", "--p", "2", "--q", "2", "--r", "2", "--l", "2"],
        ["second-prime", "--p", "2", "--q", "2", "--l", "2"],
        ["thm1", "--case", "U1", "--p0", "2", "--q0", "1", "--r0", "2", "--n", "5"],
    ]
    paths = []
    for k, args in enumerate(cases):
        out = tmp_path / f"{k}.json"
        assert main(["gen"] + args + ["--out", str(out)]) == 0
        assert main(["validate", str(out)]) == 0
        paths.append(str(out))
    out = tmp_path / "glued.json"
    assert main(["gen", "combined", "--components", paths[0], paths[1], "--out", str(out)]) == 0
    assert load_space(out).cell_ids[0] == "c0:x0"


def test_gen_prints_to_stdout(capsys):
    assert main(["gen", "first", "--m", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "cellular"


def test_validate_reports_violations(tmp_path, capsys):
    bad = CellularSpace(
        (Cell("a", 1, ExtReal(1)), Cell("b", 1, ExtReal(1))),
        {"a": BallProfile("a", (0.0,), ({"a": 1},)), "b": BallProfile("b", (0.0, 1.0), ({"b": 1}, {"a": 1, "b": 1}))},
    )
    path = tmp_path / "bad.json"
    save_space(bad, path)
    assert main(["validate", str(path)]) == 2
    assert "coverage" in capsys.readouterr().out


def test_maximal_and_norm(first, tmp_path, capsys):
    sp = load_space(first)
    fpath = tmp_path / "f.json"
    save_function(CellFunction.indicator(sp, ["x0"]), fpath)
    out = tmp_path / "Mf.json"
    assert main(["maximal", str(first), str(fpath), "--out", str(out)]) == 0
    Mf = load_function(out)
    assert float(Mf["S2"]) == pytest.approx(1 / 5)
    assert main(["norm", str(first), str(fpath), "--p", "2", "--q", "1"]) == 0
    assert capsys.readouterr().out.startswith("2.0")


def test_cnorm_methods(first, tmp_path, capsys):
    wpath = tmp_path / "w.json"
    assert main(["cnorm", str(first), "--p", "2", "--q", "1", "--r", "2", "--out", str(wpath)]) == 0
    assert "exact=True" in capsys.readouterr().out
    assert main(["cnorm", str(first), "--p", "2", "--q", "1", "--r", "2", "--method", "witness", "--function", str(wpath)]) == 0
    assert main(["cnorm", str(first), "--p", "2", "--q", "2", "--r", "inf", "--method", "search", "--budget", "50"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "first", "--m", "2,1"],
        ["gen", "first", "--m", "x"],
        ["gen", "second", "--p", "1", "--q", "2", "--r", "2", "--l", "2"],
        ["cnorm", "missing.json", "--p", "2", "--q", "1", "--r", "2"],
        ["experiment", "thm2", "--q0", "1", "--sweep", "1,2"],
        ["experiment", "nonsense"],
        [],
    ],
)
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_cnorm_restricted_needs_q_one(first):
    assert main(["cnorm", str(first), "--p", "2", "--q", "2", "--r", "2"]) == 1
    assert main(["cnorm", str(first), "--p", "2", "--q", "2", "--r", "2", "--method", "witness"]) == 1


def test_cnorm_rejects_inadmissible_triple(first):
    assert main(["cnorm", str(first), "--p", "2", "--q", "3", "--r", "2", "--method", "search"]) == 1


def test_experiment_exit_codes(tmp_path, capsys):
    assert main(["experiment", "remark2", "--sweep", "7"]) == 0
    assert capsys.readouterr().out.startswith("space,")
    out = tmp_path / "r.csv"
    # the small-K sweep does not reach the growth threshold, so the check fails
    assert main(["experiment", "remark1", "--q0", "2", "--r0", "1", "--sweep", "1,2", "--out", str(out)]) == 2
    assert out.exists() and (tmp_path / "r.json").exists()


@pytest.mark.skipif(shutil.which("lorentzmax") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["lorentzmax", "gen", "first", "--m", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["kind"] == "cellular"
