import json

import pytest

from erlcg.cli import main

from conftest import EX1


@pytest.fixture
def ex1_file(tmp_path):
    p = tmp_path / "ex1.json"
    p.write_text(json.dumps(EX1))
    return str(p)


def test_gen_and_solve(tmp_path, capsys):
    inst = str(tmp_path / "k.json")
    assert main(["gen", "knapsack", "--n", "10", "--seed", "2", "--out", inst]) == 0
    stats = str(tmp_path / "s.json")
    assert main(["solve", "--model", inst, "--stats", stats]) == 0
    out = capsys.readouterr().out
    assert "status OPTIMAL" in out
    st = json.loads(open(stats).read())
    assert st["status"] == "OPTIMAL" and st["fails"] >= 0


def test_gen_to_stdout(capsys):
    assert main(["gen", "alldiff-chain", "--n", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["objective"]["sense"] == "min"


def test_limit_exit_code(tmp_path):
    inst = str(tmp_path / "k.json")
    main(["gen", "knapsack", "--n", "25", "--seed", "1", "--out", inst])
    assert main(["solve", "--model", inst, "--ext", "none", "--max-conflicts", "3"]) == 1


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve"])
    assert e.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"vars": [')
    assert main(["solve", "--model", str(bad)]) == 2
    assert main(["solve", "--model", str(tmp_path / "missing.json")]) == 2
    assert main(["solve", "--model", str(bad), "--ext", "regular"]) == 2


def test_trace_and_verify(ex1_file, tmp_path, capsys):
    trace = str(tmp_path / "t.txt")
    assert main(["solve", "--model", ex1_file, "--trace", trace, "--verify-explanations", "--verify-nogoods"]) == 0
    out = capsys.readouterr().out
    assert "failed 0 refused 0" in out
    lines = open(trace).read().splitlines()
    assert lines[0].split("\t")[2] == "decision"
    assert main(["verify", "--model", ex1_file, "--run-trace", trace]) == 0


def test_bench(tmp_path, capsys):
    grid = tmp_path / "g.json"
    grid.write_text(json.dumps({"families": [["alldiff-chain", 5]], "seeds": [1],
                                "configs": [{"label": "basic", "ext": "none", "psum_interval": None},
                                            {"label": "ext@1"}]}))
    out = tmp_path / "out"
    assert main(["bench", "--grid", str(grid), "--out", str(out)]) == 0
    assert "alldiff-chain-5" in capsys.readouterr().out
    assert (out / "runs.csv").exists() and (out / "fails.png").exists()
