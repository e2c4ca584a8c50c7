import json

import pytest

from qmedian import cli


def test_degree_json(capsys):
    assert cli.main(["degree", "--n", "16", "--l", "1", "--lprime", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["d_star"] == 3 and out["status"] == "certified"


def test_count_primitive_csv(capsys):
    assert cli.main(["count-primitive", "--n", "100", "--t", "50", "--p", "10", "--trials", "200"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# schema")
    assert {"trial", "y", "t_hat", "within_budget"} <= set(lines[1].split(","))
    assert len(lines) == 202


def test_select_and_median(capsys, tmp_path):
    f = tmp_path / "vals.txt"
    f.write_text("\n".join(str(v / 50) for v in range(50, 0, -1)))
    assert cli.main(["select", "--input", str(f), "--k", "25", "--delta", "3", "--trials", "20"]) == 0
    header = capsys.readouterr().out.splitlines()[1].split(",")
    assert {"trial", "stages", "queries_S", "queries_K", "total", "success"} <= set(header)
    assert cli.main(["median", "--gen", "permutation:n=101", "--epsilon", "0.1", "--trials", "20",
                     "--model", "comparison"]) == 0


def test_count_needs_size():
    with pytest.raises(SystemExit):
        cli.main(["count", "--t", "3", "--delta", "1"])


def test_count_csv(capsys):
    assert cli.main(["count", "--n", "256", "--t", "64", "--delta", "4", "--trials", "50"]) == 0
    header = capsys.readouterr().out.splitlines()[1].split(",")
    assert {"trial", "t_tilde", "t_hat", "queries", "success"} <= set(header)


def test_failing_predicate_exit_code(capsys):
    # at scale 1 this cell succeeds only about 58% of the time, below the 2/3 rule
    args = ["distinguish", "--n", "4096", "--l", "2945", "--lprime", "2942", "--t-true", "2945",
            "--trials", "2000"]
    assert cli.main(args + ["--c", "1"]) == 1
    assert cli.main(args) == 0


def test_error_rows_fail(capsys):
    assert cli.main(["distinguish", "--n", "8", "--l", "2", "--lprime", "4", "--t-true", "1"]) == 1


def test_run_config_and_out(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"kind": "count", "grid": {"n": [64], "t": [8], "delta": [2]},
                               "trials": 10, "seed": 4}))
    out = tmp_path / "res"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["config"]["trials"] == 10 and summary["config"]["seed"] == 4
    assert cli.main(["--config", str(cfg)]) == 0


def test_accept_subset(capsys):
    assert cli.main(["accept", "--only", "4", "5"]) == 0
    out = capsys.readouterr().out
    assert "criterion  4" in out and "criterion  5" in out


def test_no_command_prints_help(capsys):
    assert cli.main([]) == 2
