import json

import numpy as np
import pytest

from kornlab import cli


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------------------
# serialization


def test_to_json_scalars():
    assert cli.to_json(None) == "null"
    assert cli.to_json(True) == "true"
    assert cli.to_json(False) == "false"
    assert cli.to_json(3) == "3"
    assert cli.to_json(0.5) == "0.5"
    assert cli.to_json("a\"b") == '"a\\"b"'


def test_to_json_float_digits():
    assert cli.to_json(1.0 / 3.0) == "0.33333333333333331"
    assert cli.to_json(np.float64(2.0)) == "2"
    txt = cli.to_json({"x": [1.5, 2]})
    assert txt == '{"x":[1.5,2]}'
    assert json.loads(txt) == {"x": [1.5, 2]}


def test_to_json_preserves_key_order():
    assert cli.to_json({"b": 1, "a": 2}) == '{"b":1,"a":2}'


def test_to_json_rejects_non_finite():
    with pytest.raises(ValueError):
        cli.to_json(float("nan"))
    with pytest.raises(ValueError):
        cli.to_json({"x": float("inf")})


def test_to_csv_korn_layout():
    text = cli.to_csv("korn", {"entries": [[0, 0, 1, 0.25], [0, 1, 0, 0.5]]})
    lines = text.strip().split("\n")
    assert lines[0] == "k1,k2,k3,lambda_min"
    assert lines[1] == "0,0,1,0.25"
    assert len(lines) == 3


# ----------------------------------------------------------------------------
# configuration


def test_parse_box():
    assert cli._parse_box("0,0,0,1,2,3") == (0.0, 0.0, 0.0, 1.0, 2.0, 3.0)
    with pytest.raises(cli.UsageError):
        cli._parse_box("1,2,3")
    with pytest.raises(cli.UsageError):
        cli._parse_box("a,b,c,d,e,f")


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kmax": 1, "seed": 9}))
    code, out, _ = run_cli(capsys, ["korn", "--config", str(cfg), "--seed", "3"])
    report = json.loads(out)
    assert report["config"]["kmax"] == 1       # from the file
    assert report["config"]["seed"] == 3       # flag wins over the file


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kmax": 1, "turbo": True}))
    code, out, err = run_cli(capsys, ["korn", "--config", str(cfg)])
    assert code == 2
    assert out == ""
    assert "turbo" in err


def test_config_file_invalid_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code, _, err = run_cli(capsys, ["korn", "--config", str(cfg)])
    assert code == 2


def test_bad_flag_values(capsys):
    code, out, err = run_cli(capsys, ["korn", "--kmax", "0"])
    assert code == 2 and out == ""
    code, out, err = run_cli(capsys, ["counterexample", "--box", "1,2,3"])
    assert code == 2


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit):
        cli.main(["transmogrify"])


def test_thread_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("KORNLAB_THREADS", "zero")
    code, out, err = run_cli(capsys, ["korn", "--kmax", "1"])
    assert code == 2
    assert "KORNLAB_THREADS" in err
    monkeypatch.setenv("KORNLAB_THREADS", "2")
    code, out, _ = run_cli(capsys, ["korn", "--kmax", "2"])
    assert code == 0


# ----------------------------------------------------------------------------
# subcommands end to end


def test_korn_command_report(capsys):
    code, out, err = run_cli(capsys, ["korn", "--kmax", "2"])
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == "kornlab/1"
    assert report["command"] == "korn"
    assert list(report) == ["schema_version", "command", "config", "results",
                            "errors", "timings_ms"]
    assert report["errors"] == []
    assert report["timings_ms"] == {}
    assert report["results"]["c_estimate"] == pytest.approx(2.2882456112707374)
    assert len(report["results"]["entries"]) == 125
    assert "finished" in err


def test_korn_kmax_one_reports_truncation(capsys):
    # with kmax = 1 the outermost shell carries the minimum: named error,
    # exit status 1, report still written
    code, out, _ = run_cli(capsys, ["korn", "--kmax", "1"])
    assert code == 1
    report = json.loads(out)
    assert report["results"]["non_monotone_tail"] is True
    assert len(report["errors"]) == 1


def test_korn_csv_format(capsys):
    code, out, _ = run_cli(capsys, ["korn", "--kmax", "1", "--format", "csv"])
    assert code == 1
    lines = out.strip().split("\n")
    assert lines[0] == "k1,k2,k3,lambda_min"
    assert len(lines) == 1 + 27


def test_identities_command(capsys):
    code, out, _ = run_cli(capsys, ["identities", "--samples", "100",
                                    "--grid-n", "8"])
    assert code == 0
    report = json.loads(out)
    suite = report["results"]["suite"]
    assert len(suite) >= 40
    assert all(row["passed"] for row in suite)


def test_symbol_command(capsys):
    code, out, _ = run_cli(capsys, ["symbol", "--samples", "30"])
    assert code == 0
    res = json.loads(out)["results"]
    assert res["kernel_dimension_min"] == 4
    assert res["kernel_dimension_max"] == 4
    assert res["kernel_gap_min"] > 1e6
    assert res["sharp_ratio_e3"] == pytest.approx(np.sqrt(3.0), abs=1e-11)
    assert res["equivalence_constant"] == pytest.approx(np.sqrt(3.0), abs=1e-11)
    assert res["witness_devsym_residual"] == 0.0
    assert res["witness_sym_residual"] == 0.0


def test_counterexample_command(capsys):
    code, out, _ = run_cli(capsys, ["counterexample", "--kmax", "6"])
    assert code == 0
    res = json.loads(out)["results"]
    growth = dict((int(k), r) for k, r in res["growth"])
    assert sorted(growth) == [1, 2, 3, 4, 5, 6]
    assert growth[1] == pytest.approx(np.sqrt(1.5), rel=1e-10)
    halfspace = dict((int(k), r) for k, r in res["halfspace"])
    assert sorted(halfspace) == [2, 4]
    assert res["monotone_from"] == 1


def test_kernel_command(capsys):
    code, out, _ = run_cli(capsys, ["kernel"])
    assert code == 0
    res = json.loads(out)["results"]
    assert res["sphere_ranks"] == [10] * 20
    assert res["circle_rank"] == 9
    assert res["line_rank"] == 9
    assert res["recovery_error"] < 1e-8
    assert res["projection_residual"] < 1e-8


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, ["korn", "--kmax", "2", "--out", str(target)])
    assert code == 0
    assert out == ""
    report = json.loads(target.read_text())
    assert report["command"] == "korn"


def test_repeat_runs_byte_identical(capsys):
    _, out1, _ = run_cli(capsys, ["korn", "--kmax", "2", "--seed", "1"])
    _, out2, _ = run_cli(capsys, ["korn", "--kmax", "2", "--seed", "1"])
    assert out1 == out2
    _, csv1, _ = run_cli(capsys, ["identities", "--samples", "50",
                                  "--grid-n", "8", "--format", "csv"])
    _, csv2, _ = run_cli(capsys, ["identities", "--samples", "50",
                                  "--grid-n", "8", "--format", "csv"])
    assert csv1 == csv2
