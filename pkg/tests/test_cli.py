import json

import pytest

from dgweno.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


def test_run_prints_metrics(tmp_path, capsys):
    cfg = tmp_path / "sod.json"
    cfg.write_text(json.dumps({"problem": "sod", "counts": [32], "t_final": 0.02}))
    code = main(["run", "--config", str(cfg), "--p", "1", "--out", str(tmp_path / "out")])
    assert code == EXIT_OK
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["p"] == 1 and metrics["success"] and metrics["scheme"] == "weno"
    assert (tmp_path / "out" / "solution.csv").exists()


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "burgers_sine", "scheme": "weno", "counts": [16], "p": 2}))
    assert main(["run", "--config", str(cfg), "--scheme", "lo"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["scheme"] == "lo"


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"problem": "sod", "smoothness": 3}))
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
    assert "unknown config keys" in capsys.readouterr().err


def test_unknown_problem_is_config_error(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"problem": "noh"}))
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path):
    cfg = tmp_path / "blast.json"
    cfg.write_text(json.dumps({"problem": "blast_wave", "counts": [64], "t_final": 0.01}))
    assert main(["run", "--config", str(cfg), "--scheme", "dg", "--p", "2"]) == EXIT_NUMERICAL


def test_converge_table(tmp_path, capsys):
    cfg = tmp_path / "adv.json"
    cfg.write_text(json.dumps({"problem": "advect_smooth"}))
    assert main(["converge", "--config", str(cfg), "--p", "1", "--meshes", "8,16", "--schemes", "dg"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "scheme,E_h,error,eoc" and len(lines) == 3
    assert main(["converge", "--config", str(cfg), "--meshes", "8,x"]) == EXIT_CONFIG


def test_bad_flag_value_exits_through_argparse():
    with pytest.raises(SystemExit) as info:
        main(["run", "--scheme", "muscl"])
    assert info.value.code == 2


def test_property_subcommand(capsys):
    assert main(["test", "--filter", "laws.*"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("TAP version 13")
    assert "not ok" not in out
