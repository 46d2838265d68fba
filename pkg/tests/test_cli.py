import json

import pytest

from raeupom import cli


def test_oracle_prints_exact_values(capsys):
    assert cli.main(["oracle", "--domain", "toy", "--task", "t"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [l.split("\t")[1] for l in out] == ["0.5", "0.8"]
    assert [l.split("(")[0] for l in out] == ["mA", "mB"]
    assert cli.main(["oracle", "--domain", "toy", "--task", "t", "--utility", "success-ratio"]) == 0
    assert [l.split("\t")[1] for l in capsys.readouterr().out.splitlines()] == ["1.0", "0.8"]


def test_run_writes_csv_and_plots(tmp_path, capsys):
    out = tmp_path / "toy.csv"
    rc = cli.main(["run", "--domain", "toy", "--mode", "reactive", "--problems", "2", "--runs", "2",
                   "--out", str(out), "--plots", str(tmp_path / "plots")])
    assert rc == 0
    assert out.exists()
    assert (tmp_path / "plots" / "retry_ratio.svg").exists()
    assert "efficiency=" in capsys.readouterr().out


def test_nro_sweep_writes_one_csv_per_cell(tmp_path):
    rc = cli.main(["run", "--domain", "toy", "--mode", "plan", "--nro", "0", "5", "--problems", "1",
                   "--runs", "2", "--out", str(tmp_path / "s.csv")])
    assert rc == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["s_plan_5.csv", "s_reactive_0.csv"]


def test_config_file_supplies_defaults_and_flags_win(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"domain": "toy2", "problems": 1, "runs": 1, "out": str(tmp_path / "a.csv")}))
    a = cli.parse(["--config", str(cfg), "run"])
    assert a.domain == "toy2" and a.problems == 1
    b = cli.parse(["--config", str(cfg), "run", "--domain", "toy"])
    assert b.domain == "toy"
    assert cli.main(["--config", str(cfg), "run"]) == 0
    assert "toy2" in (tmp_path / "a.csv").read_text()


def test_output_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("RAEUPOM_OUT", str(tmp_path / "env"))
    assert cli.main(["run", "--domain", "toy", "--problems", "1", "--runs", "1"]) == 0
    assert list((tmp_path / "env").glob("*.csv"))


def test_gen_data_and_train(tmp_path, capsys):
    data = tmp_path / "d.jsonl"
    assert cli.main(["gen-data", "--domain", "toy", "--procedure", "lm2", "--tasks", "20", "--nro", "10",
                     "--out", str(data)]) == 0
    model = tmp_path / "m.json"
    assert cli.main(["train", "--domain", "toy", "--procedure", "lm2", "--data", str(data), "--out", str(model),
                     "--epochs", "5"]) == 0
    assert json.loads(model.read_text())["kind"] == "method"
    assert cli.main(["run", "--domain", "toy", "--mode", "learned", "--method-model", str(model), "--problems", "1",
                     "--runs", "2", "--out", str(tmp_path / "l.csv")]) == 0


def test_missing_model_is_reported(capsys):
    assert cli.main(["run", "--domain", "toy", "--mode", "learned", "--problems", "1", "--runs", "1",
                     "--out", "/tmp/_x.csv"]) == 2
    assert "MissingModel" in capsys.readouterr().err


def test_bad_flag_exits():
    with pytest.raises(SystemExit):
        cli.parse(["run", "--domain", "atlantis"])
