import csv
import json
import math

import pytest
import yaml

from twistlab.cli import AXIS_ALIASES, RunConfig, load_config, main, run, sweep, write_csv
from twistlab.errors import ConfigInvalid, TaskFailed

COARSE = {"grid": {"h_cross": math.pi / 8}}


def cfg(task, **over):
    raw = {"task": task, **COARSE}
    raw.update(over)
    return RunConfig.from_dict(raw)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("raw", [
    {"task": "nope"},
    {},
    {"task": "hardy", "grid": {"h_cros": 0.1}},
    {"task": "hardy", "params": {"eps": [1.0]}},
    {"task": "hardy", "tube": {"twist": {"family": "bump", "amplitude": 1}}},
    {"task": "hardy", "tube": {"L": 2.0}},
    {"task": "hardy", "grid": {"h_cross": -1}},
    {"task": "mu-curve", "params": {"s": [0, 2, 1]}},
    {"task": "lambda-sweep", "params": {"eps": [1.0, 0.0]}},
    {"task": "evolve", "params": {"scheme": "rk4"}},
    {"task": "evolve", "params": {"u0": {"family": "gaussian", "m": 2}}},
    {"task": "energy-ode", "workers": 0},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigInvalid):
        RunConfig.from_dict(raw)


def test_defaults_and_hash():
    a = RunConfig.from_dict({"task": "hardy"})
    assert a.data["tube"]["L"] == 20.0
    assert a.params == {"I": None}
    b = RunConfig.from_dict({"task": "hardy", "output": "elsewhere", "workers": 3})
    assert a.hash() == b.hash()
    assert a.hash() != a.with_value("tube.twist.beta", 1.0).hash()
    with pytest.raises(ConfigInvalid):
        a.with_value("tube.radius", 1.0)


def test_yaml_and_json_configs(tmp_path):
    raw = {"task": "energy-ode", "params": {"cH": 0.5}}
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(raw))
    (tmp_path / "c.json").write_text(json.dumps(raw))
    assert load_config(tmp_path / "c.yaml").hash() == load_config(tmp_path / "c.json").hash()
    (tmp_path / "bad.yaml").write_text("task: [unclosed")
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "bad.yaml")


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def test_oracle_1d(tmp_path):
    rec = run(cfg("oracle-1d"), tmp_path)
    assert rec.ok
    assert rec.summary["e1"] == pytest.approx(0.25, abs=1e-4)
    assert rec.summary["e1_dirichlet"] == pytest.approx(0.75, abs=1e-4)
    saved = json.loads((tmp_path / "summary.json").read_text())
    assert saved["task"] == "oracle-1d" and saved["status"] == "ok"
    assert saved["paper_ref"]
    assert json.loads((tmp_path / "config.json").read_text())["task"] == "oracle-1d"


def test_mu_curve_untwisted(tmp_path):
    c = cfg("mu-curve", tube={"twist": {"family": "zero"}, "L": 10.0},
            params={"s": [0.0, 2.0], "h_coarse": 0.1})
    rec = run(c, tmp_path)
    rows = read_csv(rec.outputs["curve"])
    assert rows[0] == ["s", "mu", "residual", "node_amp"]
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(0.25, abs=5e-3)
    assert rec.invariants["residuals_below_tol"]


def test_hardy_task(tmp_path):
    c = cfg("hardy", tube={"twist": {"family": "bump", "beta": 1.0}, "L": 10.0})
    rec = run(c, tmp_path)
    s = rec.summary
    assert 0 < s["cH_certified"] <= s["cH_variational"] <= 0.55
    assert rec.ok


def test_energy_ode_task(tmp_path):
    rec = run(cfg("energy-ode"), tmp_path)
    assert rec.summary["max_relative_error"] < 1e-6
    assert read_csv(rec.outputs["trajectory"])[0] == ["t", "a", "b", "a_exact", "b_exact"]


def test_task_errors_are_wrapped(tmp_path):
    c = cfg("lambda-sweep", tube={"twist": {"family": "zero"}, "L": 10.0})
    with pytest.raises(TaskFailed):
        run(c, tmp_path)


def test_outputs_are_deterministic(tmp_path):
    c = cfg("lambda-sweep", tube={"twist": {"family": "bump", "beta": 1.0}, "L": 10.0},
            grid={"h_cross": math.pi / 8, "n1": 24}, params={"eps": [1.0, 0.5]})
    a = run(c, tmp_path / "a")
    b = run(c, tmp_path / "b")
    assert (tmp_path / "a" / "lambda.csv").read_bytes() == (tmp_path / "b" / "lambda.csv").read_bytes()
    assert a.config_hash == b.config_hash


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TWISTLAB_OUT", str(tmp_path / "env"))
    c = cfg("oracle-1d", params={"n": 400})
    rec = run(c)
    assert rec.outputs["summary"].startswith(str(tmp_path / "env" / f"oracle-1d-{c.hash()[:12]}"))


def test_csv_format(tmp_path):
    path = write_csv(tmp_path / "x.csv", ("a", "b", "c"), [(0.1, True, None), (3, 1e-300, "z")])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["a,b,c", "0.10000000000000001,true,", "3,1e-300,z"]


# ---------------------------------------------------------------------------
# sweeps and the entry point
# ---------------------------------------------------------------------------


def test_sweep_over_beta(tmp_path):
    base = cfg("stability", tube={"L": 10.0}, params={"eps_pot": 0.0})
    results = sweep(base, "beta", [0.0, 1.0], out_dir=tmp_path)
    assert [r.summary["twisted"] for r in results] == [False, True]
    rows = read_csv(tmp_path / "sweep_summary.csv")
    assert rows[0][:2] == ["beta", "status"]
    assert [r[1] for r in rows[1:]] == ["ok", "ok"]
    assert (tmp_path / "beta=0" / "summary.json").exists()


def test_sweep_over_interval_scale(tmp_path):
    base = cfg("lambda-sweep", tube={"twist": {"family": "bump", "beta": 1.0}, "L": 10.0},
               grid={"h_cross": math.pi / 8, "n1": 24})
    results = sweep(base, "I_epsilon", [1.0, 0.5], out_dir=tmp_path)
    assert [r.summary["eps"] for r in results] == [[1.0], [0.5]]
    assert all(r.summary["lambda"] > 0 for r in results)


def test_sweep_records_failures_and_uses_workers(tmp_path):
    base = cfg("oracle-1d", params={"n": 400})
    results = sweep(base, "L", [10.0, 20.0], workers=2, out_dir=tmp_path)
    assert all(r.ok for r in results)
    bad = cfg("lambda-sweep", tube={"twist": {"family": "zero"}, "L": 10.0})
    out = sweep(bad, "seed", [0], out_dir=tmp_path / "bad")
    assert isinstance(out[0], TaskFailed)
    assert read_csv(tmp_path / "bad" / "sweep_summary.csv")[1][1].startswith("failed")


def test_axis_aliases_name_config_leaves():
    base = RunConfig.from_dict({"task": "lambda-sweep"})
    for alias, path in AXIS_ALIASES.items():
        if path == "params.eps_pot":
            continue
        base.with_value(path, {"params.eps": [0.5], "tube.L": 10.0}.get(path, 1.0))


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.yaml"
    good.write_text(yaml.safe_dump({"task": "oracle-1d", "output": str(tmp_path / "o"),
                                    "params": {"n": 400}}))
    assert main(["run", str(good)]) == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"task": "oracle-1d", "colour": "red"}))
    assert main(["run", str(bad)]) == 2
    assert "unknown config key" in capsys.readouterr().err
    assert main(["check", "--seeds", "4", "--out", str(tmp_path / "chk")]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
    assert main(["sweep", str(good), "--axis", "L", "--values", "10,40/2"]) == 0
