import json
import subprocess
import sys

import numpy as np
import pytest
import scipy.io

import avqls.runner as runner
from avqls import (
    ConfigError,
    RunConfig,
    config_from_dict,
    load_config,
    run_single,
    run_sweep,
)
from avqls.cli import main
from avqls.runner import aggregate_rows, dump_trace, emit_schedule, trace_payload


def test_defaults():
    cfg = config_from_dict({})
    assert cfg.solver.n == 4
    assert cfg.solver.d == 2
    assert cfg.solver.T == 50
    assert cfg.solver.schedule == "hessian"
    assert cfg.problem.conductivity == "constant"
    assert cfg.problem.source == "point"
    assert cfg.problem.resolved_sigma() == 0.0
    assert cfg.seed == 0
    assert cfg.sweep is None
    assert cfg.output.formats == ("json", "csv")


def test_noisy_sigma_default():
    cfg = config_from_dict({"problem": {"conductivity": "noisy_constant"}})
    assert cfg.problem.sigma is None
    assert cfg.problem.resolved_sigma() == 0.2


def test_unknown_keys_name_the_field_path():
    with pytest.raises(ConfigError, match=r"solver\.m: unknown key"):
        config_from_dict({"solver": {"m": 3}})
    with pytest.raises(ConfigError, match=r"top level\.fooo"):
        config_from_dict({"fooo": 1})
    with pytest.raises(ConfigError, match=r"sweep\.kappa"):
        config_from_dict({"sweep": {"kappa": [1]}})


def test_value_validation_messages():
    with pytest.raises(ConfigError, match=r"solver\.n: expected an integer"):
        config_from_dict({"solver": {"n": "4"}})
    with pytest.raises(ConfigError, match=r"solver\.n: expected an integer"):
        config_from_dict({"solver": {"n": True}})
    with pytest.raises(ConfigError, match=r"solver\.T: must be >= 1"):
        config_from_dict({"solver": {"T": 0}})
    with pytest.raises(ConfigError, match=r"solver\.schedule: expected one of"):
        config_from_dict({"solver": {"schedule": "euler"}})
    with pytest.raises(ConfigError, match=r"problem\.sigma"):
        config_from_dict({"problem": {"conductivity": "constant", "sigma": 0.5}})
    with pytest.raises(ConfigError, match=r"sweep\.l"):
        config_from_dict({"problem": {"source": "point"}, "sweep": {"l": [0, 2]}})
    with pytest.raises(ConfigError, match=r"sweep\.seeds\[1\]"):
        config_from_dict(
            {"problem": {"source": "point"}, "sweep": {"seeds": [0, -1]}}
        )


def test_payload_round_trip():
    raw = {
        "problem": {"conductivity": "noisy_linear", "source": "exponential", "l": 2.0},
        "solver": {"n": 3, "d": 1, "T": 25, "schedule": "dynamic"},
        "sweep": {"l": [0.0, 2.0], "seeds": [0, 1, 2]},
        "seed": 7,
    }
    cfg = config_from_dict(raw)
    payload = cfg.to_payload()
    again = config_from_dict(payload)
    assert again.to_payload() == payload
    assert isinstance(again, RunConfig)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(bad)


def small_heat_raw(**solver):
    merged = {"n": 2, "d": 1, "T": 10, "schedule": "hessian"}
    merged.update(solver)
    return {"problem": {"conductivity": "constant", "source": "point"}, "solver": merged}


def test_run_single_identity_family():
    cfg = config_from_dict(
        {"problem": {"family": "identity"}, "solver": {"n": 1, "d": 1, "T": 5}}
    )
    result = run_single(cfg)
    assert result.trace.t == 1
    assert result.report.infidelity < 1e-10
    assert result.report.accuracy > 1.0 - 1e-10


def test_run_single_small_heat():
    result = run_single(config_from_dict(small_heat_raw()))
    assert result.report.infidelity < 1e-6
    assert result.trace.steps[-1].s == 1.0


def test_trace_payload_is_deterministic_and_timing_free():
    cfg = config_from_dict(small_heat_raw())
    first = dump_trace(trace_payload(cfg, run_single(cfg)))
    second = dump_trace(trace_payload(cfg, run_single(cfg)))
    assert first == second
    assert "wall_time" not in first
    payload = json.loads(first)
    assert payload["schema"] == "avqls-trace/1"
    assert payload["run"]["t"] == len(payload["steps"])


def test_sweep_cell_matches_single_run():
    raw = {
        "problem": {"conductivity": "noisy_constant"},
        "solver": {"n": 2, "d": 1, "T": 5, "schedule": "dynamic"},
        "sweep": {"seeds": [3]},
    }
    sweep = run_sweep(config_from_dict(raw))
    assert not sweep.any_failed
    cell_result = sweep.results[sweep.cells[0]]

    single_raw = {k: v for k, v in raw.items() if k != "sweep"}
    single_raw["seed"] = 3
    single = run_single(config_from_dict(single_raw))
    assert single.report.infidelity == cell_result.report.infidelity
    assert np.array_equal(single.trace.theta_star, cell_result.trace.theta_star)
    assert [r.s for r in single.trace.steps] == [r.s for r in cell_result.trace.steps]


def test_aggregate_rows_group_over_seeds():
    raw = {
        "problem": {"conductivity": "noisy_constant"},
        "solver": {"n": 2, "d": 1, "T": 5, "schedule": "dynamic"},
        "sweep": {"seeds": [0, 1]},
    }
    sweep = run_sweep(config_from_dict(raw))
    rows = aggregate_rows(sweep)
    assert len(rows) == 1
    row = rows[0]
    assert row["seeds"] == 2
    assert row["failures"] == 0
    lo = float(row["infidelity_min"])
    mid = float(row["infidelity_mean"])
    hi = float(row["infidelity_max"])
    assert lo <= mid <= hi


def test_emit_schedule_formats():
    text = emit_schedule(10.0, 5)
    lines = text.strip().splitlines()
    assert lines[0] == "j,s"
    assert len(lines) == 7
    assert float(lines[1].split(",")[1]) == 0.0
    assert float(lines[-1].split(",")[1]) == 1.0
    payload = json.loads(emit_schedule(10.0, 5, fmt="json"))
    assert set(payload) == {"kappa", "T", "v", "s"}
    assert payload["T"] == 5
    assert len(payload["s"]) == 6


def write_config(tmp_path, raw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def test_cli_solve_writes_outputs(tmp_path, capsys):
    cfg_path = write_config(tmp_path, small_heat_raw())
    out = tmp_path / "out"
    code = main(["solve", str(cfg_path), "--out", str(out)])
    assert code == 0
    assert (out / "trace.json").exists()
    assert (out / "summary.csv").exists()
    stdout = capsys.readouterr().out
    assert "infidelity=" in stdout and "kappa=" in stdout
    payload = json.loads((out / "trace.json").read_text())
    assert payload["report"]["infidelity"] < 1e-6


def test_cli_solve_rerun_is_byte_identical(tmp_path):
    cfg_path = write_config(tmp_path, small_heat_raw())
    out = tmp_path / "out"
    assert main(["solve", str(cfg_path), "--out", str(out)]) == 0
    first = (out / "trace.json").read_bytes()
    assert main(["solve", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "trace.json").read_bytes() == first


def test_cli_solve_dump_system(tmp_path):
    cfg_path = write_config(tmp_path, small_heat_raw())
    out = tmp_path / "out"
    code = main(["solve", str(cfg_path), "--out", str(out), "--dump-system"])
    assert code == 0
    mat = scipy.io.mmread(str(out / "matrix.mtx")).toarray()
    rhs = np.loadtxt(out / "rhs.txt")
    assert mat.shape == (4, 4)
    assert np.allclose(np.diag(mat), -32.0)
    assert rhs[0] == 1.0


def test_cli_seed_override(tmp_path):
    raw = small_heat_raw()
    raw["problem"]["conductivity"] = "noisy_constant"
    cfg_path = write_config(tmp_path, raw)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", str(cfg_path), "--out", str(out1), "--seed", "5"]) == 0
    assert main(["solve", str(cfg_path), "--out", str(out2), "--seed", "6"]) == 0
    p1 = json.loads((out1 / "trace.json").read_text())
    p2 = json.loads((out2 / "trace.json").read_text())
    assert p1["config"]["seed"] == 5
    assert p1["system"]["kappa"] != p2["system"]["kappa"]


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.json")]) == 1
    cfg_path = write_config(tmp_path, {"solver": {"m": 1}})
    assert main(["solve", str(cfg_path)]) == 1
    assert "solver.m" in capsys.readouterr().err


def test_cli_sweep_requires_section(tmp_path, capsys):
    cfg_path = write_config(tmp_path, small_heat_raw())
    assert main(["sweep", str(cfg_path)]) == 1
    assert "sweep" in capsys.readouterr().err


def test_cli_solver_error_exit_code(tmp_path, monkeypatch, capsys):
    cfg_path = write_config(tmp_path, small_heat_raw())

    def boom(config):
        raise RuntimeError("sweep exceeded 15 steps")

    monkeypatch.setattr("avqls.cli.run_single", boom)
    assert main(["solve", str(cfg_path)]) == 2


def test_cli_sweep_partial_failure_exit_code(tmp_path, monkeypatch):
    raw = small_heat_raw()
    raw["problem"]["conductivity"] = "noisy_constant"
    raw["sweep"] = {"seeds": [0, 1]}
    cfg_path = write_config(tmp_path, raw)

    real_run_cell = runner._run_cell

    def flaky(args):
        config, cell = args
        if cell.seed == 1:
            return cell, None, "RuntimeError: injected failure"
        return real_run_cell(args)

    monkeypatch.setattr(runner, "_run_cell", flaky)
    out = tmp_path / "out"
    code = main(["sweep", str(cfg_path), "--out", str(out)])
    assert code == 3
    details = (out / "sweep_details.csv").read_text()
    assert "injected failure" in details
    assert (out / "sweep_summary.csv").exists()


def test_cli_sweep_happy_path(tmp_path, capsys):
    raw = {
        "problem": {"conductivity": "noisy_constant"},
        "solver": {"n": 2, "d": 1, "T": 5, "schedule": "dynamic"},
        "sweep": {"seeds": [0, 1]},
    }
    cfg_path = write_config(tmp_path, raw)
    out = tmp_path / "out"
    code = main(["sweep", str(cfg_path), "--out", str(out)])
    assert code == 0
    assert "2/2 cells ok" in capsys.readouterr().out
    traces = sorted(out.glob("trace_*.json"))
    assert len(traces) == 2


def test_cli_schedule_subcommand(tmp_path, capsys):
    assert main(["schedule", "--kappa", "10", "--steps", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "j,s"
    assert len(lines) == 6
    out_file = tmp_path / "sched.json"
    assert main(
        ["schedule", "--kappa", "10", "--steps", "4", "--format", "json",
         "--out", str(out_file)]
    ) == 0
    assert json.loads(out_file.read_text())["kappa"] == 10.0


def test_cli_verify_subcommand(capsys):
    assert main(["verify"]) == 0
    assert "[ ok ]" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "avqls.cli", "schedule", "--kappa", "3", "--steps", "4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("j,s")
