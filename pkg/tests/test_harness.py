import csv
import json
import math

import numpy as np
import pytest

from sqrsim.evolve import Scheme, run
from sqrsim.harness import (
    ScheduleTable,
    UnknownPresetError,
    cli,
    export,
    load_sweep,
    preset,
    sample_schedule,
    sweep,
)

FAST = dict(T=10.0, n_out=200)  # cheap timing for sweep/CLI tests


def test_preset_identity():
    p = preset("identity")
    assert p.gate.delta == 0.0
    assert p.cfg.omega0 == 250.0
    assert p.cfg.delta_cap == 2500.0
    assert (p.cfg.T, p.cfg.t0, p.cfg.sigma) == (20.0, 1.6, 2.0)
    assert (p.cfg.t_min, p.cfg.t_max) == (-40.0, 0.0)


def test_preset_pauli_x_amplitude():
    assert preset("pauli-x").cfg.omega0 == 750.0
    assert math.isclose(preset("pauli-x").gate.chi, math.pi / 4)


def test_preset_sc2_context():
    p = preset("hadamard", scheme=Scheme.SC2)
    assert p.cfg.omega0 == 500.0
    assert p.cfg.delta_cap == 100.0 * 500.0
    assert math.isclose(p.gate.delta, math.pi)


def test_preset_overrides():
    p = preset("identity", omega0=100.0, delta_ratio=3.0)
    assert p.cfg.delta_cap == 300.0
    p = preset("identity", delta_cap=123.0)
    assert p.cfg.delta_cap == 123.0


def test_preset_unknown_name():
    with pytest.raises(UnknownPresetError) as excinfo:
        preset("bogus")
    assert excinfo.value.valid == ["hadamard", "identity", "pauli-x"]


def test_sweep_single_point_matches_run(tmp_path):
    grid = [120.0]
    result = sweep(["identity"], Scheme.SC1, grid, delta_ratio=10.0, **FAST)
    assert len(result.rows) == 1
    row = result.rows[0]
    pre = preset("identity", omega0=120.0, delta_ratio=10.0, **FAST)
    bare = run(Scheme.BARE, pre.gate, pre.cfg)
    sc1 = run(Scheme.SC1, pre.gate, pre.cfg)
    assert row.fidelity_bare == bare.fidelity
    assert row.fidelity_shortcut == sc1.fidelity


def test_sweep_validates_grid():
    with pytest.raises(ValueError):
        sweep(["identity"], Scheme.SC1, [])
    with pytest.raises(ValueError):
        sweep(["identity"], Scheme.SC1, [100.0, 50.0])
    with pytest.raises(ValueError):
        sweep(["identity"], Scheme.SC1, [-5.0, 50.0])
    with pytest.raises(ValueError):
        sweep(["identity"], Scheme.BARE, [100.0])
    with pytest.raises(UnknownPresetError):
        sweep(["nope"], Scheme.SC1, [100.0])


def test_sweep_rows_ordering_and_metadata():
    grid = [40.0, 80.0]
    result = sweep(["identity", "hadamard"], Scheme.SC1, grid, **FAST)
    assert [r.gate for r in result.rows] == ["identity", "identity", "hadamard", "hadamard"]
    assert [r.omega0 for r in result.rows] == [40.0, 80.0, 40.0, 80.0]
    assert result.metadata["scheme"] == "sc1"
    assert result.metadata["delta_rule"] == "10.0*omega0"


def test_sweep_records_failures_in_row():
    # a negative detuning breaks the SC2 synthesis; the row keeps the error
    result = sweep(["identity"], Scheme.SC2, [50.0], delta_ratio=-1.0, **FAST)
    row = result.rows[0]
    assert row.fidelity_bare is None and row.fidelity_shortcut is None
    assert row.error


def test_trace_export_csv_roundtrip(tmp_path):
    pre = preset("identity", omega0=60.0, delta_ratio=2.0, **FAST)
    trace = run(Scheme.BARE, pre.gate, pre.cfg)
    path = export(trace, tmp_path / "trace.csv", "csv")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    assert header[:5] == ["t", "p1", "p2", "p3", "p4"]
    assert header[5:] == [
        "re_psi1", "im_psi1", "re_psi2", "im_psi2",
        "re_psi3", "im_psi3", "re_psi4", "im_psi4",
    ]
    assert len(data) == pre.cfg.n_out
    # full-precision round trip of every number
    k = len(data) // 2
    assert float(data[k][0]) == trace.times[k]
    for i in range(4):
        assert float(data[k][1 + i]) == trace.populations[k, i]
        assert float(data[k][5 + 2 * i]) == trace.states[k, i].real
        assert float(data[k][6 + 2 * i]) == trace.states[k, i].imag


def test_trace_export_json_metadata(tmp_path):
    pre = preset("identity", omega0=60.0, delta_ratio=2.0, **FAST)
    trace = run(Scheme.BARE, pre.gate, pre.cfg)
    path = export(trace, tmp_path / "trace.json", "json")
    payload = json.loads(path.read_text())
    assert payload["kind"] == "trace"
    assert payload["metadata"]["config"]["omega0"] == 60.0
    assert payload["metadata"]["tool_version"]
    assert payload["fidelity"] == trace.fidelity


def test_sweep_export_csv_columns(tmp_path):
    result = sweep(["identity"], Scheme.SC1, [40.0, 80.0], **FAST)
    path = export(result, tmp_path / "sweep.csv", "csv")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega0", "gate", "scheme", "fidelity_bare", "fidelity_shortcut"]
    assert len(rows) == 3
    assert rows[1][1] == "identity" and rows[1][2] == "sc1"
    assert float(rows[1][3]) == result.rows[0].fidelity_bare


def test_sweep_export_json_roundtrip(tmp_path):
    result = sweep(["identity", "pauli-x"], Scheme.SC1, [40.0, 80.0], **FAST)
    path = export(result, tmp_path / "sweep.json", "json")
    loaded = load_sweep(path)
    assert loaded.rows == result.rows
    assert loaded.metadata == result.metadata


def test_schedule_export_bare_columns(tmp_path):
    pre = preset("identity", **FAST)
    table = sample_schedule(Scheme.BARE, pre.gate, pre.cfg, n_points=50)
    path = export(table, tmp_path / "sched.csv", "csv")
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "mag_O1", "ph_O1", "mag_O2", "ph_O2", "mag_O3", "ph_O3"]


def test_schedule_export_sc1_has_correction_columns():
    pre = preset("identity", **FAST)
    table = sample_schedule(Scheme.SC1, pre.gate, pre.cfg, n_points=20)
    names = [name for name, _ in table.columns]
    assert names[-3:] == ["w1", "w2", "w3"]


def test_schedule_export_sc2_has_detuning_columns(tmp_path):
    pre = preset("identity", scheme=Scheme.SC2, omega0=60.0, delta_ratio=5.0, **FAST)
    table = sample_schedule(Scheme.SC2, pre.gate, pre.cfg, n_points=20)
    names = [name for name, _ in table.columns]
    assert "mag_Ot5" in names and "ph_Ot5" in names
    assert names[-3:] == ["d1", "d2", "d3"]
    path = export(table, tmp_path / "sched.json", "json")
    payload = json.loads(path.read_text())
    assert payload["columns"][0] == "t"
    assert payload["columns"][-3:] == ["d1", "d2", "d3"]


def test_export_rejects_unknown_format(tmp_path):
    pre = preset("identity", **FAST)
    trace = run(Scheme.BARE, pre.gate, pre.cfg)
    with pytest.raises(ValueError):
        export(trace, tmp_path / "x.xml", "xml")
    with pytest.raises(TypeError):
        export(object(), tmp_path / "x.csv", "csv")


# ---------------------------------------------------------------------------
# CLI


def test_cli_simulate_happy_path(capsys):
    code = cli(
        [
            "simulate", "--gate", "identity", "--scheme", "sc1",
            "--omega0", "60", "--delta-ratio", "2",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    line = [l for l in out.splitlines() if l.startswith("fidelity = ")][0]
    value = float(line.split("=")[1])
    assert 0.0 <= value <= 1.0 + 1e-9


def test_cli_unknown_gate_lists_names(capsys):
    code = cli(["simulate", "--gate", "bogus"])
    captured = capsys.readouterr()
    assert code == 2
    assert "valid names" in captured.err
    assert "identity" in captured.err and "pauli-x" in captured.err


def test_cli_unknown_subcommand_usage(capsys):
    assert cli(["frobnicate"]) == 2
    assert cli(["simulate", "--no-such-flag"]) == 2


def test_cli_sweep_row_count(tmp_path, capsys):
    out_file = tmp_path / "sweep.csv"
    code = cli(
        [
            "sweep", "--gates", "identity", "--scheme", "sc1",
            "--omega0-min", "40", "--omega0-max", "80", "--points", "3",
            "--delta-ratio", "2", "--out", str(out_file),
        ]
    )
    assert code == 0
    with open(out_file, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 4  # header + 3 points


def test_cli_sweep_stdout_table(capsys):
    code = cli(
        [
            "sweep", "--gates", "identity", "--scheme", "sc1",
            "--omega0-min", "40", "--omega0-max", "60", "--points", "2",
            "--delta-ratio", "2",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "omega0,gate,scheme,fidelity_bare,fidelity_shortcut"
    assert len(lines) == 3


def test_cli_pulses_writes_schedule(tmp_path, capsys):
    out_file = tmp_path / "sched.csv"
    code = cli(
        ["pulses", "--gate", "hadamard", "--scheme", "sc2", "--out", str(out_file),
         "--points", "40", "--omega0", "60", "--delta-ratio", "5"]
    )
    assert code == 0
    with open(out_file, newline="") as fh:
        header = next(csv.reader(fh))
    assert header[-3:] == ["d1", "d2", "d3"]


def test_cli_feasibility(capsys):
    code = cli(["feasibility", "--gate", "identity", "--points", "50"])
    out = capsys.readouterr().out
    assert code == 0
    line = [l for l in out.splitlines() if l.startswith("max_residual_rad")][0]
    assert float(line.split("=")[1]) >= 0.0


def test_cli_config_file_with_override(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(
        "# basic run\nomega0 = 60\ndelta_ratio = 2\nformat = json\n", encoding="utf-8"
    )
    out_file = tmp_path / "trace.json"
    code = cli(
        [
            "simulate", "--gate", "identity", "--scheme", "bare",
            "--config", str(config), "--omega0", "70", "--out", str(out_file),
        ]
    )
    assert code == 0
    payload = json.loads(out_file.read_text())
    # command line wins over the file; file supplies the rest
    assert payload["metadata"]["config"]["omega0"] == 70.0
    assert payload["metadata"]["config"]["delta_cap"] == 140.0


def test_cli_bad_config_line(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("omega0: 60\n", encoding="utf-8")
    code = cli(["simulate", "--gate", "identity", "--config", str(config)])
    assert code == 1
    assert "error:" in capsys.readouterr().err
