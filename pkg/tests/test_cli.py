"""End-to-end command-line runs, exercised in process via main(argv)."""

import json
from dataclasses import replace

import numpy as np
import pytest

from epigame import preset, scenario_from_dict, simulate
from epigame.cli import main, render_timeseries, summary_payload, timeseries_header


def write_config(tmp_path, cfg, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg.to_dict()))
    return path


def read_summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def drop_wall_clock(summary):
    summary = json.loads(json.dumps(summary))
    summary["meta"].pop("wall_clock_seconds")
    return summary


# --- simulate ----------------------------------------------------------------


def test_simulate_artifacts_match_a_direct_run(tmp_path, capsys):
    cfg = replace(preset("fig2b"), horizon=25)
    cfg_path = write_config(tmp_path, cfg)
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert "days simulated: 25" in capsys.readouterr().out

    result = simulate(cfg)
    assert (out / "timeseries.csv").read_text() == render_timeseries(result)
    expected = summary_payload(result, wall_clock=0.0)
    assert drop_wall_clock(read_summary(out)) == drop_wall_clock(expected)


def test_simulate_preset_with_horizon_override(tmp_path):
    out = tmp_path / "run"
    code = main(["simulate", "--preset", "fig2a", "--horizon", "10", "--out", str(out)])
    assert code == 0
    summary = read_summary(out)
    assert summary["scenario"]["horizon"] == 10
    assert summary["days"] == 10
    assert summary["meta"]["tool"] == "epigame"


def test_simulate_timeseries_layout(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--preset", "fig4_migration", "--horizon", "5",
                 "--out", str(out)]) == 0
    lines = (out / "timeseries.csv").read_text().splitlines()
    assert lines[0] == ",".join(timeseries_header(2))
    assert lines[0].split(",")[:6] == [
        "day", "d_S_z0", "d_A_z0", "d_I_z0", "d_R_z0", "d_U_z0"
    ]
    assert "flow_z0_to_z1" in lines[0]
    assert lines[0].split(",")[-1] == "welfare"
    assert len(lines) == 1 + 6  # header plus days 0..5
    day0 = lines[1].split(",")
    assert day0[0] == "0"
    assert float(day0[1]) == pytest.approx(0.873, abs=1e-12)


def test_simulate_without_infection_reports_zero_totals(tmp_path):
    cfg = replace(
        preset("fig2a"),
        initial_dist=np.array([[0.9], [0.0], [0.0], [0.1], [0.0]]),
        horizon=50,
    )
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(write_config(tmp_path, cfg)),
                 "--out", str(out)]) == 0
    metrics = read_summary(out)["metrics"]
    assert metrics["peak_infections"] == 0.0
    assert metrics["total_infections"] == pytest.approx(0.1, abs=1e-12)


def test_simulate_reruns_are_byte_identical(tmp_path):
    cfg_path = write_config(tmp_path, replace(preset("fig2b"), horizon=20))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out2)]) == 0
    assert (out1 / "timeseries.csv").read_bytes() == (out2 / "timeseries.csv").read_bytes()
    assert drop_wall_clock(read_summary(out1)) == drop_wall_clock(read_summary(out2))


def test_simulate_input_errors(tmp_path, capsys):
    cfg_path = write_config(tmp_path, preset("fig2a"))
    assert main(["simulate", "--preset", "fig2a", "--config", str(cfg_path)]) == 1
    assert main(["simulate", "--out", str(tmp_path / "x")]) == 1
    assert main(["simulate", "--preset", "fig9"]) == 1
    assert main(["simulate", "--preset", "fig3_sweep"]) == 1
    assert "sweep command" in capsys.readouterr().err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad)]) == 1
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1

    doc = preset("fig2a").to_dict()
    doc["mystery"] = 1
    odd = tmp_path / "odd.json"
    odd.write_text(json.dumps(doc))
    assert main(["simulate", "--config", str(odd)]) == 1


# --- sweep -------------------------------------------------------------------


def test_sweep_grid_writes_consistent_artifacts(tmp_path):
    cfg_path = write_config(tmp_path, replace(preset("fig2b"), horizon=12))
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(cfg_path), "--grid", "lockdown.all=1,3",
                 "--jobs", "1", "--out", str(out)])
    assert code == 0

    lines = (out / "sweep.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header == ["point", "name", "lockdown.all", "total_infections",
                      "peak_infections", "peak_day", "average_welfare", "days"]
    assert len(lines) == 3
    for idx, line in enumerate(lines[1:]):
        cells = dict(zip(header, line.split(",")))
        assert cells["point"] == str(idx)
        assert cells["name"].startswith("fig2b[lockdown.all=")
        point_dirs = sorted((out / "points").glob(f"{idx:03d}_*"))
        assert len(point_dirs) == 1
        summary = read_summary(point_dirs[0])
        metrics = summary["metrics"]
        assert float(cells["total_infections"]) == metrics["total_infections"]
        assert float(cells["peak_infections"]) == metrics["peak_infections"]
        assert int(cells["peak_day"]) == metrics["peak_day"]
        assert float(cells["average_welfare"]) == metrics["average_welfare"]
        assert int(cells["days"]) == summary["days"]
        assert (point_dirs[0] / "timeseries.csv").exists()


def test_sweep_parallel_run_matches_serial(tmp_path):
    cfg_path = write_config(tmp_path, replace(preset("fig2b"), horizon=12))
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    base_args = ["sweep", "--config", str(cfg_path), "--grid", "lockdown.all=1,3"]
    assert main(base_args + ["--jobs", "1", "--out", str(serial)]) == 0
    assert main(base_args + ["--jobs", "2", "--out", str(parallel)]) == 0
    assert (serial / "sweep.csv").read_bytes() == (parallel / "sweep.csv").read_bytes()
    for point in sorted((serial / "points").iterdir()):
        twin = parallel / "points" / point.name
        assert (point / "timeseries.csv").read_bytes() == (twin / "timeseries.csv").read_bytes()


def test_sweep_preset_family_with_short_horizon(tmp_path):
    out = tmp_path / "fig3"
    code = main(["sweep", "--preset", "fig3_sweep", "--horizon", "5",
                 "--jobs", "1", "--out", str(out)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].split(",")[:4] == ["point", "name", "family", "a_lock"]
    assert len(lines) == 29
    assert len(list((out / "points").iterdir())) == 28


def test_sweep_input_errors(tmp_path, capsys):
    cfg_path = write_config(tmp_path, preset("fig2b"))
    assert main(["sweep", "--preset", "fig2b", "--out", str(tmp_path / "x")]) == 1
    assert "simulate command" in capsys.readouterr().err
    assert main(["sweep", "--preset", "fig3_sweep", "--grid", "lockdown.all=1"]) == 1
    assert main(["sweep", "--config", str(cfg_path)]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--grid", "lockdown.all"]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--grid", "lockdown.all="]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--grid", "bogus.path=1"]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--grid", "lockdown.all=1",
                 "--jobs", "-1", "--out", str(tmp_path / "neg")]) == 1


# --- equilibrium files ----------------------------------------------------------


def test_construct_then_check_round_trip(tmp_path, capsys):
    cfg_path = write_config(tmp_path, preset("fig4_migration"))
    state = tmp_path / "state.json"
    code = main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "S:0=0.6,R:0=0.2,R:1=0.2", "--out", str(state)])
    assert code == 0
    assert "PASS" in capsys.readouterr().out

    assert main(["check-equilibrium", "--config", str(cfg_path),
                 "--state", str(state)]) == 0
    assert "verdict: PASS" in capsys.readouterr().out


def test_check_flags_a_perturbed_state(tmp_path, capsys):
    cfg_path = write_config(tmp_path, preset("fig4_migration"))
    state = tmp_path / "state.json"
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "S:0=0.6,R:0=0.2,R:1=0.2", "--out", str(state)]) == 0
    doc = json.loads(state.read_text())
    doc["dist"][0] = [0.59, 0.01]  # push susceptible mass into the harsh zone
    moved = tmp_path / "moved.json"
    moved.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["check-equilibrium", "--config", str(cfg_path),
                 "--state", str(moved)]) == 3
    assert "verdict: FAIL" in capsys.readouterr().out


def test_split_entries_accumulate(tmp_path):
    cfg_path = write_config(tmp_path, preset("fig4_migration"))
    state = tmp_path / "state.json"
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "S:0=0.3,S:0=0.3,R:1=0.4", "--out", str(state)]) == 0
    doc = json.loads(state.read_text())
    assert doc["dist"][0][0] == pytest.approx(0.6)


def test_construct_rejects_bad_splits(tmp_path, capsys):
    cfg_path = write_config(tmp_path, preset("fig4_migration"))
    out = str(tmp_path / "state.json")
    # Mass in a zone the susceptible would leave.
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "S:1=1.0", "--out", out]) == 1
    assert "worth leaving" in capsys.readouterr().err
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "X:0=1.0", "--out", out]) == 1
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "S:5=1.0", "--out", out]) == 1
    assert main(["construct-equilibrium", "--config", str(cfg_path),
                 "--split", "A:0=1.0", "--out", out]) == 1


def test_check_rejects_bad_state_files(tmp_path):
    fig4_path = write_config(tmp_path, preset("fig4_migration"), "fig4.json")
    fig2_path = write_config(tmp_path, preset("fig2a"), "fig2.json")
    state = tmp_path / "state.json"
    assert main(["construct-equilibrium", "--config", str(fig4_path),
                 "--split", "S:0=1.0", "--out", str(state)]) == 0
    # Dimension mismatch: a two-zone state against a one-zone scenario.
    assert main(["check-equilibrium", "--config", str(fig2_path),
                 "--state", str(state)]) == 1
    assert main(["check-equilibrium", "--config", str(fig4_path),
                 "--state", str(tmp_path / "absent.json")]) == 1
    not_state = tmp_path / "plain.json"
    not_state.write_text(json.dumps({"hello": 1}))
    assert main(["check-equilibrium", "--config", str(fig4_path),
                 "--state", str(not_state)]) == 1


# --- presets and version ------------------------------------------------------------


def test_presets_listing_and_export(tmp_path, capsys):
    assert main(["presets"]) == 0
    listing = capsys.readouterr().out
    for name in ("fig2a", "fig2b", "fig2c", "fig3_sweep", "fig4_migration"):
        assert name in listing

    assert main(["presets", "--export", "fig2a"]) == 0
    doc = json.loads(capsys.readouterr().out)
    clone = scenario_from_dict(doc)
    assert clone.to_dict() == doc

    assert main(["presets", "--export", "fig3_sweep"]) == 0
    docs = json.loads(capsys.readouterr().out)
    assert isinstance(docs, list) and len(docs) == 28

    assert main(["presets", "--export", "fig9"]) == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("epigame ")
