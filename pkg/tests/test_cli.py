import numpy as np
import pytest

from uavenergy.cli import main

CONFIG = "holybro_s500"


def read_csv_rows(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


# --- simulate --------------------------------------------------------------------

def test_simulate_hover_300s(tmp_path):
    out = tmp_path / "traj.csv"
    code = main(["simulate", "--config", CONFIG, "--out", str(out),
                 "--dt", "0.1", "--horizon", "300"])
    assert code == 0
    header, rows = read_csv_rows(out)
    soc_col = header.index("soc")
    assert float(rows[-1][soc_col]) == pytest.approx(0.8638, abs=0.002)


def test_simulate_missing_config(tmp_path, capsys):
    code = main(["simulate", "--config", "nope.yaml",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 2
    err = capsys.readouterr().err
    assert "config not found" in err


def test_simulate_motor_count_mismatch(tmp_path, capsys):
    scenario = tmp_path / "scen.yaml"
    scenario.write_text("input:\n  type: constant\n  omegas: [500, 500, 500]\n")
    code = main(["simulate", "--config", CONFIG, "--scenario", str(scenario),
                 "--out", str(tmp_path / "x.csv"), "--horizon", "1"])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_simulate_deterministic(tmp_path):
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outs:
        assert main(["simulate", "--config", CONFIG, "--out", str(out),
                     "--dt", "0.1", "--horizon", "5"]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_simulate_lpv_mode(tmp_path):
    out = tmp_path / "lpv.csv"
    code = main(["simulate", "--config", CONFIG, "--out", str(out),
                 "--mode", "lpv", "--dt", "0.1", "--horizon", "60"])
    assert code == 0
    header, rows = read_csv_rows(out)
    soc = float(rows[-1][header.index("soc")])
    assert soc == pytest.approx(1.0 - 8.17 / 18000.0 * 60.0, abs=1e-3)


def test_simulate_plot_and_sweep(tmp_path):
    out = tmp_path / "traj.csv"
    code = main(["simulate", "--config", CONFIG, "--out", str(out),
                 "--sweep", "0.1,0.05", "--horizon", "2", "--plot"])
    assert code == 0
    for tag in ("0.1", "0.05"):
        assert (tmp_path / f"traj_dt{tag}.csv").exists()
        assert (tmp_path / f"traj_dt{tag}.png").exists()


def test_simulate_scenario_piecewise(tmp_path):
    scenario = tmp_path / "scen.yaml"
    scenario.write_text(
        "dt: 0.05\nhorizon: 2.0\n"
        "input:\n  type: piecewise\n  pieces:\n"
        "    - {until: 1.0, omegas: [560, 560, 560, 560]}\n"
        "    - {until: 2.0, omegas: [520, 520, 520, 520]}\n")
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", CONFIG, "--scenario", str(scenario),
                 "--out", str(out)]) == 0
    header, rows = read_csv_rows(out)
    vz = [float(r[header.index("vz")]) for r in rows]
    assert vz[len(vz) // 2] < 0.0   # climbing during the first piece (NED)


# --- linearize ---------------------------------------------------------------------

def test_linearize_blocks(tmp_path):
    out = tmp_path / "model.csv"
    code = main(["linearize", "--config", CONFIG, "--out", str(out),
                 "--dt", "0.1", "--order", "2", "--segment", "1"])
    assert code == 0
    text = out.read_text()
    for block in ("A_d,14,14", "B_d,14,5", "H_d,14,3", "C_d,3,14",
                  "D_d,3,5", "E_d,14,1", "y_SP,3,1"):
        assert f"# block,{block}" in text


def test_linearize_order_zero_usage_error(tmp_path, capsys):
    code = main(["linearize", "--config", CONFIG,
                 "--out", str(tmp_path / "m.csv"), "--order", "0"])
    assert code == 2
    assert "InvalidOrder" in capsys.readouterr().err


def test_linearize_bad_segment(tmp_path, capsys):
    code = main(["linearize", "--config", CONFIG,
                 "--out", str(tmp_path / "m.csv"), "--segment", "9"])
    assert code == 5
    assert "OutOfRange" in capsys.readouterr().err


# --- validate ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def log_path(tmp_path_factory, vp, bp, mp, hover_speeds):
    from uavenergy.energy_aware import (CombinedState, FlightLog, simulate,
                                        write_flight_log)
    res = simulate(CombinedState.hover_full(), hover_speeds, vp, bp, mp,
                   dt=0.1, horizon=360.0)
    omegas = np.tile(hover_speeds, (len(res.times), 1))
    log = FlightLog(res.times, res.outputs[:, 1], res.outputs[:, 2],
                    res.outputs[:, 0], omegas=omegas)
    path = tmp_path_factory.mktemp("clilogs") / "hover.csv"
    write_flight_log(log, path)
    return path


def test_validate_four_model_table(tmp_path, log_path, capsys):
    out = tmp_path / "report.csv"
    code = main(["validate", "--config", CONFIG, "--log", str(log_path),
                 "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    for name in ("nonlinear", "npv", "linear", "lpv"):
        assert f",{name}," in text
    header, rows = read_csv_rows(out)
    assert header[1] == "model"
    assert len(rows) == 4
    nonlinear_row = next(r for r in rows if r[1] == "nonlinear")
    assert float(nonlinear_row[2]) <= 0.01   # self-consistency


def test_validate_malformed_log(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,thrust,u_b,i_b,soc\n0,14,16,8\n")
    code = main(["validate", "--config", CONFIG, "--log", str(bad)])
    assert code == 3
    assert "MalformedLog" in capsys.readouterr().err


def test_validate_missing_log(capsys):
    code = main(["validate", "--config", CONFIG, "--log", "missing.csv"])
    assert code == 2


# --- sensor-check ---------------------------------------------------------------------

def test_sensor_check_bounds(capsys):
    code = main(["sensor-check", "--config", CONFIG, "--z", "-30",
                 "--v-g", "5"])
    assert code == 0
    out = capsys.readouterr().out
    assert "camera,target_distance_max_m,44.42" in out
    assert "camera,survey_velocity_max_mps,28.36" in out
    assert "lidar_horizontal,braking_velocity_max_mps,20.23" in out
    assert "tilt_effective_max_rad,0.2617" in out   # min(30 deg, gamma_v/2)


def test_sensor_check_no_sensors(tmp_path, capsys):
    from test_config import MINIMAL
    cfg = tmp_path / "plain.yaml"
    cfg.write_text(MINIMAL)
    code = main(["sensor-check", "--config", str(cfg)])
    assert code == 3
    assert "NoSensorConfigured" in capsys.readouterr().err


# --- usage ------------------------------------------------------------------------------

def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_missing_required_flag():
    assert main(["simulate"]) == 2
