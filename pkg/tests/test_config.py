import math

import pytest

from uavenergy.config import CONFIG_DIR_ENV, load_models, resolve_config_path
from uavenergy.errors import ConfigError
from uavenergy.powertrain import LinearOcv, PiecewiseOcv

MINIMAL = """
vehicle:
  m: 1.0
  J: [0.01, 0.01, 0.02]
  J_r: 1.0e-5
  c_tau: 0.1
  c_F: 0.2
  k_F: 1.0e-5
  k_M: 1.0e-7
  rotors:
    - {l_x: 0.1, l_y: 0.1, spin: -1}
    - {l_x: -0.1, l_y: -0.1, spin: -1}
    - {l_x: 0.1, l_y: -0.1, spin: 1}
    - {l_x: -0.1, l_y: 0.1, spin: 1}
limits:
  v_g_max: 10.0
  v_c_max: 5.0
  alpha_max: 0.5
  omega_max: 0.3
  Omega_max: 1000.0
battery:
  N_S: 4
  N_P: 1
  Q_b: 18000.0
  eta_b: 1.0
  R_int: 6.62e-3
  R_th: 1.56e-3
  C_th: 15600.0
  u_c_min: 2.75
  u_c_max: 4.2
  i_c_max: 5.0
  i_d_max: 250.0
  DoD_max: 0.85
  ocv_linear: {b0: 4.2, b1: -0.5765}
motor:
  R_DC: 0.0575
  K_V: 96.34
  k_M: 1.0e-7
  eta_ESC: 0.86
"""


def test_fixture_loads(models):
    assert models.vehicle.mass == 1.45
    assert models.vehicle.n_motors == 4
    assert models.battery.n_series == 4
    assert isinstance(models.battery.ocv, LinearOcv)
    assert isinstance(models.battery_piecewise.ocv, PiecewiseOcv)
    assert models.motor.eta_esc == 0.86
    assert models.motor.viscous_damping == 0.0
    assert models.etl.v_threshold == 10.0
    assert models.camera is not None
    assert models.lidar_vertical.scan_config == "vertical"
    assert models.lidar_horizontal.scan_config == "horizontal"


def test_degree_keys_converted(models):
    assert models.vehicle.limits.alpha_max == pytest.approx(math.radians(30.0))
    assert models.vehicle.limits.omega_max == pytest.approx(math.radians(15.0))
    assert models.camera.fov == pytest.approx(math.radians(84.0))


def test_battery_for_switches_curve(models):
    assert isinstance(models.battery_for("nonlinear").ocv, LinearOcv)
    assert isinstance(models.battery_for("linear").ocv, LinearOcv)
    assert isinstance(models.battery_for("npv").ocv, PiecewiseOcv)
    assert isinstance(models.battery_for("lpv").ocv, PiecewiseOcv)


def test_minimal_config(tmp_path):
    path = tmp_path / "mini.yaml"
    path.write_text(MINIMAL)
    m = load_models(path)
    assert m.vehicle.mass == 1.0
    assert m.etl is None
    assert m.camera is None
    # scalar drag entries broadcast to all three axes
    assert list(m.vehicle.translational_drag) == [0.2, 0.2, 0.2]
    # without a piecewise table both battery variants share the linear curve
    assert isinstance(m.battery_piecewise.ocv, LinearOcv)


def test_missing_file():
    with pytest.raises(ConfigError, match="config not found"):
        load_models("does_not_exist.yaml")


def test_env_var_directory(tmp_path, monkeypatch):
    path = tmp_path / "custom.yaml"
    path.write_text(MINIMAL)
    monkeypatch.setenv(CONFIG_DIR_ENV, str(tmp_path))
    assert resolve_config_path("custom") == path
    assert load_models("custom").vehicle.mass == 1.0


def test_missing_field_context(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(MINIMAL.replace("  m: 1.0\n", ""))
    with pytest.raises(ConfigError, match="vehicle.m"):
        load_models(path)


def test_wrong_type_context(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(MINIMAL.replace("N_S: 4", "N_S: four"))
    with pytest.raises(ConfigError, match="battery.N_S"):
        load_models(path)


def test_domain_violation_reported_with_section(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(MINIMAL.replace("eta_ESC: 0.86", "eta_ESC: 1.5"))
    with pytest.raises(ConfigError, match="motor"):
        load_models(path)


def test_invalid_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("vehicle: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_models(path)
