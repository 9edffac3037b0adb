"""YAML configuration loading.

Config keys mirror the vehicle parameter table names verbatim (m, k_F, k_M,
R_int, ...) so the mapping between documentation and configuration stays
auditable. Schema errors are reported with file and field context.
"""

import math
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from .energy_aware import EtlParams
from .errors import ConfigError
from .powertrain import (BatteryParams, LinearOcv, MotorEscParams, OcvSegment,
                         PiecewiseOcv)
from .sensors import CameraSpec, LidarSpec
from .vehicle import STANDARD_GRAVITY, Limits, Rotor, VehicleParams

CONFIG_DIR_ENV = "UAVENERGY_CONFIG_DIR"


@dataclass(frozen=True)
class ModelSet:
    """Everything a config file describes, ready for the model functions."""

    vehicle: VehicleParams
    battery: BatteryParams          # carries the linear OCV curve
    battery_piecewise: BatteryParams  # same pack with the piecewise curve (or linear again)
    motor: MotorEscParams
    etl: EtlParams = None
    exact_horizontal: bool = False
    camera: CameraSpec = None
    lidar_vertical: LidarSpec = None
    lidar_horizontal: LidarSpec = None
    source: str = ""

    def battery_for(self, model: str) -> BatteryParams:
        """Pick the OCV variant matching a model name (npv/lpv use segments)."""
        return self.battery_piecewise if model in ("npv", "lpv") else self.battery


def resolve_config_path(name) -> Path:
    """Resolve a config argument against the env-var directory and the shipped files."""
    path = Path(name)
    if path.exists():
        return path
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    candidates = []
    if env_dir:
        candidates += [Path(env_dir) / name, Path(env_dir) / f"{name}.yaml"]
    shipped = Path(__file__).parent / "configs"
    candidates += [shipped / name, shipped / f"{name}.yaml"]
    for cand in candidates:
        if cand.exists():
            return cand
    raise ConfigError(f"config not found: {name}")


class _Section:
    """Typed field access with file+field error context."""

    def __init__(self, data, path, prefix):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: section '{prefix}' must be a mapping")
        self.data = data
        self.path = path
        self.prefix = prefix

    def _fail(self, field, why):
        dotted = f"{self.prefix}.{field}" if self.prefix else field
        raise ConfigError(f"{self.path}: field '{dotted}' {why}")

    def has(self, field):
        return field in self.data

    def get(self, field, default=None, required=False):
        if field not in self.data:
            if required:
                self._fail(field, "is missing")
            return default
        return self.data[field]

    def number(self, field, default=None, required=False):
        val = self.get(field, default=default, required=required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self._fail(field, f"must be a number, got {type(val).__name__}")
        return float(val)

    def integer(self, field, default=None, required=False):
        val = self.get(field, default=default, required=required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, int):
            self._fail(field, f"must be an integer, got {type(val).__name__}")
        return val

    def vector3(self, field, required=False):
        val = self.get(field, required=required)
        if val is None:
            return None
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            return [float(val)] * 3
        if not isinstance(val, list) or len(val) != 3:
            self._fail(field, "must be a number or a 3-element list")
        return [float(v) for v in val]

    def section(self, field, required=False):
        val = self.get(field, required=required)
        if val is None:
            return None
        child = f"{self.prefix}.{field}" if self.prefix else field
        return _Section(val, self.path, child)

    def angle(self, field, default=None, required=False):
        """Accept either '<field>' in rad or '<field>_deg' in degrees."""
        if f"{field}_deg" in self.data:
            return math.radians(self.number(f"{field}_deg"))
        return self.number(field, default=default, required=required)


def _wrap(fn, path, section):
    try:
        return fn()
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{path}: section '{section}': {exc}") from exc


def _load_vehicle(root, path) -> VehicleParams:
    sec = root.section("vehicle", required=True)
    lim = root.section("limits", required=True)
    rotors_raw = sec.get("rotors", required=True)
    if not isinstance(rotors_raw, list):
        raise ConfigError(f"{path}: field 'vehicle.rotors' must be a list")
    rotors = []
    for i, entry in enumerate(rotors_raw):
        r = _Section(entry, path, f"vehicle.rotors[{i}]")
        rotors.append(_wrap(lambda r=r: Rotor(r.number("l_x", required=True),
                                              r.number("l_y", required=True),
                                              r.integer("spin", required=True)),
                            path, f"vehicle.rotors[{i}]"))
    limits = _wrap(lambda: Limits(
        v_g_max=lim.number("v_g_max", required=True),
        v_c_max=lim.number("v_c_max", required=True),
        alpha_max=lim.angle("alpha_max", required=True),
        omega_max=lim.angle("omega_max", required=True),
        motor_speed_max=lim.number("Omega_max", required=True),
    ), path, "limits")
    return _wrap(lambda: VehicleParams(
        mass=sec.number("m", required=True),
        inertia=sec.vector3("J", required=True),
        rotor_inertia=sec.number("J_r", required=True),
        angular_drag=sec.vector3("c_tau", required=True),
        translational_drag=sec.vector3("c_F", required=True),
        k_f=sec.number("k_F", required=True),
        k_m=sec.number("k_M", required=True),
        rotors=tuple(rotors),
        limits=limits,
        gravity=sec.number("g", default=STANDARD_GRAVITY),
    ), path, "vehicle")


def _load_ocv_linear(sec, path):
    lin = sec.section("ocv_linear", required=True)
    return _wrap(lambda: LinearOcv(lin.number("b0", required=True),
                                   lin.number("b1", required=True),
                                   lin.number("DoD_max", default=1.0)),
                 path, "battery.ocv_linear")


def _load_ocv_piecewise(sec, path):
    raw = sec.get("ocv_piecewise")
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: field 'battery.ocv_piecewise' must be a list")
    pieces = []
    for i, entry in enumerate(raw):
        p = _Section(entry, path, f"battery.ocv_piecewise[{i}]")
        rng = p.get("range", required=True)
        if not isinstance(rng, list) or len(rng) != 2:
            p._fail("range", "must be a 2-element list")
        pieces.append(OcvSegment(p.number("b0", required=True),
                                 p.number("b1", required=True),
                                 float(rng[0]), float(rng[1])))
    return _wrap(lambda: PiecewiseOcv(tuple(pieces)), path, "battery.ocv_piecewise")


def _load_battery(root, path):
    sec = root.section("battery", required=True)
    linear = _load_ocv_linear(sec, path)
    piecewise = _load_ocv_piecewise(sec, path)

    def build(curve):
        return BatteryParams(
            n_series=sec.integer("N_S", required=True),
            n_parallel=sec.integer("N_P", required=True),
            capacity=sec.number("Q_b", required=True),
            efficiency=sec.number("eta_b", required=True),
            r_internal=sec.number("R_int", required=True),
            r_polarization=sec.number("R_th", required=True),
            c_polarization=sec.number("C_th", required=True),
            ocv=curve,
            dod_cutoff=sec.number("DoD_max", required=True),
            u_cell_min=sec.number("u_c_min", required=True),
            u_cell_max=sec.number("u_c_max", required=True),
            i_charge_max=sec.number("i_c_max", required=True),
            i_discharge_max=sec.number("i_d_max", required=True),
        )

    bp_linear = _wrap(lambda: build(linear), path, "battery")
    bp_piecewise = _wrap(lambda: build(piecewise if piecewise is not None else linear),
                         path, "battery")
    return bp_linear, bp_piecewise


def _load_motor(root, path, n_motors) -> MotorEscParams:
    sec = root.section("motor", required=True)
    return _wrap(lambda: MotorEscParams(
        r_dc=sec.number("R_DC", required=True),
        k_v=sec.number("K_V", required=True),
        viscous_damping=sec.number("D_f", default=0.0),
        k_m=sec.number("k_M", required=True),
        eta_esc=sec.number("eta_ESC", required=True),
        n_motors=n_motors,
    ), path, "motor")


def _load_camera(sec, path) -> CameraSpec:
    boresight = sec.get("a_c")
    return _wrap(lambda: CameraSpec(
        resolution=sec.number("I", required=True),
        fov=sec.angle("gamma", required=True),
        aspect_ratio=sec.number("rho", required=True),
        sampling_period=sec.number("T_s", required=True),
        overlap=sec.number("delta_c", required=True),
        min_spatial_resolution=sec.number("R_I_min", required=True),
        mount=sec.get("mount", default="gimbal"),
        boresight=boresight,
    ), path, sec.prefix)


def _load_lidar(sec, path, scan_config) -> LidarSpec:
    return _wrap(lambda: LidarSpec(
        fov_horizontal=sec.angle("gamma_h", required=True),
        fov_vertical=sec.angle("gamma_v", required=True),
        fov_horizontal_valid=sec.angle("gamma_h_star",
                                       default=sec.angle("gamma_h", required=True)),
        range=sec.number("r_L", required=True),
        res_vertical=sec.angle("V_res", required=True),
        res_horizontal=sec.angle("H_res", required=True),
        scan_rate=sec.number("f_L", required=True),
        overlap=sec.number("delta_L", required=True),
        min_point_density=sec.number("R_L_min", required=True),
        reaction_time=sec.number("t_R", required=True),
        scan_config=scan_config,
    ), path, sec.prefix)


def load_models(path) -> ModelSet:
    """Load a vehicle configuration file into parameter objects."""
    path = resolve_config_path(path)
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    root = _Section(raw, str(path), "")
    vp = _load_vehicle(root, str(path))
    bp_linear, bp_piecewise = _load_battery(root, str(path))
    mp = _load_motor(root, str(path), vp.n_motors)

    etl = None
    exact_horizontal = False
    etl_sec = root.section("etl")
    if etl_sec is not None:
        c_f = etl_sec.number("c_F", default=float(vp.translational_drag[0]))
        etl = _wrap(lambda: EtlParams(etl_sec.number("v_th", required=True), c_f),
                    str(path), "etl")
        exact_horizontal = bool(etl_sec.get("exact_horizontal", default=False))

    camera = lidar_v = lidar_h = None
    sensors_sec = root.section("sensors")
    if sensors_sec is not None:
        cam_sec = sensors_sec.section("camera")
        if cam_sec is not None:
            camera = _load_camera(cam_sec, str(path))
        lv = sensors_sec.section("lidar_vertical")
        if lv is not None:
            lidar_v = _load_lidar(lv, str(path), "vertical")
        lh = sensors_sec.section("lidar_horizontal")
        if lh is not None:
            lidar_h = _load_lidar(lh, str(path), "horizontal")

    return ModelSet(vp, bp_linear, bp_piecewise, mp, etl=etl,
                    exact_horizontal=exact_horizontal, camera=camera,
                    lidar_vertical=lidar_v, lidar_horizontal=lidar_h,
                    source=str(path))
