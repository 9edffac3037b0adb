"""Command-line front end.

Subcommands: simulate, linearize, validate, sensor-check. All outputs are CSV;
``--plot`` additionally renders figures next to the delimited output. Exit
codes: 0 success, 2 missing file or usage error, 3 validation error, 4 power
infeasible, 5 value outside a curve/segment domain.
"""

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import energy_aware, linear, sensors
from .config import ModelSet, load_models
from .errors import (ConfigError, DimensionMismatch, InvalidOrder, MalformedLog,
                     ModelError, NegativeSpeed, NoSensorConfigured, OutOfRange,
                     PowerInfeasible, SamplingMismatch, SingularOrientation)
from .frames import EulerAngles
from .powertrain import PowertrainState
from .vehicle import UavState

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_POWER = 4
EXIT_RANGE = 5


def _error_line(code, exc):
    """Machine-readable one-line diagnostic on stderr."""
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def _load_scenario(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    return raw


def _initial_state(scenario, models: ModelSet) -> energy_aware.CombinedState:
    init = scenario.get("initial_state") or {}
    pos = np.asarray(init.get("position", [0.0, 0.0, 0.0]), dtype=float)
    vel = np.asarray(init.get("velocity", [0.0, 0.0, 0.0]), dtype=float)
    att = init.get("attitude", [0.0, 0.0, 0.0])
    rates = np.asarray(init.get("body_rates", [0.0, 0.0, 0.0]), dtype=float)
    soc = float(init.get("soc", 1.0))
    uav = UavState(pos, vel, EulerAngles(*[float(a) for a in att]), rates)
    return energy_aware.CombinedState(uav, PowertrainState(1.0 - soc, 0.0))


def _input_schedule(scenario, models: ModelSet, mode):
    """Build the input schedule callable from the scenario's input block."""
    spec = scenario.get("input") or {"type": "hover"}
    kind = spec.get("type", "hover")
    n = models.vehicle.n_motors

    def check_speeds(vals, where):
        arr = np.asarray(vals, dtype=float)
        if arr.shape != (n,):
            raise DimensionMismatch(
                f"{where}: expected {n} motor speeds, got {arr.size}")
        return arr

    if mode == "lpv":
        if kind == "hover":
            return np.zeros(5)
        if kind == "constant":
            arr = np.asarray(spec.get("reduced", np.zeros(5)), dtype=float)
            if arr.shape != (5,):
                raise DimensionMismatch(
                    f"input.reduced: expected 5 entries, got {arr.size}")
            return arr
        raise ConfigError(f"input type {kind!r} not supported in lpv mode")

    sp = linear.hover_set_point(models.vehicle, models.battery, models.motor)
    if kind == "hover":
        return np.full(n, sp.motor_speed)
    if kind == "constant":
        return check_speeds(spec.get("omegas", []), "input.omegas")
    if kind == "piecewise":
        pieces = spec.get("pieces")
        if not isinstance(pieces, list) or not pieces:
            raise ConfigError("input.pieces must be a non-empty list")
        bounds, tables = [], []
        for i, piece in enumerate(pieces):
            bounds.append(float(piece["until"]))
            tables.append(check_speeds(piece["omegas"], f"input.pieces[{i}].omegas"))
        bounds_arr = np.asarray(bounds)
        if np.any(np.diff(bounds_arr) <= 0.0):
            raise ConfigError("input.pieces 'until' times must increase")

        def schedule(t):
            idx = int(np.searchsorted(bounds_arr, t, side="right"))
            return tables[min(idx, len(tables) - 1)]

        return schedule
    raise ConfigError(f"unknown input type {kind!r}")


def _wind_schedule(scenario):
    wind = scenario.get("wind") or {}
    return np.asarray(wind.get("constant", [0.0, 0.0, 0.0]), dtype=float)


def _run_simulate_once(models, scenario, dt, mode, horizon, out_path, do_plot):
    x0 = _initial_state(scenario, models)
    inputs = _input_schedule(scenario, models, mode)
    wind = _wind_schedule(scenario)
    bp = models.battery_for("lpv" if mode == "lpv" else "nonlinear")
    result = energy_aware.simulate(
        x0, inputs, models.vehicle, bp, models.motor, dt, horizon, mode=mode,
        wind=wind, halt_on_violation=bool(scenario.get("halt_on_violation", False)))
    result.to_csv(out_path)
    if do_plot:
        from . import plotting
        plotting.plot_trajectory(result, Path(out_path).with_suffix(".png"))
    return result


def cmd_simulate(args) -> int:
    models = load_models(args.config)
    scenario = _load_scenario(args.scenario) if args.scenario else {}
    mode = args.mode or scenario.get("mode", "nonlinear")
    default_dt = 0.1 if mode == "lpv" else 0.01
    dt = args.dt if args.dt is not None else float(scenario.get("dt", default_dt))
    horizon = args.horizon if args.horizon is not None \
        else float(scenario.get("horizon", 300.0))
    out = Path(args.out)

    if args.sweep:
        dts = [float(v) for v in args.sweep.split(",")]
        paths = [out.with_name(f"{out.stem}_dt{v:g}{out.suffix}") for v in dts]
        with ThreadPoolExecutor(max_workers=min(4, len(dts))) as pool:
            futures = [pool.submit(_run_simulate_once, models, scenario, v, mode,
                                   horizon, p, args.plot)
                       for v, p in zip(dts, paths)]
            results = [f.result() for f in futures]
        for v, p, res in zip(dts, paths, results):
            print(f"dt={v:g}: wrote {p} ({len(res.times)} rows, "
                  f"final soc={res.outputs[-1, 0]:.4f})")
        return EXIT_OK

    result = _run_simulate_once(models, scenario, dt, mode, horizon, out, args.plot)
    print(f"wrote {out} ({len(result.times)} rows, "
          f"final soc={result.outputs[-1, 0]:.4f})")
    return EXIT_OK


def cmd_linearize(args) -> int:
    models = load_models(args.config)
    family = linear.LpvModelFamily(models.vehicle, models.battery_for("lpv"),
                                   models.motor, args.dt,
                                   vehicle_order=args.order, ecm_order=args.order)
    segment = args.segment if args.segment is not None else 1
    segs = models.battery_for("lpv").ocv.segments()
    if not 1 <= segment <= len(segs):
        raise OutOfRange(f"segment {segment} outside 1..{len(segs)}")
    model = family.model(segment)
    linear.write_model_csv(model, args.out)
    print(f"wrote {args.out} (A_d {model.a.shape[0]}x{model.a.shape[1]}, "
          f"dt={args.dt:g}, order={args.order}, segment={segment})")
    return EXIT_OK


def cmd_validate(args) -> int:
    models = load_models(args.config)
    names = [m.strip() for m in args.models.split(",")]
    reports = []
    for log_path in args.log:
        if not Path(log_path).exists():
            raise ConfigError(f"config not found: {log_path}")
        log = energy_aware.load_flight_log(log_path)
        for name in names:
            bp = models.battery_for(name)
            rep = energy_aware.validate_against_log(
                log, models.vehicle, bp, models.motor, model=name, dt=args.dt)
            reports.append((Path(log_path).name, log, rep))

    header = ["log", "model", "f_error_5min_pct", "f_error_end_pct",
              "rms_voltage_V", "rms_current_A", "partial"]
    print(",".join(header))
    rows = []
    for log_name, _, rep in reports:
        row = rep.as_row()
        f5 = "" if row["f_error_5min_pct"] is None else f"{row['f_error_5min_pct']:.4f}"
        cells = [log_name, rep.model, f5, f"{rep.f_error_end:.4f}",
                 f"{rep.rms_voltage:.4f}", f"{rep.rms_current:.4f}",
                 str(rep.partial).lower()]
        print(",".join(cells))
        rows.append(cells)

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {args.out}")
    if args.plot:
        from . import plotting
        by_log = {}
        for log_name, log, rep in reports:
            by_log.setdefault(log_name, (log, []))[1].append(rep)
        base = Path(args.out) if args.out else Path("validation.csv")
        for log_name, (log, reps) in by_log.items():
            fig_path = base.with_name(f"{base.stem}_{Path(log_name).stem}.png")
            plotting.plot_validation(log, reps, fig_path)
            print(f"wrote {fig_path}")
    return EXIT_OK


def cmd_sensor_check(args) -> int:
    models = load_models(args.config)
    if models.camera is None and models.lidar_vertical is None \
            and models.lidar_horizontal is None:
        raise NoSensorConfigured(f"{models.source}: no sensors block")

    z, z_t = args.z, args.z_target
    lines = []
    if models.camera is not None:
        spec = models.camera
        d_max = sensors.camera_max_target_distance(spec)
        v_bound = sensors.camera_survey_velocity_bound(z, z_t, spec)
        d_t = abs(z_t - z)
        lines.append(("camera", "target_distance_max_m", d_max, d_t, d_t <= d_max))
        lines.append(("camera", "survey_velocity_max_mps", v_bound, args.v_g,
                      args.v_g <= v_bound))
        if spec.mount == "gimbal":
            lines.append(("camera", "altitude_above_target", z_t, z, z <= z_t))
    if models.lidar_vertical is not None:
        d_max, v_g_max, _ = sensors.lidar_ground_constraints(z, z_t, models.lidar_vertical)
        d_t = abs(z_t - z)
        lines.append(("lidar_vertical", "target_distance_max_m", d_max, d_t, d_t <= d_max))
        lines.append(("lidar_vertical", "ground_velocity_max_mps", v_g_max, args.v_g,
                      args.v_g <= v_g_max))
    if models.lidar_horizontal is not None:
        v_g_max, alpha_sensor, alpha_eff = sensors.lidar_obstacle_constraints(
            models.vehicle, models.lidar_horizontal)
        lines.append(("lidar_horizontal", "braking_velocity_max_mps", v_g_max,
                      args.v_g, args.v_g <= v_g_max))
        lines.append(("lidar_horizontal", "tilt_sensor_max_rad", alpha_sensor,
                      args.alpha, args.alpha <= alpha_sensor))
        lines.append(("lidar_horizontal", "tilt_effective_max_rad", alpha_eff,
                      args.alpha, args.alpha <= alpha_eff))

    print("sensor,bound,limit,value,pass")
    for sensor, bound, limit, value, ok in lines:
        print(f"{sensor},{bound},{limit:.6g},{value:.6g},{str(bool(ok)).lower()}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sensor", "bound", "limit", "value", "pass"])
            for sensor, bound, limit, value, ok in lines:
                writer.writerow([sensor, bound, repr(float(limit)),
                                 repr(float(value)), str(bool(ok)).lower()])
        print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavenergy",
        description="Energy-aware multicopter modeling, simulation, and validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a fixed-step rollout to CSV")
    sim.add_argument("--config", required=True, help="vehicle config file")
    sim.add_argument("--scenario", help="scenario YAML (default: hover)")
    sim.add_argument("--out", required=True, help="trajectory CSV path")
    sim.add_argument("--dt", type=float, help="step size, s")
    sim.add_argument("--mode", choices=["nonlinear", "lpv"])
    sim.add_argument("--horizon", type=float, help="duration, s (default 300)")
    sim.add_argument("--sweep", help="comma-separated dt values to run in a batch")
    sim.add_argument("--plot", action="store_true", help="render figures next to the CSV")
    sim.set_defaults(func=cmd_simulate)

    lin = sub.add_parser("linearize", help="export the discrete linear model blocks")
    lin.add_argument("--config", required=True)
    lin.add_argument("--out", required=True, help="matrix CSV path")
    lin.add_argument("--dt", type=float, default=0.1)
    lin.add_argument("--order", type=int, default=2)
    lin.add_argument("--segment", type=int)
    lin.set_defaults(func=cmd_linearize)

    val = sub.add_parser("validate", help="score models against flight logs")
    val.add_argument("--config", required=True)
    val.add_argument("--log", required=True, nargs="+", help="flight log CSV file(s)")
    val.add_argument("--models", default="nonlinear,npv,linear,lpv",
                     help="comma-separated model names")
    val.add_argument("--dt", type=float, default=0.1)
    val.add_argument("--out", help="report CSV path")
    val.add_argument("--plot", action="store_true")
    val.set_defaults(func=cmd_validate)

    sen = sub.add_parser("sensor-check", help="print sensor bounds for a state")
    sen.add_argument("--config", required=True)
    sen.add_argument("--z", type=float, default=-30.0, help="UAV altitude (NED z), m")
    sen.add_argument("--z-target", type=float, default=0.0, dest="z_target")
    sen.add_argument("--v-g", type=float, default=0.0, dest="v_g",
                     help="ground velocity to check, m/s")
    sen.add_argument("--alpha", type=float, default=0.0, help="tilt to check, rad")
    sen.add_argument("--out", help="bounds CSV path")
    sen.set_defaults(func=cmd_sensor_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvalidOrder as exc:
        return _error_line(EXIT_USAGE, exc)
    except ConfigError as exc:
        code = EXIT_USAGE if "config not found" in str(exc) else EXIT_VALIDATION
        return _error_line(code, exc)
    except PowerInfeasible as exc:
        return _error_line(EXIT_POWER, exc)
    except OutOfRange as exc:
        return _error_line(EXIT_RANGE, exc)
    except (MalformedLog, DimensionMismatch, NegativeSpeed, SamplingMismatch,
            SingularOrientation, NoSensorConfigured, ModelError, ValueError) as exc:
        return _error_line(EXIT_VALIDATION, exc)


if __name__ == "__main__":
    sys.exit(main())
