"""Combined energy-aware multicopter model and fixed-step simulation.

Couples the rigid-body model with the powertrain through the motor speeds,
applies the tilted-flight thrust correction with the effective-translational-
lift reduction, and provides nonlinear (RK4) and discrete-LPV rollouts plus
the flight-log validation harness.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import powertrain, vehicle
from .errors import ConstraintHalt, MalformedLog
from .linear import LpvModelFamily, hover_set_point
from .powertrain import (BatteryParams, MotorEscParams, PowertrainOutput,
                         PowertrainState, check_powertrain_constraints,
                         ecm_dynamics)
from .vehicle import (UavState, VehicleParams, WindDisturbance,
                      check_vehicle_constraints, mix_motor_speeds, tilt_angle)

FIVE_MINUTES = 300.0


@dataclass(frozen=True)
class EtlParams:
    """Effective-translational-lift approximation parameters."""

    v_threshold: float       # m/s, velocity where the efficiency gain saturates
    drag_coefficient: float  # horizontal c_F used to size the gain, N s/m

    def __post_init__(self):
        if self.v_threshold <= 0.0:
            raise ValueError("threshold velocity must be positive")

    def efficiency(self, vp: VehicleParams) -> float:
        """Thrust-reduction fraction; recomputed so it can never go stale."""
        ratio = self.drag_coefficient * self.v_threshold / vp.weight
        return math.sqrt(1.0 + ratio ** 2) - 1.0


@dataclass(frozen=True)
class CombinedState:
    uav: UavState
    pt: PowertrainState

    @classmethod
    def hover_full(cls) -> "CombinedState":
        return cls(UavState.zero(), PowertrainState.full())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.uav.as_array(), self.pt.as_array()])

    @classmethod
    def from_array(cls, x) -> "CombinedState":
        x = np.asarray(x, dtype=float)
        return cls(UavState.from_array(x[:12]), PowertrainState.from_array(x[12:14]))


def thrust_correction(lift: float, alpha: float, v_g: float, vp: VehicleParams,
                      etl: EtlParams, exact_horizontal: bool = False) -> float:
    """Thrust deviation (N) needed for tilted flight, minus the forward-flight gain.

    The horizontal component defaults to the small-angle form m*g*alpha; the
    exact (T_SP + L)*tan(alpha) variant is available for sensitivity studies.
    """
    t_sp = vp.weight
    t_v = t_sp + lift
    t_h = t_v * math.tan(alpha) if exact_horizontal else t_sp * alpha
    t_eta = etl.efficiency(vp) * t_sp * min(v_g / etl.v_threshold, 1.0)
    return math.hypot(t_v, t_h) - t_eta - t_sp


def combined_dynamics(state: CombinedState, omegas, wind: WindDisturbance,
                      vp: VehicleParams, bp: BatteryParams, mp: MotorEscParams,
                      extra_load: float = 0.0):
    """Stacked 14-dim derivative and the powertrain output.

    The coupling is input-side only: motor speeds are mixed into the vehicle
    wrench and fed unchanged into the powertrain; neither block reads the
    other's state.
    """
    u = mix_motor_speeds(omegas, vp)
    uav_dot = vehicle.dynamics(state.uav, u, wind, vp)
    pt_dot, out = ecm_dynamics(state.pt, omegas, bp, mp, extra_load)
    return np.concatenate([uav_dot, pt_dot]), out


def rk4_step(f, x, dt):
    """Classic 4-stage Runge-Kutta step for time-invariant f."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _as_schedule(value, dim):
    """Accept a constant vector or a callable of time."""
    if callable(value):
        return value
    arr = np.asarray(value, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"schedule constant must have shape ({dim},)")
    return lambda t: arr


@dataclass
class SimulationResult:
    mode: str
    dt: float
    times: np.ndarray
    states: np.ndarray            # (n, 14)
    outputs: np.ndarray           # (n, 3): soc, u_b, i_b
    vehicle_reports: list
    powertrain_reports: list
    halted: bool = False

    @property
    def final_state(self) -> CombinedState:
        return CombinedState.from_array(self.states[-1])

    def to_csv(self, path):
        """One row per step: time, full state, outputs, constraint margins."""
        state_cols = list(vehicle.STATE_LABELS) + ["dod", "u_th"]
        margin_cols = []
        if self.vehicle_reports:
            margin_cols += [f"margin_{c.name}" for c in self.vehicle_reports[0].checks]
        if self.powertrain_reports:
            margin_cols += [f"margin_{c.name}" for c in self.powertrain_reports[0].checks]
        header = ["t"] + state_cols + ["soc", "u_b", "i_b"] + margin_cols
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                row += [repr(float(v)) for v in self.states[i]]
                row += [repr(float(v)) for v in self.outputs[i]]
                if self.vehicle_reports:
                    row += [repr(float(c.margin)) for c in self.vehicle_reports[i].checks]
                if self.powertrain_reports:
                    row += [repr(float(c.margin)) for c in self.powertrain_reports[i].checks]
                writer.writerow(row)


def simulate(x0: CombinedState, inputs, vp: VehicleParams, bp: BatteryParams,
             mp: MotorEscParams, dt: float, horizon: float, mode: str = "nonlinear",
             wind=None, extra_load: float = 0.0, halt_on_violation: bool = False,
             lpv_order: int = 2, psi_sp: float = 0.0) -> SimulationResult:
    """Fixed-step rollout of the combined model.

    ``inputs`` is a constant or callable of time: per-motor speeds (rad/s) in
    nonlinear mode, the reduced (L, tau_x, tau_y, tau_z, dT) in LPV mode.
    ``halt_on_violation`` stops the run when the state of charge drops below
    the cutoff (reported runs keep going and just log the violation).
    """
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("dt and horizon must be positive")
    n_steps = int(round(horizon / dt))
    wind_fn = _as_schedule(wind if wind is not None else np.zeros(3), 3)

    if mode == "nonlinear":
        input_fn = _as_schedule(inputs, vp.n_motors)
        return _simulate_nonlinear(x0, input_fn, wind_fn, vp, bp, mp, dt, n_steps,
                                   extra_load, halt_on_violation)
    if mode == "lpv":
        input_fn = _as_schedule(inputs, 5)
        return _simulate_lpv(x0, input_fn, wind_fn, vp, bp, mp, dt, n_steps,
                             halt_on_violation, lpv_order, psi_sp)
    raise ValueError(f"unknown mode {mode!r}; expected 'nonlinear' or 'lpv'")


def _record(states, outputs, v_reports, p_reports, x, out, omegas, vp, bp):
    states.append(x.as_array())
    outputs.append(out.as_array())
    v_reports.append(check_vehicle_constraints(x.uav, omegas, vp))
    p_reports.append(check_powertrain_constraints(out, bp))


def _simulate_nonlinear(x0, input_fn, wind_fn, vp, bp, mp, dt, n_steps,
                        extra_load, halt_on_violation):
    states, outputs, v_reports, p_reports = [], [], [], []
    x = x0
    halted = False
    times = [0.0]

    omegas = np.asarray(input_fn(0.0), dtype=float)
    _, out = combined_dynamics(x, omegas, WindDisturbance(wind_fn(0.0)), vp, bp, mp, extra_load)
    _record(states, outputs, v_reports, p_reports, x, out, omegas, vp, bp)

    for k in range(n_steps):
        t = k * dt
        omegas = np.asarray(input_fn(t), dtype=float)
        wind = WindDisturbance(wind_fn(t))

        def f(xa):
            dx, _ = combined_dynamics(CombinedState.from_array(xa), omegas, wind,
                                      vp, bp, mp, extra_load)
            return dx

        x = CombinedState.from_array(rk4_step(f, x.as_array(), dt))
        t_next = (k + 1) * dt
        omegas_next = np.asarray(input_fn(t_next), dtype=float)
        _, out = combined_dynamics(x, omegas_next, WindDisturbance(wind_fn(t_next)),
                                   vp, bp, mp, extra_load)
        times.append(t_next)
        _record(states, outputs, v_reports, p_reports, x, out, omegas_next, vp, bp)
        if halt_on_violation and out.soc < bp.soc_cutoff:
            halted = True
            break

    return SimulationResult("nonlinear", dt, np.array(times), np.array(states),
                            np.array(outputs), v_reports, p_reports, halted)


def _simulate_lpv(x0, input_fn, wind_fn, vp, bp, mp, dt, n_steps,
                  halt_on_violation, order, psi_sp):
    family = LpvModelFamily(vp, bp, mp, dt, vehicle_order=order, psi_sp=psi_sp)
    states, outputs, v_reports, p_reports = [], [], [], []
    x = x0.as_array()
    halted = False
    times = [0.0]

    segment = family.segment_for(x[12])
    model = family.model(segment)
    u = np.asarray(input_fn(0.0), dtype=float)
    y = model.output(x, u)
    cs = CombinedState.from_array(x)
    out = PowertrainOutput(float(y[0]), float(y[1]), float(y[2]))
    _record(states, outputs, v_reports, p_reports, cs, out, np.array([]), vp, bp)

    for k in range(n_steps):
        t = k * dt
        u = np.asarray(input_fn(t), dtype=float)
        # event-based segment switching: rebuild only when DoD crosses a breakpoint
        new_segment = family.segment_for(x[12])
        if new_segment != segment:
            segment = new_segment
            model = family.model(segment)
        x = model.step(x, u, wind_fn(t))
        u_next = np.asarray(input_fn((k + 1) * dt), dtype=float)
        y = model.output(x, u_next)
        cs = CombinedState.from_array(x)
        out = PowertrainOutput(float(y[0]), float(y[1]), float(y[2]))
        times.append((k + 1) * dt)
        _record(states, outputs, v_reports, p_reports, cs, out, np.array([]), vp, bp)
        if halt_on_violation and out.soc < bp.soc_cutoff:
            halted = True
            break

    return SimulationResult("lpv", dt, np.array(times), np.array(states),
                            np.array(outputs), v_reports, p_reports, halted)


# ---------------------------------------------------------------------------
# Flight-log validation


@dataclass(frozen=True)
class FlightLog:
    """Timestamped motor speeds (or total thrust) with measured battery signals."""

    t: np.ndarray
    voltage: np.ndarray
    current: np.ndarray
    soc: np.ndarray
    omegas: np.ndarray = None     # (n, N_M) if per-motor speeds were logged
    thrust: np.ndarray = None     # (n,) if only total thrust was logged

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])


def load_flight_log(path) -> FlightLog:
    """Parse the CSV log schema: t, omega_1..omega_N | thrust, u_b, i_b, soc."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedLog("empty file", line=1) from None
        header = [h.strip() for h in header]
        required = {"t", "u_b", "i_b", "soc"}
        missing = required - set(header)
        if missing:
            raise MalformedLog(f"missing columns: {sorted(missing)}", line=1)
        omega_cols = sorted((h for h in header if h.startswith("omega_")),
                            key=lambda h: int(h.split("_")[1]))
        if not omega_cols and "thrust" not in header:
            raise MalformedLog("need omega_1..omega_N or thrust column", line=1)
        idx = {h: header.index(h) for h in header}

        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedLog(f"expected {len(header)} columns, got {len(row)}",
                                   line=lineno)
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise MalformedLog(str(exc), line=lineno) from None
        if len(rows) < 2:
            raise MalformedLog("need at least two records", line=2)

    data = np.array(rows)
    t = data[:, idx["t"]]
    if np.any(np.diff(t) <= 0.0):
        bad = int(np.argmax(np.diff(t) <= 0.0)) + 3  # +1 header, +1 next row, 1-based
        raise MalformedLog("time must be strictly increasing", line=bad)
    omegas = data[:, [idx[c] for c in omega_cols]] if omega_cols else None
    thrust = data[:, idx["thrust"]] if "thrust" in idx else None
    return FlightLog(t, data[:, idx["u_b"]], data[:, idx["i_b"]],
                     data[:, idx["soc"]], omegas=omegas, thrust=thrust)


def write_flight_log(log: FlightLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t"]
        if log.omegas is not None:
            header += [f"omega_{i + 1}" for i in range(log.omegas.shape[1])]
        else:
            header += ["thrust"]
        header += ["u_b", "i_b", "soc"]
        writer.writerow(header)
        for i in range(len(log.t)):
            row = [repr(float(log.t[i]))]
            if log.omegas is not None:
                row += [repr(float(v)) for v in log.omegas[i]]
            else:
                row += [repr(float(log.thrust[i]))]
            row += [repr(float(log.voltage[i])), repr(float(log.current[i])),
                    repr(float(log.soc[i]))]
            writer.writerow(row)


@dataclass
class ValidationReport:
    model: str
    f_error_5min: float        # percent; None when the log is shorter than 5 min
    f_error_end: float         # percent, over the whole log
    rms_voltage: float
    rms_current: float
    partial: bool
    duration: float
    t: np.ndarray = field(repr=False, default=None)
    estimate: np.ndarray = field(repr=False, default=None)  # (n, 3): soc, u_b, i_b

    def as_row(self) -> dict:
        return {
            "model": self.model,
            "f_error_5min_pct": self.f_error_5min,
            "f_error_end_pct": self.f_error_end,
            "rms_voltage_V": self.rms_voltage,
            "rms_current_A": self.rms_current,
            "partial": self.partial,
        }


def _log_speeds(log: FlightLog, vp: VehicleParams):
    """Per-motor speed interpolator from the log (thrust logs assume equal speeds)."""
    if log.omegas is not None:
        if log.omegas.shape[1] != vp.n_motors:
            raise MalformedLog(
                f"log has {log.omegas.shape[1]} motor columns, vehicle has {vp.n_motors}")
        table = log.omegas
    else:
        table = np.sqrt(np.maximum(log.thrust, 0.0) / (vp.n_motors * vp.k_f))
        table = np.repeat(table[:, None], vp.n_motors, axis=1)

    def at(t):
        return np.array([np.interp(t, log.t, table[:, j]) for j in range(vp.n_motors)])

    return at


def validate_against_log(log: FlightLog, vp: VehicleParams, bp: BatteryParams,
                         mp: MotorEscParams, model: str = "nonlinear",
                         dt: float = 0.1) -> ValidationReport:
    """Drive the selected powertrain model open loop from logged inputs.

    Models: 'nonlinear'/'npv' integrate the nonlinear powertrain with the
    linear/piecewise OCV curve; 'linear'/'lpv' step the discrete linear model
    (single segment vs. segment switching). The battery params must carry the
    matching OCV curve already (see config.models_for).
    """
    if model not in ("nonlinear", "npv", "linear", "lpv"):
        raise ValueError(f"unknown model {model!r}")
    speeds_at = _log_speeds(log, vp)
    t0, t_end = float(log.t[0]), float(log.t[-1])
    times = np.arange(t0, t_end + dt / 2.0, dt)
    times[-1] = min(times[-1], t_end)

    dod0 = 1.0 - float(log.soc[0])
    est = np.zeros((len(times), 3))

    if model in ("nonlinear", "npv"):
        state = PowertrainState(dod0, 0.0)
        _, out = ecm_dynamics(state, speeds_at(t0), bp, mp)
        est[0] = out.as_array()
        for i in range(1, len(times)):
            t_prev = times[i - 1]
            step = times[i] - t_prev
            omegas = speeds_at(t_prev + step / 2.0)  # midpoint hold over the step

            def f(xa):
                dx, _ = ecm_dynamics(PowertrainState.from_array(xa), omegas, bp, mp)
                return dx

            state = PowertrainState.from_array(rk4_step(f, state.as_array(), step))
            _, out = ecm_dynamics(state, speeds_at(times[i]), bp, mp)
            est[i] = out.as_array()
    else:
        family = LpvModelFamily(vp, bp, mp, dt, ecm_order=1)
        sp = hover_set_point(vp, bp, mp)

        def delta_thrust(t):
            return vp.k_f * float(np.sum(speeds_at(t) ** 2)) - sp.thrust

        x = np.array([dod0, 0.0])
        segment = family.segment_for(x[0]) if model == "lpv" else 1
        from .linear import discretize_affine, linearize_ecm
        ecm_d = discretize_affine(linearize_ecm(bp, mp, vp, segment=segment), dt, 1)
        y = ecm_d.output(x, np.array([delta_thrust(t0)]))
        est[0] = y
        for i in range(1, len(times)):
            if model == "lpv":
                new_segment = family.segment_for(min(x[0], bp.ocv.dod_max))
                if new_segment != segment:
                    segment = new_segment
                    ecm_d = discretize_affine(
                        linearize_ecm(bp, mp, vp, segment=segment), dt, 1)
            u = np.array([delta_thrust(times[i - 1])])
            x = ecm_d.step(x, u)
            est[i] = ecm_d.output(x, np.array([delta_thrust(times[i])]))

    soc_meas = np.interp(times, log.t, log.soc)
    u_meas = np.interp(times, log.t, log.voltage)
    i_meas = np.interp(times, log.t, log.current)

    rms_v = float(np.sqrt(np.mean((est[:, 1] - u_meas) ** 2)))
    rms_i = float(np.sqrt(np.mean((est[:, 2] - i_meas) ** 2)))

    def f_error_at(t_mark):
        soc_m = np.interp(t_mark, times, soc_meas)
        soc_e = np.interp(t_mark, times, est[:, 0])
        d_meas = soc_m - soc_meas[0]
        d_est = soc_e - est[0, 0]
        return abs(d_meas - d_est) * 100.0

    duration = t_end - t0
    partial = duration < FIVE_MINUTES
    f5 = None if partial else f_error_at(t0 + FIVE_MINUTES)
    return ValidationReport(model, f5, f_error_at(t_end), rms_v, rms_i,
                            partial, duration, t=times, estimate=est)
