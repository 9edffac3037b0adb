"""Component energy-consumption model of the electric power train.

Thevenin battery with linear or piecewise-linear open-circuit voltage,
ESC power conversion, simplified-DC BLDC motor power, and the combined
nonlinear model with its battery-current root.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidVoltage, OutOfRange, PowerInfeasible
from .report import ConstraintReport, lower_bound, upper_bound

# Numerical slack accepted at curve-domain boundaries (integrator round-off).
_DOMAIN_EPS = 1e-9

# Adjacent piecewise segments must agree at breakpoints within this (V).
BREAKPOINT_TOLERANCE = 1e-3


@dataclass(frozen=True)
class LinearOcv:
    """u_oc = b0 + b1 * DoD on [0, dod_max]."""

    b0: float
    b1: float
    dod_max: float = 1.0

    def segments(self):
        return ((self.b0, self.b1, 0.0, self.dod_max),)


@dataclass(frozen=True)
class OcvSegment:
    b0: float
    b1: float
    dod_lo: float
    dod_hi: float

    def voltage(self, dod: float) -> float:
        return self.b0 + self.b1 * dod


@dataclass(frozen=True)
class PiecewiseOcv:
    """Contiguous piecewise-linear discharge curve starting at DoD = 0."""

    pieces: tuple

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("piecewise curve needs at least one segment")
        if abs(self.pieces[0].dod_lo) > 1e-12:
            raise ValueError("piecewise curve must start at DoD = 0")
        prev = None
        for seg in self.pieces:
            if seg.dod_hi <= seg.dod_lo:
                raise ValueError("segment interval must have positive length")
            if prev is not None:
                if abs(seg.dod_lo - prev.dod_hi) > 1e-12:
                    raise ValueError("segments must be contiguous")
                gap = abs(prev.voltage(prev.dod_hi) - seg.voltage(seg.dod_lo))
                if gap > BREAKPOINT_TOLERANCE:
                    raise ValueError(
                        f"discontinuity {gap:.2e} V at DoD={seg.dod_lo} exceeds "
                        f"{BREAKPOINT_TOLERANCE} V")
            prev = seg

    def segments(self):
        return tuple((s.b0, s.b1, s.dod_lo, s.dod_hi) for s in self.pieces)

    @property
    def dod_max(self) -> float:
        return self.pieces[-1].dod_hi


def active_segment(dod: float, curve):
    """1-based index and (b0, b1) of the segment covering ``dod``.

    At interior breakpoints the left segment wins.
    """
    segs = curve.segments()
    if dod < -_DOMAIN_EPS or dod > segs[-1][3] + _DOMAIN_EPS:
        raise OutOfRange(f"DoD={dod:.4f} outside OCV domain [0, {segs[-1][3]}]")
    for i, (b0, b1, lo, hi) in enumerate(segs, start=1):
        if dod <= hi + _DOMAIN_EPS:
            return i, b0, b1
    # unreachable given the range check above
    raise OutOfRange(f"DoD={dod:.4f} outside OCV domain")


def open_circuit_voltage(dod: float, curve) -> float:
    """Evaluate the open-circuit voltage (V) at a depth of discharge."""
    _, b0, b1 = active_segment(dod, curve)
    return b0 + b1 * dod


@dataclass(frozen=True)
class BatteryParams:
    n_series: int
    n_parallel: int
    capacity: float          # Q_b, A s
    efficiency: float        # eta_b
    r_internal: float        # per-cell ohmic resistance, Ohm
    r_polarization: float    # R_th, Ohm
    c_polarization: float    # C_th, F
    ocv: object
    dod_cutoff: float
    u_cell_min: float
    u_cell_max: float
    i_charge_max: float
    i_discharge_max: float

    def __post_init__(self):
        if self.n_series < 1 or self.n_parallel < 1:
            raise ValueError("cell counts must be at least 1")
        positive = ("capacity", "efficiency", "r_internal", "r_polarization",
                    "c_polarization", "i_charge_max", "i_discharge_max")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.dod_cutoff <= 1.0:
            raise ValueError("dod_cutoff must be in (0, 1]")
        if self.u_cell_min >= self.u_cell_max:
            raise ValueError("u_cell_min must be below u_cell_max")

    @property
    def soc_cutoff(self) -> float:
        return 1.0 - self.dod_cutoff


@dataclass(frozen=True)
class MotorEscParams:
    r_dc: float              # motor resistance, Ohm
    k_v: float               # voltage constant, (rad/s)/V
    viscous_damping: float   # D_f, N m s/rad
    k_m: float               # load torque constant, N m/(rad/s)^2
    eta_esc: float
    n_motors: int
    pwm_gain: float = 1.0    # linear PWM-to-voltage map, exposed for completeness

    def __post_init__(self):
        if self.r_dc <= 0.0 or self.k_v <= 0.0:
            raise ValueError("r_dc and k_v must be positive")
        if self.viscous_damping < 0.0:
            raise ValueError("viscous_damping must be non-negative")
        if not 0.0 < self.eta_esc <= 1.0:
            raise ValueError("eta_esc must be in (0, 1]")
        if self.n_motors < 1:
            raise ValueError("n_motors must be at least 1")


@dataclass(frozen=True)
class PowertrainState:
    dod: float
    u_polarization: float

    def __post_init__(self):
        if not -_DOMAIN_EPS <= self.dod <= 1.0 + _DOMAIN_EPS:
            raise ValueError(f"DoD must be within [0, 1], got {self.dod}")

    @classmethod
    def full(cls) -> "PowertrainState":
        return cls(0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.dod, self.u_polarization])

    @classmethod
    def from_array(cls, x) -> "PowertrainState":
        return cls(float(x[0]), float(x[1]))


@dataclass(frozen=True)
class PowertrainOutput:
    soc: float
    voltage: float
    current: float

    def as_array(self) -> np.ndarray:
        return np.array([self.soc, self.voltage, self.current])


@dataclass(frozen=True)
class BldcPower:
    """DC-approximated motor supply power split into its three components."""

    total: float
    electrical_loss: float
    mechanical_loss: float
    output: float


def bldc_power(omega: float, p: MotorEscParams) -> BldcPower:
    """Supply power (W) of one motor spinning at ``omega`` rad/s."""
    if omega < 0.0:
        raise ValueError("motor speed must be non-negative")
    load = p.viscous_damping * omega + p.k_m * omega ** 2
    p_el = p.r_dc * p.k_v ** 2 * load ** 2
    p_mech = p.viscous_damping * omega ** 2
    p_out = p.k_m * omega ** 3
    return BldcPower(p_el + p_mech + p_out, p_el, p_mech, p_out)


def esc_input_current(p_dc: float, u_b: float, eta_esc: float) -> float:
    """ESC input current (A) drawn from the battery to supply ``p_dc`` watts."""
    if u_b <= 0.0:
        raise InvalidVoltage(f"battery voltage must be positive, got {u_b}")
    if p_dc < 0.0:
        raise ValueError("motor power must be non-negative")
    return p_dc / (eta_esc * u_b)


def pwm_to_voltage(s_pwm: float, u_b: float, p: MotorEscParams) -> float:
    """Linear PWM command to motor-voltage map; not used by the energy path."""
    return p.pwm_gain * s_pwm * u_b


def total_demand(omegas, mp: MotorEscParams, extra_load: float = 0.0) -> float:
    """Sum of efficiency-corrected motor powers plus auxiliary load (W)."""
    omegas = np.asarray(omegas, dtype=float)
    motor = sum(bldc_power(float(w), mp).total for w in omegas)
    return motor / mp.eta_esc + extra_load


def battery_current(state: PowertrainState, omegas, bp: BatteryParams,
                    mp: MotorEscParams, extra_load: float = 0.0) -> float:
    """Battery current (A) solving the power balance u_b(i) * i = demand.

    Of the two quadratic roots, only the smaller one satisfies i = 0 at zero
    power, so it is selected unconditionally.
    """
    demand = total_demand(omegas, mp, extra_load)
    if demand == 0.0:
        return 0.0
    u_oc = open_circuit_voltage(state.dod, bp.ocv)
    i_vertex = bp.n_parallel * (u_oc - state.u_polarization) / (2.0 * bp.r_internal)
    discriminant = i_vertex ** 2 - bp.n_parallel * demand / (bp.n_series * bp.r_internal)
    if discriminant < 0.0:
        raise PowerInfeasible(
            f"demand {demand:.1f} W exceeds deliverable power at DoD={state.dod:.3f}")
    return i_vertex - math.sqrt(discriminant)


def battery_voltage(state: PowertrainState, i_b: float, bp: BatteryParams) -> float:
    """Terminal voltage (V) for a given battery current."""
    u_oc = open_circuit_voltage(state.dod, bp.ocv)
    return bp.n_series * (u_oc - state.u_polarization - bp.r_internal * i_b / bp.n_parallel)


def ecm_dynamics(state: PowertrainState, omegas, bp: BatteryParams,
                 mp: MotorEscParams, extra_load: float = 0.0,
                 state_perturbation=None, output_perturbation=None):
    """State derivative (DoD, u_th) and output (SoC, u_b, i_b) of the combined model."""
    i_b = battery_current(state, omegas, bp, mp, extra_load)
    ddod = bp.efficiency / bp.capacity * i_b
    duth = (-state.u_polarization / (bp.r_polarization * bp.c_polarization)
            + i_b / (bp.n_parallel * bp.c_polarization))
    xdot = np.array([ddod, duth])
    out = np.array([1.0 - state.dod, battery_voltage(state, i_b, bp), i_b])
    if state_perturbation is not None:
        xdot = xdot + np.asarray(state_perturbation(state), dtype=float)
    if output_perturbation is not None:
        out = out + np.asarray(output_perturbation(state), dtype=float)
    return xdot, PowertrainOutput(float(out[0]), float(out[1]), float(out[2]))


def check_powertrain_constraints(out: PowertrainOutput, bp: BatteryParams) -> ConstraintReport:
    """Evaluate the SoC, pack-voltage, and current limits."""
    checks = (
        lower_bound("soc_min", out.soc, bp.soc_cutoff),
        upper_bound("soc_max", out.soc, 1.0),
        lower_bound("voltage_min", out.voltage, bp.u_cell_min * bp.n_series),
        upper_bound("voltage_max", out.voltage, bp.u_cell_max * bp.n_series),
        lower_bound("charge_current", out.current, -bp.i_charge_max),
        upper_bound("discharge_current", out.current, bp.i_discharge_max),
    )
    return ConstraintReport(checks)
