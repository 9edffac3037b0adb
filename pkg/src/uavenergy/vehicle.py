"""Generalized nonlinear multicopter model.

Rotor mixing from motor speeds to the (thrust, torque, rotor-speed-difference)
wrench, the 12-state rigid-body dynamics in the NED/FRD convention, and the
vehicle capability constraints.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import frames
from .errors import DimensionMismatch, NegativeSpeed
from .report import ConstraintReport, lower_bound, upper_bound

STANDARD_GRAVITY = 9.80665

STATE_LABELS = ("x", "y", "z", "vx", "vy", "vz",
                "phi", "theta", "psi", "wx", "wy", "wz")


@dataclass(frozen=True)
class Rotor:
    """Body-frame arm position (m) and spin direction (+1 clockwise, -1 counterclockwise)."""

    l_x: float
    l_y: float
    spin: int

    def __post_init__(self):
        if self.spin not in (-1, 1):
            raise ValueError(f"rotor spin must be +1 or -1, got {self.spin}")


@dataclass(frozen=True)
class Limits:
    v_g_max: float
    v_c_max: float
    alpha_max: float
    omega_max: float
    motor_speed_max: float

    def __post_init__(self):
        for name in ("v_g_max", "v_c_max", "alpha_max", "omega_max", "motor_speed_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_max >= math.pi / 2:
            raise ValueError("alpha_max must be below pi/2")


@dataclass(frozen=True)
class VehicleParams:
    """Mass, inertia, drag, and rotor-geometry description of one vehicle."""

    mass: float
    inertia: np.ndarray          # diagonal (Jxx, Jyy, Jzz), kg m^2
    rotor_inertia: float         # J_r, kg m^2
    angular_drag: np.ndarray     # (c_tau_x, c_tau_y, c_tau_z), N m s/rad
    translational_drag: np.ndarray  # (c_Fx, c_Fy, c_Fz), N s/m
    k_f: float                   # aerodynamic force constant, N/(rad/s)^2
    k_m: float                   # aerodynamic torque constant, N m/(rad/s)^2
    rotors: tuple
    limits: Limits
    gravity: float = STANDARD_GRAVITY

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        object.__setattr__(self, "angular_drag", np.asarray(self.angular_drag, dtype=float))
        object.__setattr__(self, "translational_drag",
                           np.asarray(self.translational_drag, dtype=float))
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if np.any(self.inertia <= 0.0) or np.any(self.angular_drag <= 0.0) \
                or np.any(self.translational_drag <= 0.0):
            raise ValueError("inertia and drag coefficients must be positive")
        if self.k_f <= 0.0 or self.k_m <= 0.0:
            raise ValueError("k_f and k_m must be positive")
        if len(self.rotors) < 3:
            raise ValueError("at least 3 rotors required")
        spins = {r.spin for r in self.rotors}
        if len(self.rotors) >= 2 and len(spins) < 2:
            warnings.warn("all rotors spin the same way; yaw is uncontrollable",
                          stacklevel=2)

    @property
    def n_motors(self) -> int:
        return len(self.rotors)

    @property
    def weight(self) -> float:
        return self.mass * self.gravity


@dataclass(frozen=True)
class UavState:
    """12-dim rigid-body state: inertial position/velocity, attitude, body rates."""

    position: np.ndarray
    velocity: np.ndarray
    attitude: frames.EulerAngles
    body_rates: np.ndarray

    @classmethod
    def zero(cls) -> "UavState":
        return cls(np.zeros(3), np.zeros(3), frames.EulerAngles(0.0, 0.0, 0.0), np.zeros(3))

    @classmethod
    def from_array(cls, x: np.ndarray) -> "UavState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3].copy(), x[3:6].copy(),
                   frames.EulerAngles(x[6], x[7], x[8]), x[9:12].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity,
                               self.attitude.as_array(), self.body_rates])


@dataclass(frozen=True)
class UavInput:
    """Total thrust (N), body torques (N m), and net rotor-speed difference (rad/s)."""

    thrust: float
    torque: np.ndarray
    rotor_speed_diff: float

    def __post_init__(self):
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float))
        if self.thrust < 0.0:
            raise ValueError("thrust must be non-negative")

    @classmethod
    def hover(cls, params: VehicleParams) -> "UavInput":
        return cls(params.weight, np.zeros(3), 0.0)


@dataclass(frozen=True)
class WindDisturbance:
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if not np.all(np.isfinite(self.velocity)):
            raise ValueError("wind velocity must be finite")


def mix_motor_speeds(omegas, params: VehicleParams) -> UavInput:
    """Map per-motor speeds (rad/s) to the vehicle input wrench.

    Thrust sums the per-rotor aerodynamic forces k_f*w^2; roll/pitch torques
    come from the signed arm positions; yaw torque from the reaction drag
    torques k_m*w^2 weighted by spin direction.
    """
    omegas = np.asarray(omegas, dtype=float)
    if omegas.shape != (params.n_motors,):
        raise DimensionMismatch(
            f"expected {params.n_motors} motor speeds, got shape {omegas.shape}")
    if np.any(omegas < 0.0):
        raise NegativeSpeed("motor speeds must be non-negative")

    forces = params.k_f * omegas ** 2
    drag_torques = params.k_m * omegas ** 2
    signs = np.array([r.spin for r in params.rotors], dtype=float)
    lx = np.array([r.l_x for r in params.rotors])
    ly = np.array([r.l_y for r in params.rotors])

    thrust = float(np.sum(forces))
    tau = np.array([
        float(np.sum(-ly * forces)),
        float(np.sum(lx * forces)),
        float(np.sum(-signs * drag_torques)),
    ])
    omega_r = float(np.sum(signs * omegas))
    return UavInput(thrust, tau, omega_r)


def dynamics(state: UavState, u: UavInput, wind: WindDisturbance,
             params: VehicleParams, perturbation=None) -> np.ndarray:
    """Continuous-time state derivative of the 12-state multicopter model.

    ``perturbation``, if given, is called with the state and its return value
    (12-dim) is added to the derivative (uncertainty hook).
    """
    rot = frames.rotation_body_to_inertial(state.attitude)
    rate_mat = frames.euler_rate_matrix(state.attitude)

    # Translational: gravity + rotated thrust - linear drag on air velocity.
    f_gravity = np.array([0.0, 0.0, params.weight])
    f_thrust_body = np.array([0.0, 0.0, -u.thrust])
    air_velocity = state.velocity - wind.velocity
    f_drag = params.translational_drag * air_velocity
    accel = (f_gravity + rot @ f_thrust_body - f_drag) / params.mass

    # Rotational: Newton-Euler with gyroscopic and angular-drag terms.
    w = state.body_rates
    j = params.inertia
    tau_gyro = np.cross(w, np.array([0.0, 0.0, params.rotor_inertia * u.rotor_speed_diff]))
    tau_drag = params.angular_drag * w
    w_dot = (u.torque - np.cross(w, j * w) - tau_gyro - tau_drag) / j

    xdot = np.concatenate([state.velocity, accel, rate_mat @ w, w_dot])
    if perturbation is not None:
        xdot = xdot + np.asarray(perturbation(state), dtype=float)
    return xdot


def tilt_angle(attitude: frames.EulerAngles) -> float:
    """Exact tilt of the body z-axis from vertical."""
    c = math.cos(attitude.phi) * math.cos(attitude.theta)
    return math.acos(min(1.0, max(-1.0, c)))


def check_vehicle_constraints(state: UavState, omegas, params: VehicleParams) -> ConstraintReport:
    """Evaluate the ground/climb velocity, tilt, rate, and motor-speed limits."""
    omegas = np.asarray(omegas, dtype=float)
    lim = params.limits

    v_g = math.hypot(state.velocity[0], state.velocity[1])
    v_c = abs(state.velocity[2])
    alpha = tilt_angle(state.attitude)
    alpha_approx = math.hypot(state.attitude.phi, state.attitude.theta)
    rate = float(np.max(np.abs(state.body_rates))) if state.body_rates.size else 0.0

    checks = [
        upper_bound("ground_velocity", v_g, lim.v_g_max),
        upper_bound("climb_velocity", v_c, lim.v_c_max),
        upper_bound("tilt_angle", alpha, lim.alpha_max),
        upper_bound("angular_rate", rate, lim.omega_max),
    ]
    for i, w in enumerate(omegas):
        checks.append(lower_bound(f"motor_{i + 1}_speed_min", float(w), 0.0))
        checks.append(upper_bound(f"motor_{i + 1}_speed_max", float(w), lim.motor_speed_max))
    return ConstraintReport(tuple(checks), extras={"tilt_angle_approx": alpha_approx})
