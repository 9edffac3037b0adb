"""Hover-point linearization and Taylor-Lie discretization.

Builds the continuous linear multicopter and powertrain models around the
hover set point, discretizes them with a truncated Lie series, and assembles
the combined discrete-time parameter-varying model. Per-OCV-segment matrices
are cached so segment switching only swaps precomputed models.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidOrder, OutOfRange, PowerInfeasible, SamplingMismatch
from .powertrain import BatteryParams, MotorEscParams, active_segment, bldc_power
from .vehicle import STATE_LABELS, VehicleParams

VEHICLE_INPUT_LABELS = ("L", "tau_x", "tau_y", "tau_z")
ECM_INPUT_LABELS = ("dT",)
OUTPUT_LABELS = ("soc", "u_b", "i_b")


@dataclass(frozen=True)
class ContinuousLinearModel:
    """dx/dt = A x + B u (+ H d + E), y = C x + D u + y_offset."""

    a: np.ndarray
    b: np.ndarray
    h: np.ndarray = None
    c: np.ndarray = None
    d: np.ndarray = None
    e: np.ndarray = None
    y_offset: np.ndarray = None


@dataclass(frozen=True)
class DiscreteLinearModel:
    """x(k+1) = A x + B u (+ H d + E), y = C x + D u + y_offset, step dt."""

    a: np.ndarray
    b: np.ndarray
    dt: float
    h: np.ndarray = None
    c: np.ndarray = None
    d: np.ndarray = None
    e: np.ndarray = None
    y_offset: np.ndarray = None
    state_labels: tuple = ()
    input_labels: tuple = ()
    output_labels: tuple = ()

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        n = self.a.shape[0]
        if self.a.shape != (n, n) or self.b.shape[0] != n:
            raise ValueError("A must be square and B row-compatible")
        if self.h is not None and self.h.shape[0] != n:
            raise ValueError("H rows must match the state dimension")
        if self.c is not None and self.c.shape[1] != n:
            raise ValueError("C columns must match the state dimension")

    def step(self, x, u, d=None):
        xn = self.a @ x + self.b @ u
        if self.h is not None and d is not None:
            xn = xn + self.h @ d
        if self.e is not None:
            xn = xn + self.e
        return xn

    def output(self, x, u):
        if self.c is None:
            return None
        y = self.c @ x
        if self.d is not None:
            y = y + self.d @ u
        if self.y_offset is not None:
            y = y + self.y_offset
        return y


@dataclass(frozen=True)
class HoverSetPoint:
    """Hover operating point and the linear-powertrain coupling constants."""

    thrust: float            # T_SP = m g
    motor_speed: float       # Omega_SP
    motor_power: float       # per-motor hover power, W
    total_power: float       # all motors, W
    battery_current: float   # i_b at hover, A
    kappa: float
    kappa_dc: float
    kappa_dod: float
    kappa_uth: float
    kappa_p: float
    b0: float
    b1: float


def lpv_segment_select(dod: float, curve):
    """Active OCV segment index (1-based) and its (b0, b1) pair."""
    return active_segment(dod, curve)


def hover_set_point(vp: VehicleParams, bp: BatteryParams, mp: MotorEscParams,
                    segment: int = None) -> HoverSetPoint:
    """Hover thrust, motor speed, power, battery current, and kappa constants.

    ``segment`` picks the OCV piece whose (b0, b1) parameterize the linear
    powertrain (default: the one active at full charge). The same segment-local
    pair is used in every kappa expression.
    """
    segs = bp.ocv.segments()
    if segment is None:
        segment, b0, b1 = active_segment(0.0, bp.ocv)
    else:
        if not 1 <= segment <= len(segs):
            raise OutOfRange(f"segment {segment} outside 1..{len(segs)}")
        b0, b1, _, _ = segs[segment - 1]

    thrust = vp.weight
    omega_sp = math.sqrt(thrust / (mp.n_motors * vp.k_f)) if thrust > 0.0 else 0.0
    p_dc = bldc_power(omega_sp, mp).total
    p_total = mp.n_motors * p_dc

    radicand = 1.0 - 4.0 * bp.r_internal * p_total / (
        bp.n_series * bp.n_parallel * b0 ** 2 * mp.eta_esc)
    if radicand < 0.0:
        raise PowerInfeasible("hover power exceeds battery capability")
    kappa_inv = math.sqrt(radicand)
    kappa = 1.0 / kappa_inv
    i_b_sp = bp.n_parallel * b0 / (2.0 * bp.r_internal) * (1.0 - kappa_inv)

    d_f = mp.viscous_damping
    kappa_dc = (mp.k_v ** 2 * mp.r_dc
                * (2.0 * mp.k_m ** 2 * omega_sp ** 2
                   + 3.0 * mp.k_m * d_f * omega_sp + d_f ** 2)
                + 1.5 * mp.k_m * omega_sp + d_f)
    kappa_dod = bp.n_parallel * b1 / (2.0 * bp.r_internal) * (1.0 - kappa)
    kappa_uth = bp.n_parallel / (2.0 * bp.r_internal) * (kappa - 1.0)
    kappa_p = kappa / (bp.n_series * b0 * mp.eta_esc)

    return HoverSetPoint(thrust, omega_sp, p_dc, p_total, i_b_sp,
                         kappa, kappa_dc, kappa_dod, kappa_uth, kappa_p, b0, b1)


def linearize_vehicle(vp: VehicleParams, psi_sp: float = 0.0) -> ContinuousLinearModel:
    """Continuous linear multicopter model about hover with yaw set point psi_sp.

    Input is the reduced (L, tau_x, tau_y, tau_z); disturbance is the wind vector.
    """
    g = vp.gravity
    m = vp.mass
    c_f = vp.translational_drag
    c_tau = vp.angular_drag
    j = vp.inertia
    cpsi, spsi = math.cos(psi_sp), math.sin(psi_sp)

    a = np.zeros((12, 12))
    a[0:3, 3:6] = np.eye(3)
    a[3, 6] = -g * spsi
    a[3, 7] = -g * cpsi
    a[3, 3] = -c_f[0] / m
    a[4, 6] = g * cpsi
    a[4, 7] = -g * spsi
    a[4, 4] = -c_f[1] / m
    a[5, 5] = -c_f[2] / m
    a[6:9, 9:12] = np.eye(3)
    a[9, 9] = -c_tau[0] / j[0]
    a[10, 10] = -c_tau[1] / j[1]
    a[11, 11] = -c_tau[2] / j[2]

    b = np.zeros((12, 4))
    b[5, 0] = -1.0 / m
    b[9, 1] = 1.0 / j[0]
    b[10, 2] = 1.0 / j[1]
    b[11, 3] = 1.0 / j[2]

    h = np.zeros((12, 3))
    h[3, 0] = c_f[0] / m
    h[4, 1] = c_f[1] / m
    h[5, 2] = c_f[2] / m

    return ContinuousLinearModel(a, b, h=h)


def linearize_ecm(bp: BatteryParams, mp: MotorEscParams, vp: VehicleParams,
                  segment: int = None, set_point: HoverSetPoint = None) -> ContinuousLinearModel:
    """Continuous linear powertrain model with thrust deviation as input."""
    sp = set_point if set_point is not None else hover_set_point(vp, bp, mp, segment)

    a_b = np.array([[0.0, 0.0],
                    [0.0, -1.0 / (bp.r_polarization * bp.c_polarization)]])
    b_b = np.array([[bp.efficiency / bp.capacity],
                    [1.0 / (bp.n_parallel * bp.c_polarization)]])
    c_b = np.array([[-1.0, 0.0],
                    [bp.n_series * sp.b1, -bp.n_series],
                    [0.0, 0.0]])
    d_b = np.array([[0.0],
                    [-bp.n_series * bp.r_internal / bp.n_parallel],
                    [1.0]])

    current_gain = np.array([[sp.kappa_dod, sp.kappa_uth]])
    thrust_gain = sp.kappa_p * sp.kappa_dc / vp.k_f

    a_e = a_b + b_b @ current_gain
    b_e = b_b * thrust_gain
    c_e = c_b + d_b @ current_gain
    d_e = d_b * thrust_gain
    e_e = (b_b * sp.battery_current).reshape(2)
    y_sp = (d_b * sp.battery_current).reshape(3)
    # At the set point the output SoC is 1, not 0: the C row for SoC is -DoD
    # relative to a fully charged pack, so the offset carries the 1.
    y_sp = y_sp + np.array([1.0, bp.n_series * sp.b0, 0.0])
    return ContinuousLinearModel(a_e, b_e, c=c_e, d=d_e, e=e_e, y_offset=y_sp)


def _series_factor(a: np.ndarray, dt: float, order: int) -> np.ndarray:
    """Gamma = sum_{k=1..order} A^(k-1) dt^k / k! so that A_d = I + Gamma A."""
    n = a.shape[0]
    gamma = np.zeros_like(a)
    term = np.eye(n) * dt
    for k in range(1, order + 1):
        gamma += term
        term = term @ a * (dt / (k + 1))
    return gamma


def discretize_affine(model: ContinuousLinearModel, dt: float, order: int,
                      state_labels=(), input_labels=(), output_labels=()) -> DiscreteLinearModel:
    """Truncated matrix-exponential discretization of an affine model.

    Equivalent to the Lie-series step, which for affine dynamics collapses to
    matrix powers. B, H, and the affine offset are accumulated with the same
    truncated series.
    """
    if order < 1:
        raise InvalidOrder(f"discretization order must be >= 1, got {order}")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    gamma = _series_factor(model.a, dt, order)
    a_d = np.eye(model.a.shape[0]) + gamma @ model.a
    b_d = gamma @ model.b
    h_d = gamma @ model.h if model.h is not None else None
    e_d = gamma @ model.e if model.e is not None else None
    return DiscreteLinearModel(a_d, b_d, dt, h=h_d, c=model.c, d=model.d, e=e_d,
                               y_offset=model.y_offset, state_labels=state_labels,
                               input_labels=input_labels, output_labels=output_labels)


def taylor_lie_discretize(f, x, dt: float, order: int, fd_step: float = 1e-6) -> np.ndarray:
    """One Taylor-Lie step x(k+1) for general time-invariant dynamics f(x).

    Lie derivatives are evaluated by nested central finite differences along
    the flow direction. Inputs and disturbances are held constant over the
    step; close over them in ``f``.
    """
    if order < 1:
        raise InvalidOrder(f"discretization order must be >= 1, got {order}")
    x = np.asarray(x, dtype=float)

    def lie_derivative(g):
        # L_f g: directional derivative of g along the flow, at the query point.
        def lg(xq):
            v = f(xq)
            h = fd_step / max(1.0, float(np.linalg.norm(v)))
            return (g(xq + h * v) - g(xq - h * v)) / (2.0 * h)

        return lg

    xn = x + f(x) * dt
    g = f
    fact = 1.0
    for k in range(2, order + 1):
        fact *= k
        g = lie_derivative(g)
        xn = xn + g(x) * dt ** k / fact
    return xn


def assemble_energy_aware_lpv(vehicle_model: DiscreteLinearModel,
                              ecm_model: DiscreteLinearModel) -> DiscreteLinearModel:
    """Block-diagonal combination of the discrete vehicle and powertrain models."""
    if abs(vehicle_model.dt - ecm_model.dt) > 1e-12:
        raise SamplingMismatch(
            f"dt mismatch: vehicle {vehicle_model.dt}, powertrain {ecm_model.dt}")
    nu, ne = vehicle_model.a.shape[0], ecm_model.a.shape[0]
    mu, me = vehicle_model.b.shape[1], ecm_model.b.shape[1]

    a = np.block([[vehicle_model.a, np.zeros((nu, ne))],
                  [np.zeros((ne, nu)), ecm_model.a]])
    b = np.block([[vehicle_model.b, np.zeros((nu, me))],
                  [np.zeros((ne, mu)), ecm_model.b]])
    h = np.vstack([vehicle_model.h, np.zeros((ne, vehicle_model.h.shape[1]))]) \
        if vehicle_model.h is not None else None
    e = np.concatenate([np.zeros(nu), ecm_model.e]) if ecm_model.e is not None \
        else np.concatenate([np.zeros(nu), np.zeros(ne)])
    c = np.hstack([np.zeros((ecm_model.c.shape[0], nu)), ecm_model.c])
    d = np.hstack([np.zeros((ecm_model.d.shape[0], mu)), ecm_model.d])

    return DiscreteLinearModel(
        a, b, vehicle_model.dt, h=h, c=c, d=d, e=e, y_offset=ecm_model.y_offset,
        state_labels=tuple(STATE_LABELS) + ("dod", "u_th"),
        input_labels=VEHICLE_INPUT_LABELS + ECM_INPUT_LABELS,
        output_labels=OUTPUT_LABELS)


@dataclass
class LpvModelFamily:
    """Assembled combined model per OCV segment, built lazily and cached."""

    vp: VehicleParams
    bp: BatteryParams
    mp: MotorEscParams
    dt: float
    vehicle_order: int = 2
    ecm_order: int = 1
    psi_sp: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def segment_for(self, dod: float) -> int:
        return lpv_segment_select(dod, self.bp.ocv)[0]

    def model(self, segment: int) -> DiscreteLinearModel:
        if segment not in self._cache:
            veh = discretize_affine(linearize_vehicle(self.vp, self.psi_sp),
                                    self.dt, self.vehicle_order)
            ecm = discretize_affine(
                linearize_ecm(self.bp, self.mp, self.vp, segment=segment),
                self.dt, self.ecm_order)
            self._cache[segment] = assemble_energy_aware_lpv(veh, ecm)
        return self._cache[segment]


def write_model_csv(model: DiscreteLinearModel, path) -> None:
    """Export the model as labeled CSV blocks (one ``#`` header per matrix)."""
    blocks = [("A_d", model.a), ("B_d", model.b)]
    if model.h is not None:
        blocks.append(("H_d", model.h))
    if model.c is not None:
        blocks.append(("C_d", model.c))
    if model.d is not None:
        blocks.append(("D_d", model.d))
    if model.e is not None:
        blocks.append(("E_d", model.e.reshape(-1, 1)))
    if model.y_offset is not None:
        blocks.append(("y_SP", model.y_offset.reshape(-1, 1)))

    with open(path, "w") as fh:
        fh.write(f"# dt,{model.dt!r}\n")
        if model.state_labels:
            fh.write("# states," + ",".join(model.state_labels) + "\n")
        if model.input_labels:
            fh.write("# inputs," + ",".join(model.input_labels) + "\n")
        if model.output_labels:
            fh.write("# outputs," + ",".join(model.output_labels) + "\n")
        for name, mat in blocks:
            rows, cols = mat.shape
            fh.write(f"# block,{name},{rows},{cols}\n")
            for row in mat:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
