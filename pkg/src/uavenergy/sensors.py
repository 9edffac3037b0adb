"""Camera and LiDAR operational-constraint calculators.

Bounds on target distance, camera alignment, ground velocity, and tilt angle
that must hold for valid data collection. The LiDAR density bound and the
braking-distance velocity bound are implemented from their dimensionally
consistent derivations (point count over footprint area; stopping distance
v*t_R + v^2/(2a) <= r_L).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import frames
from .errors import CoincidentTarget, DegenerateFov
from .report import ConstraintReport, upper_bound
from .vehicle import VehicleParams


@dataclass(frozen=True)
class CameraSpec:
    resolution: float        # I, pixels along the constraining axis
    fov: float               # gamma, rad
    aspect_ratio: float      # rho
    sampling_period: float   # T_s,c, s
    overlap: float           # delta_c, fraction of successive images
    min_spatial_resolution: float  # R_I,min, px/m
    mount: str = "gimbal"    # "gimbal" or "fixed"
    boresight: np.ndarray = None  # a_c, unit vector in body frame (fixed mounts)

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError("image resolution must be positive")
        if not 0.0 < self.fov < math.pi:
            raise ValueError("field of view must be in (0, pi)")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("image overlap must be in [0, 1]")
        if self.mount not in ("gimbal", "fixed"):
            raise ValueError("mount must be 'gimbal' or 'fixed'")
        if self.mount == "fixed":
            if self.boresight is None:
                raise ValueError("fixed mounts need a boresight vector")
            vec = np.asarray(self.boresight, dtype=float)
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError("boresight must be a unit vector")
            object.__setattr__(self, "boresight", vec / norm)


@dataclass(frozen=True)
class LidarSpec:
    fov_horizontal: float    # gamma_h, rad
    fov_vertical: float      # gamma_v, rad
    fov_horizontal_valid: float  # gamma_h*, rad, used for ground scanning
    range: float             # r_L, m
    res_vertical: float      # V_res, rad
    res_horizontal: float    # H_res, rad
    scan_rate: float         # f_L, Hz
    overlap: float           # delta_L
    min_point_density: float  # R_L,min, pts/m^2
    reaction_time: float     # t_R, s
    scan_config: str = "vertical"  # "vertical" or "horizontal"

    def __post_init__(self):
        for name in ("fov_horizontal", "fov_vertical", "fov_horizontal_valid",
                     "res_vertical", "res_horizontal",
                     "min_point_density", "reaction_time"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.range < 0.0 or self.scan_rate < 0.0:
            raise ValueError("range and scan_rate must be non-negative")
        if self.fov_horizontal_valid > self.fov_horizontal:
            raise ValueError("valid horizontal FOV cannot exceed the full FOV")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("scan overlap must be in [0, 1]")
        if self.scan_config not in ("vertical", "horizontal"):
            raise ValueError("scan_config must be 'vertical' or 'horizontal'")


def camera_max_target_distance(spec: CameraSpec) -> float:
    """Largest target distance (m) keeping the spatial resolution above minimum."""
    t = math.tan(spec.fov / 2.0)
    if t <= 0.0:
        raise DegenerateFov("tan(fov/2) must be positive")
    return spec.resolution / (2.0 * spec.min_spatial_resolution * t)


def camera_alignment(p, p_target, attitude: frames.EulerAngles, spec: CameraSpec):
    """Alignment angle chi (rad), pass flag, and the admissible bound (rad).

    Gimbal mounts track the target, so chi = 0 and the pass condition reduces
    to flying above the target altitude (NED: z <= z_t).
    """
    p = np.asarray(p, dtype=float)
    p_target = np.asarray(p_target, dtype=float)
    offset = p_target - p
    dist = float(np.linalg.norm(offset))
    if dist == 0.0:
        raise CoincidentTarget("UAV and target positions coincide")

    if spec.mount == "gimbal":
        return 0.0, bool(p[2] <= p_target[2]), math.inf

    boresight_inertial = frames.rotation_body_to_inertial(attitude) @ spec.boresight
    cos_chi = float(offset / dist @ boresight_inertial)
    chi = math.acos(min(1.0, max(-1.0, cos_chi)))
    target_size = spec.resolution / spec.min_spatial_resolution
    bound = spec.fov / 2.0 - math.atan(target_size / (2.0 * dist))
    return chi, chi <= bound, bound


def camera_survey_velocity_bound(z: float, z_target: float, spec: CameraSpec) -> float:
    """Ground-velocity cap (m/s) preserving the required overlap of successive images."""
    return (2.0 * abs(z_target - z) * math.tan(spec.fov / 2.0)
            * (1.0 - spec.overlap) / (spec.aspect_ratio * spec.sampling_period))


def lidar_ground_constraints(z: float, z_target: float, spec: LidarSpec):
    """Distance and velocity bounds for the downward-scanning configuration.

    Returns (d_max, v_g_max, report). The density bound comes from point count
    over footprint area: N_p / (4 d^2 tan(gv/2) tan(gh*/2)) >= R_L,min with
    N_p = gv gh* / (V_res H_res); additionally the slant range must stay within
    the effective sensor range at the footprint edges.
    """
    if spec.scan_config != "vertical":
        raise ValueError("ground constraints apply to the vertical scan configuration")
    gv, gh = spec.fov_vertical, spec.fov_horizontal_valid
    n_points = gv * gh / (spec.res_vertical * spec.res_horizontal)
    area_per_d2 = 4.0 * math.tan(gv / 2.0) * math.tan(gh / 2.0)
    d_density = math.sqrt(n_points / (spec.min_point_density * area_per_d2))
    d_range_v = spec.range * math.cos(gv / 2.0)
    d_range_h = spec.range * math.cos(gh / 2.0)
    d_max = min(d_density, d_range_v, d_range_h)

    v_g_max = 2.0 * abs(z_target - z) * math.tan(gv / 2.0) * (1.0 - spec.overlap) * spec.scan_rate

    d_t = abs(z_target - z)
    report = ConstraintReport(
        (upper_bound("target_distance_density", d_t, d_density),
         upper_bound("target_distance_range_v", d_t, d_range_v),
         upper_bound("target_distance_range_h", d_t, d_range_h)),
        extras={"d_max": d_max, "v_g_max": v_g_max})
    return d_max, v_g_max, report


def lidar_obstacle_constraints(vp: VehicleParams, spec: LidarSpec):
    """Velocity and tilt caps for the forward-scanning obstacle-detection setup.

    The velocity bound solves v t_R + v^2/(2a) = r_L with the braking
    acceleration a ~ alpha_max * g; the tilt cap keeps obstacles inside the
    vertical field of view and is combined with the vehicle's own limit.
    """
    if spec.scan_config != "horizontal":
        raise ValueError("obstacle constraints apply to the horizontal scan configuration")
    a = vp.limits.alpha_max * vp.gravity
    at = a * spec.reaction_time
    v_g_max = -at + math.sqrt(at ** 2 + 2.0 * a * spec.range)
    alpha_sensor = spec.fov_vertical / 2.0
    alpha_effective = min(vp.limits.alpha_max, alpha_sensor)
    return v_g_max, alpha_sensor, alpha_effective
