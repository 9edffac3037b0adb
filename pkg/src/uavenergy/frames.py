"""Reference-frame transforms between the inertial NED and body-fixed FRD frames.

Conventions: Z-Y-X Euler angles (yaw, pitch, roll). Rotation matrices map
body-frame vectors into the inertial frame, v_ned = R @ v_body.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularOrientation

# Margin (rad) kept between |phi|, |theta| and pi/2 before the Euler-rate
# transform is declared singular.
DEFAULT_ANGLE_GUARD = 1e-3


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class EulerAngles:
    """Roll, pitch, yaw in radians."""

    phi: float
    theta: float
    psi: float

    def normalized(self) -> "EulerAngles":
        return EulerAngles(self.phi, self.theta, wrap_angle(self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi])


def rotation_body_to_inertial(angles: EulerAngles) -> np.ndarray:
    """Z-Y-X rotation matrix taking body-frame vectors to the inertial frame."""
    cphi, sphi = math.cos(angles.phi), math.sin(angles.phi)
    cth, sth = math.cos(angles.theta), math.sin(angles.theta)
    cpsi, spsi = math.cos(angles.psi), math.sin(angles.psi)
    return np.array([
        [cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi],
        [spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi],
        [-sth, cth * sphi, cth * cphi],
    ])


def euler_rate_matrix(angles: EulerAngles, guard: float = DEFAULT_ANGLE_GUARD) -> np.ndarray:
    """Matrix mapping body angular velocity to Euler-angle rates.

    Raises SingularOrientation when roll or pitch comes within ``guard``
    radians of +-pi/2 (gimbal-lock proximity).
    """
    limit = math.pi / 2.0 - guard
    if abs(angles.phi) >= limit or abs(angles.theta) >= limit:
        raise SingularOrientation(
            f"roll/pitch too close to +-pi/2: phi={angles.phi:.4f}, theta={angles.theta:.4f}"
        )
    cphi, sphi = math.cos(angles.phi), math.sin(angles.phi)
    cth = math.cos(angles.theta)
    tth = math.tan(angles.theta)
    return np.array([
        [1.0, sphi * tth, cphi * tth],
        [0.0, cphi, -sphi],
        [0.0, sphi / cth, cphi / cth],
    ])
