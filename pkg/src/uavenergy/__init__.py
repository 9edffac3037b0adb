"""Energy-aware multicopter modeling toolkit.

Nonlinear 6-DOF dynamics with per-rotor mixing, a Thevenin battery / ESC /
BLDC powertrain model, sensor operational-constraint calculators, hover-point
linearization with Taylor-Lie discretization, a fixed-step simulator, and a
flight-log validation harness.
"""

__version__ = "0.1.0"

from .energy_aware import (CombinedState, EtlParams, FlightLog,  # noqa: F401
                           SimulationResult, ValidationReport, combined_dynamics,
                           load_flight_log, simulate, thrust_correction,
                           validate_against_log)
from .frames import EulerAngles, euler_rate_matrix, rotation_body_to_inertial  # noqa: F401
from .linear import (DiscreteLinearModel, HoverSetPoint, LpvModelFamily,  # noqa: F401
                     discretize_affine, hover_set_point, linearize_ecm,
                     linearize_vehicle, taylor_lie_discretize)
from .powertrain import (BatteryParams, LinearOcv, MotorEscParams,  # noqa: F401
                         OcvSegment, PiecewiseOcv, PowertrainState,
                         battery_current, bldc_power, ecm_dynamics)
from .vehicle import (Limits, Rotor, UavInput, UavState, VehicleParams,  # noqa: F401
                      WindDisturbance, dynamics, mix_motor_speeds)
