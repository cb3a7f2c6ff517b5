"""serialsat: attitude dynamics and control for serial-chain spacecraft.

Models a three-body chain (bus, boom, payload) with Kane's equations in
matrix form, linearizes numerically about a commanded attitude, designs
LQR and robust-pole-assignment regulators, and evaluates the closed loop
on the nonlinear plant with energy, settling, and oscillation metrics.
"""

__version__ = "0.1.0"

from .bodies import (AttitudeState, ChainConfig, ControlInput, JointAxes,
                     RigidBodyParams, strawman_chain)
from .errors import (ConfigError, DegenerateError, DivergedError,
                     GimbalLockError, InvalidRotationError,
                     NotStabilizableError, SerialSatError, SingularBlockError,
                     SingularMassError, UncontrollableError)
from .spatial import EulerAngles321

__all__ = [
    "__version__",
    "AttitudeState", "ChainConfig", "ControlInput", "JointAxes",
    "RigidBodyParams", "strawman_chain", "EulerAngles321",
    "SerialSatError", "GimbalLockError", "InvalidRotationError",
    "SingularMassError", "SingularBlockError", "NotStabilizableError",
    "UncontrollableError", "DegenerateError", "DivergedError", "ConfigError",
]
