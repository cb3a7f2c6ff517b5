"""Plant description: rigid bodies, joints, chain configuration, and state.

The chain is spacecraft bus -> gimbal G1 -> boom -> gimbal G2 -> payload.
Joint attachment offsets are given in each body's own frame and point from
the body center of mass to the joint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spatial import EulerAngles321

SYMMETRY_TOL = 1e-12
UNIT_TOL = 1e-12


def _frozen_vec3(v, name):
    a = np.asarray(v, dtype=float).reshape(3).copy()
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RigidBodyParams:
    """Mass, inertia about the body CoM, and joint offsets for one body.

    `offsets` maps joint names ("g1", "g2") to CoM-to-joint vectors in the
    body frame [m].
    """

    mass: float
    inertia: np.ndarray
    offsets: dict

    def __post_init__(self):
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass!r}")
        j = np.asarray(self.inertia, dtype=float).reshape(3, 3).copy()
        scale = max(np.max(np.abs(j)), 1.0)
        if np.max(np.abs(j - j.T)) > SYMMETRY_TOL * scale:
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(j) <= 0.0):
            raise ValueError("inertia must be positive definite")
        j.flags.writeable = False
        object.__setattr__(self, "inertia", j)
        object.__setattr__(
            self, "offsets",
            {k: _frozen_vec3(v, f"offset {k}") for k, v in self.offsets.items()})


@dataclass(frozen=True)
class JointAxes:
    """Unit rotation axes of the two single-degree-of-freedom gimbals."""

    gamma1: np.ndarray = (0.0, 1.0, 0.0)
    gamma2: np.ndarray = (0.0, 1.0, 0.0)

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            a = _frozen_vec3(getattr(self, name), name)
            if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
                raise ValueError(f"{name} must be a unit vector")
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class ChainConfig:
    """Three-body serial chain: spacecraft, boom, payload plus joint axes.

    Fixed three-body topology; the tree generalization is an extension
    point, not implemented.
    """

    spacecraft: RigidBodyParams
    boom: RigidBodyParams
    payload: RigidBodyParams
    joints: JointAxes = field(default_factory=JointAxes)

    def __post_init__(self):
        for body, needed in (("spacecraft", ("g1",)), ("boom", ("g1", "g2")),
                             ("payload", ("g2",))):
            have = getattr(self, body).offsets
            for key in needed:
                if key not in have:
                    raise ValueError(f"{body} is missing joint offset {key!r}")
        # Constant block matrices reused by every evaluation.
        j9 = np.zeros((9, 9))
        j9[0:3, 0:3] = self.spacecraft.inertia
        j9[3:6, 3:6] = self.boom.inertia
        j9[6:9, 6:9] = self.payload.inertia
        j9.flags.writeable = False
        m9 = np.repeat([self.spacecraft.mass, self.boom.mass, self.payload.mass], 3)
        m9.flags.writeable = False
        object.__setattr__(self, "_j9", j9)
        object.__setattr__(self, "_m9", m9)

    @property
    def inertia_blocks(self) -> np.ndarray:
        """9x9 block-diagonal inertia matrix diag(J_s, J_b, J_p)."""
        return self._j9

    @property
    def mass_diagonal(self) -> np.ndarray:
        """Diagonal of the 9x9 mass matrix, one mass per velocity component."""
        return self._m9

    @property
    def total_mass(self) -> float:
        return self.spacecraft.mass + self.boom.mass + self.payload.mass


@dataclass(frozen=True)
class AttitudeState:
    """Ten-element control state.

    Flattened order: [roll, pitch, yaw, gamma, lam, w1, w2, w3, sigma1,
    sigma2] with the spacecraft body rate w in the spacecraft frame and
    sigma1 = gamma_dot, sigma2 = lam_dot.
    """

    euler: EulerAngles321
    gamma: float
    lam: float
    omega: np.ndarray
    sigma1: float
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "omega", _frozen_vec3(self.omega, "omega"))
        for name in ("gamma", "lam", "sigma1", "sigma2"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_vector(self) -> np.ndarray:
        e = self.euler
        return np.array([e.roll, e.pitch, e.yaw, self.gamma, self.lam,
                         self.omega[0], self.omega[1], self.omega[2],
                         self.sigma1, self.sigma2])

    @classmethod
    def from_vector(cls, x) -> "AttitudeState":
        x = np.asarray(x, dtype=float).reshape(10)
        return cls(euler=EulerAngles321(x[0], x[1], x[2]),
                   gamma=x[3], lam=x[4], omega=x[5:8],
                   sigma1=x[8], sigma2=x[9])

    @classmethod
    def zero_rates(cls, roll=0.0, pitch=0.0, yaw=0.0, gamma=0.0, lam=0.0):
        return cls(euler=EulerAngles321(roll, pitch, yaw), gamma=gamma,
                   lam=lam, omega=np.zeros(3), sigma1=0.0, sigma2=0.0)


@dataclass(frozen=True)
class ControlInput:
    """Spacecraft body torque [N m] plus the two gimbal axis torques [N m].

    Flattened order: [tau_s1, tau_s2, tau_s3, u_g1, u_g2].  The gimbal
    torques act about the joint axes, so the boom and payload torque
    vectors are gamma1 * u_g1 and gamma2 * u_g2 in their body frames.
    """

    tau_s: np.ndarray
    u_g1: float
    u_g2: float

    def __post_init__(self):
        object.__setattr__(self, "tau_s", _frozen_vec3(self.tau_s, "tau_s"))
        if not (np.isfinite(self.u_g1) and np.isfinite(self.u_g2)):
            raise ValueError("gimbal torques must be finite")

    def as_vector(self) -> np.ndarray:
        return np.array([self.tau_s[0], self.tau_s[1], self.tau_s[2],
                         self.u_g1, self.u_g2])

    @classmethod
    def from_vector(cls, u) -> "ControlInput":
        u = np.asarray(u, dtype=float).reshape(5)
        return cls(tau_s=u[0:3], u_g1=u[3], u_g2=u[4])

    @classmethod
    def zero(cls) -> "ControlInput":
        return cls(tau_s=np.zeros(3), u_g1=0.0, u_g2=0.0)


def strawman_chain() -> ChainConfig:
    """Documented strawman plant used by the shipped scenario and tests.

    These numbers are NOT from any flown or published vehicle; they are a
    physically plausible stand-in chosen to exercise the model: a heavy bus,
    a long slender boom (about 11 m tip to tip), and a payload heavier than
    the bus.  Off-diagonal inertia terms are kept small but nonzero so that
    frame-handling bugs cannot hide behind symmetry.
    """
    spacecraft = RigidBodyParams(
        mass=3500.0,
        inertia=np.array([[11000.0, 200.0, -150.0],
                          [200.0, 9000.0, 100.0],
                          [-150.0, 100.0, 12500.0]]),
        offsets={"g1": [0.8, 2.5, -0.3]},
    )
    boom = RigidBodyParams(
        mass=450.0,
        inertia=np.array([[4800.0, 10.0, -5.0],
                          [10.0, 4850.0, 8.0],
                          [-5.0, 8.0, 40.0]]),
        offsets={"g1": [0.1, -0.2, -5.5], "g2": [-0.05, 0.15, 5.8]},
    )
    payload = RigidBodyParams(
        mass=6000.0,
        inertia=np.array([[45000.0, -500.0, 300.0],
                          [-500.0, 38000.0, -250.0],
                          [300.0, -250.0, 30000.0]]),
        offsets={"g2": [0.4, -3.0, 0.6]},
    )
    return ChainConfig(spacecraft=spacecraft, boom=boom, payload=payload)
