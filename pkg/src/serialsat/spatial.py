"""Frame algebra shared by the dynamics code.

Conventions: angles in radians everywhere; rotation matrices are passive
(coordinate-transformation) matrices, so for frames a and b the matrix
written ``R_ab`` maps components resolved in b to components resolved in a.
``rot321`` returns the inertial-to-body matrix of the intrinsic 3-2-1
(yaw-pitch-roll) sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GimbalLockError, InvalidRotationError

# Half-width of the excluded band around pitch = +/- pi/2 (rad).
GIMBAL_LOCK_EPS = 1e-6

# Orthogonality / determinant tolerance for rotation matrices.
ROTATION_TOL = 1e-12


def skew(a) -> np.ndarray:
    """Return the 3x3 antisymmetric matrix a^x with a^x @ b == cross(a, b)."""
    a1, a2, a3 = float(a[0]), float(a[1]), float(a[2])
    return np.array([[0.0, -a3, a2],
                     [a3, 0.0, -a1],
                     [-a2, a1, 0.0]])


@dataclass(frozen=True)
class EulerAngles321:
    """Intrinsic 3-2-1 attitude: roll, pitch, yaw in radians.

    Construction rejects pitch inside the gimbal-lock guard band, where the
    rate kinematics blow up (sec(pitch) factor).
    """

    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        if not (math.isfinite(self.roll) and math.isfinite(self.pitch)
                and math.isfinite(self.yaw)):
            raise ValueError("Euler angles must be finite")
        if abs(self.pitch) >= math.pi / 2 - GIMBAL_LOCK_EPS:
            raise GimbalLockError(
                f"pitch {self.pitch:.6f} rad is within {GIMBAL_LOCK_EPS} of +/- pi/2")


def rot321(e: EulerAngles321) -> np.ndarray:
    """Inertial-to-body direction cosine matrix of the 3-2-1 sequence.

    Returns R_x(roll) @ R_y(pitch) @ R_z(yaw).
    """
    cph, sph = math.cos(e.roll), math.sin(e.roll)
    cth, sth = math.cos(e.pitch), math.sin(e.pitch)
    cps, sps = math.cos(e.yaw), math.sin(e.yaw)
    rx = np.array([[1.0, 0.0, 0.0],
                   [0.0, cph, sph],
                   [0.0, -sph, cph]])
    ry = np.array([[cth, 0.0, -sth],
                   [0.0, 1.0, 0.0],
                   [sth, 0.0, cth]])
    rz = np.array([[cps, sps, 0.0],
                   [-sps, cps, 0.0],
                   [0.0, 0.0, 1.0]])
    return rx @ ry @ rz


def rot_y(angle: float) -> np.ndarray:
    """Passive rotation by `angle` about the y axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, -s],
                     [0.0, 1.0, 0.0],
                     [s, 0.0, c]])


def axis_rotation(axis, angle: float) -> np.ndarray:
    """Passive rotation by `angle` about a unit `axis`.

    Reduces exactly to rot_y(angle) for axis = [0, 1, 0]; used for the
    gimbal frames so configurations with non-default joint axes stay
    consistent.
    """
    n = np.asarray(axis, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return c * np.eye(3) + (1.0 - c) * np.outer(n, n) - s * skew(n)


def validate_rotation(r: np.ndarray, tol: float = ROTATION_TOL) -> None:
    """Raise InvalidRotationError unless r is orthogonal with det +1.

    No silent re-orthonormalization: an invalid matrix is an upstream bug.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise InvalidRotationError(f"expected 3x3 matrix, got {r.shape}")
    err = np.max(np.abs(r @ r.T - np.eye(3)))
    if err > tol:
        raise InvalidRotationError(f"orthogonality defect {err:.3e} exceeds {tol:.1e}")
    det = np.linalg.det(r)
    if abs(det - 1.0) > tol:
        raise InvalidRotationError(f"determinant {det!r} differs from +1 beyond {tol:.1e}")


def inverse_rotation(r: np.ndarray) -> np.ndarray:
    """Inverse (= transpose) of a valid rotation matrix."""
    validate_rotation(r)
    return np.array(r).T.copy()


def euler_rates(e: EulerAngles321, omega, eps: float = GIMBAL_LOCK_EPS) -> np.ndarray:
    """Euler-angle rates (roll_dot, pitch_dot, yaw_dot) for body rate `omega`.

    `omega` is the body angular rate resolved in the body frame.  Raises
    GimbalLockError when |pitch| >= pi/2 - eps.
    """
    if abs(e.pitch) >= math.pi / 2 - eps:
        raise GimbalLockError(
            f"pitch {e.pitch:.6f} rad is within {eps} of +/- pi/2")
    w1, w2, w3 = float(omega[0]), float(omega[1]), float(omega[2])
    sph, cph = math.sin(e.roll), math.cos(e.roll)
    tth = math.tan(e.pitch)
    sec = 1.0 / math.cos(e.pitch)
    return np.array([
        w1 + w2 * sph * tth + w3 * cph * tth,
        w2 * cph - w3 * sph,
        w2 * sph * sec + w3 * cph * sec,
    ])
