"""Linear time-invariant model about a commanded zero-rate attitude.

The Jacobians are built with Richardson-extrapolated central differences
instead of symbolic algebra; the partitioned (Schur complement) solve of
the generalized mass matrix is used on every probe evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bodies import AttitudeState, ChainConfig, ControlInput
from .dynamics import state_derivative
from .errors import SingularBlockError

EQUILIBRIUM_TOL = 1e-10
DEFAULT_FD_STEP = 1e-6


def block_reduced_solve(l: np.ndarray, p: np.ndarray):
    """Solve the 8x8 SPD system L x = p via its 5/3 partition.

    With L = [[L1, L2], [L2^T, L3]] and p = [p1; p2]:

        x1 = (L1 - L2 L3^{-1} L2^T)^{-1} (p1 - L2 L3^{-1} p2)
        x2 = L3^{-1} (p2 - L2^T x1)

    implemented with Cholesky factorizations of L3 and of the Schur
    complement.  Returns (x1, x2).
    """
    l = np.asarray(l, dtype=float)
    p = np.asarray(p, dtype=float).reshape(8)
    l1, l2, l3 = l[:5, :5], l[:5, 5:], l[5:, 5:]
    p1, p2 = p[:5], p[5:]
    try:
        c3 = scipy.linalg.cho_factor(l3, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlockError(f"trailing 3x3 block not positive definite: {exc}") from exc
    l3inv_l2t = scipy.linalg.cho_solve(c3, l2.T, check_finite=False)
    schur = l1 - l2 @ l3inv_l2t
    try:
        cs = scipy.linalg.cho_factor(schur, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularBlockError(f"Schur complement not positive definite: {exc}") from exc
    x1 = scipy.linalg.cho_solve(cs, p1 - l2 @ scipy.linalg.cho_solve(c3, p2, check_finite=False),
                                check_finite=False)
    x2 = scipy.linalg.cho_solve(c3, p2 - l2.T @ x1, check_finite=False)
    return x1, x2


def find_equilibrium_residual(cfg: ChainConfig, state: AttitudeState) -> float:
    """Max-norm of the state derivative at `state` with zero input."""
    xdot = state_derivative(cfg, state, ControlInput.zero())
    return float(np.max(np.abs(xdot)))


@dataclass(frozen=True)
class Equilibrium:
    """Zero-rate attitude verified to be a fixed point of the dynamics."""

    state: AttitudeState
    residual: float

    @classmethod
    def at(cls, cfg: ChainConfig, state: AttitudeState,
           tol: float = EQUILIBRIUM_TOL) -> "Equilibrium":
        rates = np.concatenate([state.omega, [state.sigma1, state.sigma2]])
        if np.any(rates != 0.0):
            raise ValueError("equilibrium state must have zero rates")
        res = find_equilibrium_residual(cfg, state)
        if res >= tol:
            raise ValueError(f"residual {res:.3e} exceeds equilibrium tolerance {tol:.1e}")
        return cls(state=state, residual=res)


@dataclass(frozen=True)
class LinearModel:
    """xdot = A (x - x_d) + B u about the equilibrium x_d."""

    a: np.ndarray  # 10x10
    b: np.ndarray  # 10x5
    x_d: Equilibrium
    fd_step: float


def _derivative_flat(cfg, x, u):
    return state_derivative(cfg, AttitudeState.from_vector(x),
                            ControlInput.from_vector(u), block_solve=True)


def _central(f, z0, i, h):
    zp, zm = z0.copy(), z0.copy()
    zp[i] += h
    zm[i] -= h
    return (f(zp) - f(zm)) / (2.0 * h)


def _jacobian(f, z0, fd_step):
    """Central differences with one Richardson level per column."""
    n_out = f(z0).shape[0]
    jac = np.zeros((n_out, z0.shape[0]))
    for i in range(z0.shape[0]):
        h = max(fd_step, fd_step * abs(z0[i]))
        d_h = _central(f, z0, i, h)
        d_h2 = _central(f, z0, i, h / 2.0)
        jac[:, i] = (4.0 * d_h2 - d_h) / 3.0
    return jac


def linearize(cfg: ChainConfig, eq: Equilibrium,
              fd_step: float = DEFAULT_FD_STEP) -> LinearModel:
    """Numerically linearize the plant about `eq` with zero input."""
    x0 = eq.state.as_vector()
    u0 = np.zeros(5)
    a = _jacobian(lambda x: _derivative_flat(cfg, x, u0), x0, fd_step)
    b = _jacobian(lambda u: _derivative_flat(cfg, x0, u), u0, fd_step)
    return LinearModel(a=a, b=b, x_d=eq, fd_step=fd_step)
