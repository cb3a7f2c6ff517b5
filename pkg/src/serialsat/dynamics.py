"""Kane's equations in matrix form for the three-body serial chain.

The generalized speeds are x_g = [w_s (3), sigma1, sigma2, v_s (3)] with
w_s the spacecraft body rate (spacecraft frame) and v_s the spacecraft CoM
velocity (inertial frame).  Stacked body angular rates live in their own
body frames; stacked CoM velocities live in the inertial frame.  The
assembly produces

    L xdot_g = r1 + r2,
    L  = Omega^T J Omega + V^T M V,
    r1 = Omega^T (tau - J alpha_r - wxh),
    r2 = -V^T M a_r,          (no external forces)

which is solved by a symmetric positive-definite factorization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bodies import AttitudeState, ChainConfig, ControlInput
from .errors import SingularMassError
from .spatial import axis_rotation, euler_rates, rot321, skew


@dataclass(frozen=True)
class FrameSet:
    """Rotation matrices of the chain at one state (all passive).

    o_si maps inertial to spacecraft components, o_bs spacecraft to boom,
    o_pb boom to payload, o_ps spacecraft to payload.
    """

    o_si: np.ndarray
    o_bs: np.ndarray
    o_pb: np.ndarray
    o_ps: np.ndarray

    @property
    def o_is(self):
        return self.o_si.T

    @property
    def o_ib(self):
        # O_{I/b} = (O_{b/s} O_{s/I})^T
        return (self.o_bs @ self.o_si).T

    @property
    def o_ip(self):
        return (self.o_ps @ self.o_si).T


@dataclass(frozen=True)
class OffsetSet:
    """Joint offsets and body-to-body vectors resolved in the inertial frame."""

    r_g1s: np.ndarray
    r_g1b: np.ndarray
    r_g2b: np.ndarray
    r_g2p: np.ndarray
    r_g1p: np.ndarray
    r_sb: np.ndarray
    r_sp: np.ndarray


@dataclass(frozen=True)
class KaneSystem:
    """Assembled model at one (state, input) pair."""

    omega_dyad: np.ndarray  # 9x8 partial angular-rate dyad
    velocity_dyad: np.ndarray  # 9x8 partial velocity dyad
    alpha_r: np.ndarray  # 9, remainder angular accelerations
    a_r: np.ndarray  # 9, remainder linear accelerations
    mass_matrix: np.ndarray  # 8x8 L, symmetric positive definite
    r1: np.ndarray  # 8
    r2: np.ndarray  # 8
    frames: FrameSet
    offsets: OffsetSet


def chain_frames(cfg: ChainConfig, state: AttitudeState) -> FrameSet:
    """Rotation matrices of all chain frames at `state`."""
    o_si = rot321(state.euler)
    o_bs = axis_rotation(cfg.joints.gamma1, state.gamma)
    o_pb = axis_rotation(cfg.joints.gamma2, state.lam)
    return FrameSet(o_si=o_si, o_bs=o_bs, o_pb=o_pb, o_ps=o_pb @ o_bs)


def offsets_in_inertial(cfg: ChainConfig, state: AttitudeState,
                        frames: FrameSet | None = None) -> OffsetSet:
    """Resolve the four joint offsets in the inertial frame plus composites."""
    f = frames if frames is not None else chain_frames(cfg, state)
    r_g1s = f.o_is @ cfg.spacecraft.offsets["g1"]
    r_g1b = f.o_ib @ cfg.boom.offsets["g1"]
    r_g2b = f.o_ib @ cfg.boom.offsets["g2"]
    r_g2p = f.o_ip @ cfg.payload.offsets["g2"]
    r_g1p = r_g2p - r_g2b + r_g1b
    return OffsetSet(r_g1s=r_g1s, r_g1b=r_g1b, r_g2b=r_g2b, r_g2p=r_g2p,
                     r_g1p=r_g1p, r_sb=r_g1b - r_g1s, r_sp=r_g1p - r_g1s)


def partial_rate_dyad(cfg: ChainConfig, state: AttitudeState,
                      frames: FrameSet | None = None) -> np.ndarray:
    """9x8 dyad mapping generalized speeds to stacked body angular rates."""
    f = frames if frames is not None else chain_frames(cfg, state)
    g1, g2 = cfg.joints.gamma1, cfg.joints.gamma2
    omega = np.zeros((9, 8))
    omega[0:3, 0:3] = np.eye(3)
    omega[3:6, 0:3] = f.o_bs
    omega[3:6, 3] = g1
    omega[6:9, 0:3] = f.o_ps
    omega[6:9, 3] = f.o_pb @ g1
    omega[6:9, 4] = g2
    return omega


def partial_velocity_dyad(cfg: ChainConfig, state: AttitudeState,
                          frames: FrameSet | None = None,
                          offsets: OffsetSet | None = None) -> np.ndarray:
    """9x8 dyad mapping generalized speeds to stacked CoM velocities."""
    f = frames if frames is not None else chain_frames(cfg, state)
    r = offsets if offsets is not None else offsets_in_inertial(cfg, state, f)
    s_g1s = skew(r.r_g1s)
    s_g1b = skew(r.r_g1b)
    s_g2b = skew(r.r_g2b)
    s_g2p = skew(r.r_g2p)
    ib_g1 = f.o_ib @ cfg.joints.gamma1
    v21 = (s_g1b - s_g1s) @ f.o_is
    v22 = s_g1b @ ib_g1
    v31 = (s_g1b - s_g1s + s_g2p - s_g2b) @ f.o_is
    v32 = (s_g1b + s_g2p - s_g2b) @ ib_g1
    v33 = s_g2p @ (f.o_ip @ cfg.joints.gamma2)
    v = np.zeros((9, 8))
    v[0:3, 5:8] = np.eye(3)
    v[3:6, 0:3] = v21
    v[3:6, 3] = v22
    v[3:6, 5:8] = np.eye(3)
    v[6:9, 0:3] = v31
    v[6:9, 3] = v32
    v[6:9, 4] = v33
    v[6:9, 5:8] = np.eye(3)
    return v


def body_rates(cfg: ChainConfig, state: AttitudeState,
               frames: FrameSet | None = None):
    """Inertial angular rates (w_s, w_b, w_p), each in its own body frame.

    Full recursion including the joint-rate terms:
        w_b = O_bs w_s + gamma1 * sigma1
        w_p = O_pb w_b + gamma2 * sigma2
    """
    f = frames if frames is not None else chain_frames(cfg, state)
    w_s = state.omega
    w_b = f.o_bs @ w_s + cfg.joints.gamma1 * state.sigma1
    w_p = f.o_pb @ w_b + cfg.joints.gamma2 * state.sigma2
    return w_s, w_b, w_p


def remainder_accelerations(cfg: ChainConfig, state: AttitudeState,
                            frames: FrameSet | None = None,
                            offsets: OffsetSet | None = None):
    """Remainder terms (alpha_r, a_r): the acceleration pieces that do not
    multiply xdot_g.  Both stacks are zero at zero rates."""
    f = frames if frames is not None else chain_frames(cfg, state)
    r = offsets if offsets is not None else offsets_in_inertial(cfg, state, f)
    w_s, w_b, w_p = body_rates(cfg, state, f)
    g1, g2 = cfg.joints.gamma1, cfg.joints.gamma2

    alpha_b_r = np.cross(w_b, g1 * state.sigma1)
    alpha_p_r = np.cross(w_p, g2 * state.sigma2) + f.o_pb @ alpha_b_r
    alpha_r = np.concatenate([np.zeros(3), alpha_b_r, alpha_p_r])

    # Body rates resolved in the inertial frame for the centripetal terms.
    wi_s = f.o_is @ w_s
    wi_b = f.o_ib @ w_b
    wi_p = f.o_ip @ w_p
    a_b_r = (np.cross(wi_s, np.cross(wi_s, r.r_g1s))
             - np.cross(wi_b, np.cross(wi_b, r.r_g1b))
             + np.cross(r.r_g1b, f.o_ib @ alpha_b_r))
    a_p_r = (a_b_r
             - np.cross(r.r_g2b, f.o_ib @ alpha_b_r)
             + np.cross(r.r_g2p, f.o_ip @ alpha_p_r)
             + np.cross(wi_b, np.cross(wi_b, r.r_g2b))
             - np.cross(wi_p, np.cross(wi_p, r.r_g2p)))
    a_r = np.concatenate([np.zeros(3), a_b_r, a_p_r])
    return alpha_r, a_r


def generalized_torque_stack(cfg: ChainConfig, u: ControlInput) -> np.ndarray:
    """Stacked torque vector [tau_s - tau_b; tau_b - tau_p; tau_p].

    tau_b = gamma1 * u_g1 and tau_p = gamma2 * u_g2.  Each gimbal axis is
    invariant under its own joint rotation, so the reaction rows are frame
    consistent as written.
    """
    tau_b = cfg.joints.gamma1 * u.u_g1
    tau_p = cfg.joints.gamma2 * u.u_g2
    return np.concatenate([u.tau_s - tau_b, tau_b - tau_p, tau_p])


def gyroscopic_stack(cfg: ChainConfig, state: AttitudeState,
                     frames: FrameSet | None = None) -> np.ndarray:
    """Stacked w x (J w) terms using the full inertial body rates.

    The inertial rates (not the relative joint rates) are what Euler's
    equation requires; the free-float conservation suite pins this choice.
    """
    w_s, w_b, w_p = body_rates(cfg, state, frames)
    return np.concatenate([
        np.cross(w_s, cfg.spacecraft.inertia @ w_s),
        np.cross(w_b, cfg.boom.inertia @ w_b),
        np.cross(w_p, cfg.payload.inertia @ w_p),
    ])


def assemble_kane(cfg: ChainConfig, state: AttitudeState,
                  u: ControlInput) -> KaneSystem:
    """Assemble L, r1, r2 (and every intermediate) at one state and input."""
    f = chain_frames(cfg, state)
    r = offsets_in_inertial(cfg, state, f)
    omega = partial_rate_dyad(cfg, state, f)
    v = partial_velocity_dyad(cfg, state, f, r)
    alpha_r, a_r = remainder_accelerations(cfg, state, f, r)

    j9 = cfg.inertia_blocks
    m9 = cfg.mass_diagonal
    mass_matrix = omega.T @ (j9 @ omega) + v.T @ (m9[:, None] * v)

    tau = generalized_torque_stack(cfg, u)
    wxh = gyroscopic_stack(cfg, state, f)
    r1 = omega.T @ (tau - j9 @ alpha_r - wxh)
    r2 = -(v.T @ (m9 * a_r))
    return KaneSystem(omega_dyad=omega, velocity_dyad=v, alpha_r=alpha_r,
                      a_r=a_r, mass_matrix=mass_matrix, r1=r1, r2=r2,
                      frames=f, offsets=r)


def solve_spd(l: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L x = rhs with a Cholesky factorization; no explicit inverse."""
    try:
        c = scipy.linalg.cho_factor(l, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMassError(
            f"generalized mass matrix is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(c, rhs, check_finite=False)


def forward_dynamics(cfg: ChainConfig, state: AttitudeState,
                     u: ControlInput) -> np.ndarray:
    """Generalized accelerations xdot_g = [wdot_s, sigma1dot, sigma2dot, vdot_s]."""
    sys = assemble_kane(cfg, state, u)
    return solve_spd(sys.mass_matrix, sys.r1 + sys.r2)


def state_derivative(cfg: ChainConfig, state: AttitudeState, u: ControlInput,
                     block_solve: bool = False) -> np.ndarray:
    """Time derivative of the ten-element control state.

    Rows 1-3 are the 3-2-1 rate kinematics, rows 4-5 the gimbal rates, rows
    6-10 the first five generalized accelerations; vdot_s decouples from the
    attitude states and is discarded.  With block_solve=True rows 6-10 come
    from the partitioned (Schur complement) solve instead of the dense one.
    """
    kin = euler_rates(state.euler, state.omega)
    if block_solve:
        from .linearize import block_reduced_solve
        sys = assemble_kane(cfg, state, u)
        xg1, _ = block_reduced_solve(sys.mass_matrix, sys.r1 + sys.r2)
    else:
        xg1 = forward_dynamics(cfg, state, u)[:5]
    return np.concatenate([kin, [state.sigma1, state.sigma2], xg1])


def momentum_energy(cfg: ChainConfig, state: AttitudeState, v_s=None):
    """Conserved quantities of the free-floating chain.

    Returns (h_com, p, t): total angular momentum about the system CoM in
    inertial axes, total linear momentum, and total kinetic energy.  `v_s`
    is the spacecraft CoM inertial velocity (default zero); h_com is
    independent of it.
    """
    f = chain_frames(cfg, state)
    r = offsets_in_inertial(cfg, state, f)
    v_s = np.zeros(3) if v_s is None else np.asarray(v_s, dtype=float)

    xg = np.concatenate([state.omega, [state.sigma1, state.sigma2], v_s])
    vel = partial_velocity_dyad(cfg, state, f, r) @ xg  # stacked CoM velocities
    w_s, w_b, w_p = body_rates(cfg, state, f)

    masses = (cfg.spacecraft.mass, cfg.boom.mass, cfg.payload.mass)
    # CoM positions relative to the spacecraft CoM, inertial axes.
    pos = (np.zeros(3), -r.r_sb, -r.r_sp)
    p_com = sum(m * q for m, q in zip(masses, pos)) / cfg.total_mass

    p = sum(m * vel[3 * i:3 * i + 3] for i, m in enumerate(masses))
    v_com = p / cfg.total_mass

    inertias = (cfg.spacecraft.inertia, cfg.boom.inertia, cfg.payload.inertia)
    rates = (w_s, w_b, w_p)
    to_inertial = (f.o_is, f.o_ib, f.o_ip)
    h_com = np.zeros(3)
    t = 0.0
    for i, (m, j, w, o) in enumerate(zip(masses, inertias, rates, to_inertial)):
        vi = vel[3 * i:3 * i + 3]
        h_com += o @ (j @ w) + m * np.cross(pos[i] - p_com, vi - v_com)
        t += 0.5 * (w @ (j @ w)) + 0.5 * m * (vi @ vi)
    return h_com, p, t
