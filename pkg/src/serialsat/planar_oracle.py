"""Independent planar check model: free-floating base with two revolute links.

When every joint axis is +y, all joint offsets lie in the x-z plane, and
the xy/yz inertia products vanish, the chain's motion started in the x-z
plane stays planar.  This module derives that planar case from scratch via
Lagrange's equations in absolute-angle coordinates

    q = [x, z, th_s, gam, lam],

sharing nothing with the Kane assembly, and serves as the oracle the full
model is checked against.

Planar rotation convention: a body-frame vector (px, pz) resolves in the
inertial x-z plane as P(th) @ (px, pz) with P = [[cos, sin], [-sin, cos]]
and th the accumulated pitch of that body (matching a passive y-rotation
of the 3-D frames).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import ChainConfig


def _p(th):
    c, s = np.cos(th), np.sin(th)
    return np.array([[c, s], [-s, c]])


def _dp(th):
    # d/dth of _p
    c, s = np.cos(th), np.sin(th)
    return np.array([[-s, c], [-c, -s]])


@dataclass(frozen=True)
class PlanarParams:
    """Planar projection of a ChainConfig (x-z components, y inertias)."""

    m: np.ndarray  # (3,) masses
    iy: np.ndarray  # (3,) y-axis inertias
    a: np.ndarray  # (2,) spacecraft CoM -> G1, body frame
    b: np.ndarray  # (2,) boom CoM -> G1
    c: np.ndarray  # (2,) boom CoM -> G2
    d: np.ndarray  # (2,) payload CoM -> G2

    @classmethod
    def from_chain(cls, cfg: ChainConfig, tol: float = 1e-12) -> "PlanarParams":
        def planar(v, name):
            if abs(v[1]) > tol:
                raise ValueError(f"{name} has a y component; chain is not planar")
            return np.array([v[0], v[2]])

        for name, j in (("spacecraft", cfg.spacecraft.inertia),
                        ("boom", cfg.boom.inertia),
                        ("payload", cfg.payload.inertia)):
            if abs(j[0, 1]) > tol or abs(j[1, 2]) > tol:
                raise ValueError(f"{name} inertia couples y with the x-z plane")
        for name, g in (("gamma1", cfg.joints.gamma1), ("gamma2", cfg.joints.gamma2)):
            if abs(g[0]) > tol or abs(g[1] - 1.0) > tol or abs(g[2]) > tol:
                raise ValueError(f"{name} must be +y for the planar model")
        return cls(
            m=np.array([cfg.spacecraft.mass, cfg.boom.mass, cfg.payload.mass]),
            iy=np.array([cfg.spacecraft.inertia[1, 1], cfg.boom.inertia[1, 1],
                         cfg.payload.inertia[1, 1]]),
            a=planar(cfg.spacecraft.offsets["g1"], "spacecraft g1 offset"),
            b=planar(cfg.boom.offsets["g1"], "boom g1 offset"),
            c=planar(cfg.boom.offsets["g2"], "boom g2 offset"),
            d=planar(cfg.payload.offsets["g2"], "payload g2 offset"),
        )


def _jacobians(par: PlanarParams, q):
    """Translational Jacobians (2x5 each) of the three CoMs and their
    partial derivatives with respect to (th_s, gam, lam).

    Positions (inertial plane):
        p_s = (x, z)
        p_b = p_s + P(th_s) a - P(th_b) b
        p_p = p_s + P(th_s) a + P(th_b) (c - b) - P(th_p) d
    """
    th_s = q[2]
    th_b = th_s + q[3]
    th_p = th_b + q[4]
    pa, pb_, pp_ = _p(th_s) @ par.a, None, None  # noqa: F841 (kept for clarity)
    dpa = _dp(th_s) @ par.a
    dpb = _dp(th_b) @ par.b
    dpcb = _dp(th_b) @ (par.c - par.b)
    dpd = _dp(th_p) @ par.d
    # second derivatives: d/dth of _dp(th) rho = -_p(th) rho
    ppa = -(_p(th_s) @ par.a)
    ppb = -(_p(th_b) @ par.b)
    ppcb = -(_p(th_b) @ (par.c - par.b))
    ppd = -(_p(th_p) @ par.d)

    i2 = np.eye(2)
    j_s = np.hstack([i2, np.zeros((2, 3))])
    j_b = np.hstack([i2, (dpa - dpb)[:, None], (-dpb)[:, None], np.zeros((2, 1))])
    j_p = np.hstack([i2, (dpa + dpcb - dpd)[:, None],
                     (dpcb - dpd)[:, None], (-dpd)[:, None]])

    zero = np.zeros((2, 5))

    def cols(u, v, w):
        out = np.zeros((2, 5))
        out[:, 2], out[:, 3], out[:, 4] = u, v, w
        return out

    z2 = np.zeros(2)
    dj_b = {
        2: cols(ppa - ppb, -ppb, z2),
        3: cols(-ppb, -ppb, z2),
        4: zero,
    }
    dj_p = {
        2: cols(ppa + ppcb - ppd, ppcb - ppd, -ppd),
        3: cols(ppcb - ppd, ppcb - ppd, -ppd),
        4: cols(-ppd, -ppd, -ppd),
    }
    dj_s = {2: zero, 3: zero, 4: zero}
    return (j_s, j_b, j_p), (dj_s, dj_b, dj_p)


def mass_matrix(par: PlanarParams, q) -> np.ndarray:
    """5x5 configuration-dependent generalized mass matrix."""
    (j_s, j_b, j_p), _ = _jacobians(par, q)
    rot = np.array([[0, 0, 1.0, 0, 0], [0, 0, 1.0, 1.0, 0], [0, 0, 1.0, 1.0, 1.0]])
    m = np.zeros((5, 5))
    for mk, jk in zip(par.m, (j_s, j_b, j_p)):
        m += mk * jk.T @ jk
    for ik, rk in zip(par.iy, rot):
        m += ik * np.outer(rk, rk)
    return m


def _mass_gradient(par: PlanarParams, q):
    """dM/dq_j for j in {2, 3, 4} (the angle coordinates)."""
    (j_s, j_b, j_p), (dj_s, dj_b, dj_p) = _jacobians(par, q)
    grads = {}
    for j in (2, 3, 4):
        g = np.zeros((5, 5))
        for mk, jk, djk in zip(par.m, (j_s, j_b, j_p), (dj_s, dj_b, dj_p)):
            g += mk * (djk[j].T @ jk + jk.T @ djk[j])
        grads[j] = g
    return grads


def accelerations(par: PlanarParams, q, qdot, tau) -> np.ndarray:
    """Generalized accelerations from Lagrange's equations.

        M(q) qddot + Mdot qdot - 0.5 * grad_q(qdot' M qdot) = Q

    `tau` = (tau_y, u_g1, u_g2): spacecraft body torque about y and the two
    joint torques, acting on th_s, gam, lam respectively.
    """
    q = np.asarray(q, dtype=float).reshape(5)
    qdot = np.asarray(qdot, dtype=float).reshape(5)
    m = mass_matrix(par, q)
    grads = _mass_gradient(par, q)
    mdot = sum(grads[j] * qdot[j] for j in (2, 3, 4))
    quad = np.zeros(5)
    for j in (2, 3, 4):
        quad[j] = 0.5 * qdot @ (grads[j] @ qdot)
    rhs = np.array([0.0, 0.0, tau[0], tau[1], tau[2]]) - mdot @ qdot + quad
    return np.linalg.solve(m, rhs)


def kinetic_energy(par: PlanarParams, q, qdot) -> float:
    return 0.5 * float(qdot @ (mass_matrix(par, q) @ qdot))


def planar_test_chain() -> ChainConfig:
    """Planar-compatible variant of the strawman chain (documented in the
    oracle tests): y offsets zeroed, xy/yz inertia products zeroed."""
    from .bodies import RigidBodyParams

    spacecraft = RigidBodyParams(
        mass=3500.0,
        inertia=np.array([[11000.0, 0.0, -150.0],
                          [0.0, 9000.0, 0.0],
                          [-150.0, 0.0, 12500.0]]),
        offsets={"g1": [0.8, 0.0, -0.3]},
    )
    boom = RigidBodyParams(
        mass=450.0,
        inertia=np.array([[4800.0, 0.0, -5.0],
                          [0.0, 4850.0, 0.0],
                          [-5.0, 0.0, 40.0]]),
        offsets={"g1": [0.1, 0.0, -5.5], "g2": [-0.05, 0.0, 5.8]},
    )
    payload = RigidBodyParams(
        mass=6000.0,
        inertia=np.array([[45000.0, 0.0, 300.0],
                          [0.0, 38000.0, 0.0],
                          [300.0, 0.0, 30000.0]]),
        offsets={"g2": [0.4, 0.0, 0.6]},
    )
    return ChainConfig(spacecraft=spacecraft, boom=boom, payload=payload)
