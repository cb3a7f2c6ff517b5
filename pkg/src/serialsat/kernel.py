"""Compiled inner loops for time integration.

The closed-form assembly below mirrors dynamics.py exactly (same formulas,
same ordering); tests pin the two paths together to machine precision.
State vectors here carry 13 components: the ten control states plus the
spacecraft CoM velocity, which rides along so that open-loop runs can
report total linear momentum.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_DIVERGED = 1
STATUS_GIMBAL_LOCK = 2

DIVERGENCE_LIMIT = 1.0e6
PITCH_GUARD = 1e-6


@njit(cache=True)
def _axis_rotation(n, angle):
    c = math.cos(angle)
    s = math.sin(angle)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = (1.0 - c) * n[i] * n[j]
        out[i, i] += c
    out[0, 1] += s * n[2]
    out[0, 2] -= s * n[1]
    out[1, 0] -= s * n[2]
    out[1, 2] += s * n[0]
    out[2, 0] += s * n[1]
    out[2, 1] -= s * n[0]
    return out


@njit(cache=True)
def _rot321(roll, pitch, yaw):
    cph, sph = math.cos(roll), math.sin(roll)
    cth, sth = math.cos(pitch), math.sin(pitch)
    cps, sps = math.cos(yaw), math.sin(yaw)
    out = np.empty((3, 3))
    out[0, 0] = cth * cps
    out[0, 1] = cth * sps
    out[0, 2] = -sth
    out[1, 0] = sph * sth * cps - cph * sps
    out[1, 1] = sph * sth * sps + cph * cps
    out[1, 2] = sph * cth
    out[2, 0] = cph * sth * cps + sph * sps
    out[2, 1] = cph * sth * sps - sph * cps
    out[2, 2] = cph * cth
    return out


@njit(cache=True)
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def _skew(a):
    out = np.zeros((3, 3))
    out[0, 1] = -a[2]
    out[0, 2] = a[1]
    out[1, 0] = a[2]
    out[1, 2] = -a[0]
    out[2, 0] = -a[1]
    out[2, 1] = a[0]
    return out


@njit(cache=True)
def _xdot13(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2, x, u):
    """State derivative of [x10; v_s]; mirrors dynamics.state_derivative."""
    roll, pitch, yaw = x[0], x[1], x[2]
    gam, lam = x[3], x[4]
    w_s = x[5:8]
    s1, s2 = x[8], x[9]

    o_si = _rot321(roll, pitch, yaw)
    o_bs = _axis_rotation(g1, gam)
    o_pb = _axis_rotation(g2, lam)
    o_ps = o_pb @ o_bs
    o_is = o_si.T
    o_ib = (o_bs @ o_si).T
    o_ip = (o_ps @ o_si).T

    r_g1s = o_is @ r1s_b
    r_g1b = o_ib @ r1b_b
    r_g2b = o_ib @ r2b_b
    r_g2p = o_ip @ r2p_b

    # partial angular-rate dyad
    omega = np.zeros((9, 8))
    for i in range(3):
        omega[i, i] = 1.0
        for j in range(3):
            omega[3 + i, j] = o_bs[i, j]
            omega[6 + i, j] = o_ps[i, j]
    opb_g1 = o_pb @ g1
    for i in range(3):
        omega[3 + i, 3] = g1[i]
        omega[6 + i, 3] = opb_g1[i]
        omega[6 + i, 4] = g2[i]

    # partial velocity dyad
    s_g1s = _skew(r_g1s)
    s_g1b = _skew(r_g1b)
    s_g2b = _skew(r_g2b)
    s_g2p = _skew(r_g2p)
    ib_g1 = o_ib @ g1
    ip_g2 = o_ip @ g2
    v21 = (s_g1b - s_g1s) @ o_is
    v22 = s_g1b @ ib_g1
    v31 = (s_g1b - s_g1s + s_g2p - s_g2b) @ o_is
    v32 = (s_g1b + s_g2p - s_g2b) @ ib_g1
    v33 = s_g2p @ ip_g2
    v = np.zeros((9, 8))
    for i in range(3):
        v[i, 5 + i] = 1.0
        v[3 + i, 5 + i] = 1.0
        v[6 + i, 5 + i] = 1.0
        v[3 + i, 3] = v22[i]
        v[6 + i, 3] = v32[i]
        v[6 + i, 4] = v33[i]
        for j in range(3):
            v[3 + i, j] = v21[i, j]
            v[6 + i, j] = v31[i, j]

    # body rates (full recursion) and remainder accelerations
    w_b = o_bs @ w_s + g1 * s1
    w_p = o_pb @ w_b + g2 * s2
    alpha_b_r = _cross(w_b, g1 * s1)
    alpha_p_r = _cross(w_p, g2 * s2) + o_pb @ alpha_b_r
    wi_s = o_is @ w_s
    wi_b = o_ib @ w_b
    wi_p = o_ip @ w_p
    a_b_r = (_cross(wi_s, _cross(wi_s, r_g1s))
             - _cross(wi_b, _cross(wi_b, r_g1b))
             + _cross(r_g1b, o_ib @ alpha_b_r))
    a_p_r = (a_b_r
             - _cross(r_g2b, o_ib @ alpha_b_r)
             + _cross(r_g2p, o_ip @ alpha_p_r)
             + _cross(wi_b, _cross(wi_b, r_g2b))
             - _cross(wi_p, _cross(wi_p, r_g2p)))

    # L = Omega' J Omega + V' M V with block-diagonal J and diagonal M
    jom = np.empty((9, 8))
    jom[0:3] = js @ omega[0:3]
    jom[3:6] = jb @ omega[3:6]
    jom[6:9] = jp @ omega[6:9]
    mv = np.empty((9, 8))
    for blk in range(3):
        for i in range(3):
            for j in range(8):
                mv[3 * blk + i, j] = masses[blk] * v[3 * blk + i, j]
    l_mat = omega.T @ jom + v.T @ mv

    # generalized torques, gyroscopic terms, remainder projections
    tau_b = g1 * u[3]
    tau_p = g2 * u[4]
    wxh_s = _cross(w_s, js @ w_s)
    wxh_b = _cross(w_b, jb @ w_b)
    wxh_p = _cross(w_p, jp @ w_p)
    e_s = u[0:3] - tau_b - wxh_s
    e_b = tau_b - tau_p - jb @ alpha_b_r - wxh_b
    e_p = tau_p - jp @ alpha_p_r - wxh_p
    rhs = np.zeros(8)
    for j in range(8):
        acc = 0.0
        for i in range(3):
            acc += omega[i, j] * e_s[i]
            acc += omega[3 + i, j] * e_b[i]
            acc += omega[6 + i, j] * e_p[i]
            acc -= v[3 + i, j] * masses[1] * a_b_r[i]
            acc -= v[6 + i, j] * masses[2] * a_p_r[i]
        rhs[j] = acc

    xg = np.linalg.solve(l_mat, rhs)

    out = np.empty(13)
    sph, cph = math.sin(roll), math.cos(roll)
    tth = math.tan(pitch)
    sec = 1.0 / math.cos(pitch)
    out[0] = w_s[0] + w_s[1] * sph * tth + w_s[2] * cph * tth
    out[1] = w_s[1] * cph - w_s[2] * sph
    out[2] = w_s[1] * sph * sec + w_s[2] * cph * sec
    out[3] = s1
    out[4] = s2
    for i in range(5):
        out[5 + i] = xg[i]
    for i in range(3):
        out[10 + i] = xg[5 + i]
    return out


@njit(cache=True)
def _conserved(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2, x):
    """[H_com (3), P (3), T] at the 13-component state."""
    roll, pitch, yaw = x[0], x[1], x[2]
    gam, lam = x[3], x[4]
    w_s = x[5:8]
    s1, s2 = x[8], x[9]
    v_s = x[10:13]

    o_si = _rot321(roll, pitch, yaw)
    o_bs = _axis_rotation(g1, gam)
    o_pb = _axis_rotation(g2, lam)
    o_ps = o_pb @ o_bs
    o_is = o_si.T
    o_ib = (o_bs @ o_si).T
    o_ip = (o_ps @ o_si).T

    r_g1s = o_is @ r1s_b
    r_g1b = o_ib @ r1b_b
    r_g2b = o_ib @ r2b_b
    r_g2p = o_ip @ r2p_b
    r_sb = r_g1b - r_g1s
    r_sp = (r_g2p - r_g2b + r_g1b) - r_g1s

    w_b = o_bs @ w_s + g1 * s1
    w_p = o_pb @ w_b + g2 * s2
    wi_s = o_is @ w_s
    wi_b = o_ib @ w_b
    wi_p = o_ip @ w_p

    # two-point formulas: v_b = v_G1 - w_b x r_G1/b with v_G1 = v_s + w_s x r_G1/s
    v_b = v_s + _cross(wi_s, r_g1s) - _cross(wi_b, r_g1b)
    v_p = v_b + _cross(wi_b, r_g2b) - _cross(wi_p, r_g2p)

    m_s, m_b, m_p = masses[0], masses[1], masses[2]
    m_tot = m_s + m_b + m_p
    p_lin = m_s * v_s + m_b * v_b + m_p * v_p
    v_com = p_lin / m_tot
    pos_b = -r_sb
    pos_p = -r_sp
    p_com = (m_b * pos_b + m_p * pos_p) / m_tot

    h = (o_is @ (js @ w_s) + o_ib @ (jb @ w_b) + o_ip @ (jp @ w_p)
         + m_s * _cross(-p_com, v_s - v_com)
         + m_b * _cross(pos_b - p_com, v_b - v_com)
         + m_p * _cross(pos_p - p_com, v_p - v_com))
    t = 0.5 * (w_s @ (js @ w_s) + w_b @ (jb @ w_b) + w_p @ (jp @ w_p)
               + m_s * (v_s @ v_s) + m_b * (v_b @ v_b) + m_p * (v_p @ v_p))

    out = np.empty(7)
    out[0:3] = h
    out[3:6] = p_lin
    out[6] = t
    return out


@njit(cache=True)
def run_fixed_step(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2,
                   x0, gain, use_gain, x_target, dt, nsteps, track_conserved):
    """RK4 loop with zero-order-hold feedback u = -K (x - x_target).

    Returns (states, controls, conserved, status, stop_step).  On early
    stop (divergence or gimbal lock) rows [0, stop_step) are valid.
    """
    states = np.zeros((nsteps + 1, 13))
    controls = np.zeros((nsteps + 1, 5))
    ncons = 7 if track_conserved else 0
    conserved = np.zeros((nsteps + 1, ncons))
    x = x0.copy()
    u = np.zeros(5)
    status = STATUS_OK
    stop = nsteps

    for k in range(nsteps + 1):
        m = 0.0
        for i in range(10):
            m = max(m, abs(x[i]))
        if not (m < DIVERGENCE_LIMIT):
            status = STATUS_DIVERGED
            stop = k
            break
        if abs(x[1]) >= 0.5 * math.pi - PITCH_GUARD:
            status = STATUS_GIMBAL_LOCK
            stop = k
            break
        states[k] = x
        if use_gain:
            for i in range(5):
                acc = 0.0
                for j in range(10):
                    acc += gain[i, j] * (x[j] - x_target[j])
                u[i] = -acc
            controls[k] = u
        if track_conserved:
            conserved[k] = _conserved(masses, js, jb, jp, r1s_b, r1b_b,
                                      r2b_b, r2p_b, g1, g2, x)
        if k == nsteps:
            break
        k1 = _xdot13(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2, x, u)
        k2 = _xdot13(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2,
                     x + 0.5 * dt * k1, u)
        k3 = _xdot13(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2,
                     x + 0.5 * dt * k2, u)
        k4 = _xdot13(masses, js, jb, jp, r1s_b, r1b_b, r2b_b, r2p_b, g1, g2,
                     x + dt * k3, u)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return states, controls, conserved, status, stop


def pack_chain(cfg):
    """Flatten a ChainConfig into the kernel argument tuple."""
    masses = np.array([cfg.spacecraft.mass, cfg.boom.mass, cfg.payload.mass])
    return (masses,
            np.ascontiguousarray(cfg.spacecraft.inertia),
            np.ascontiguousarray(cfg.boom.inertia),
            np.ascontiguousarray(cfg.payload.inertia),
            np.ascontiguousarray(cfg.spacecraft.offsets["g1"]),
            np.ascontiguousarray(cfg.boom.offsets["g1"]),
            np.ascontiguousarray(cfg.boom.offsets["g2"]),
            np.ascontiguousarray(cfg.payload.offsets["g2"]),
            np.ascontiguousarray(cfg.joints.gamma1),
            np.ascontiguousarray(cfg.joints.gamma2))
