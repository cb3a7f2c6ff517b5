"""User-facing self-check suite behind the `verify` CLI command.

Runs the library's invariants against a scenario file and reports named
pass/fail lines.  Checks that need a valid plant are reported as failures
(with the blocking reason) when the configuration itself is invalid, so a
broken config never yields a green run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import AttitudeState, ControlInput
from .config import build_chain, check_unknown_keys, load_raw, load_scenario, parse_inertia
from .dynamics import assemble_kane, forward_dynamics
from .errors import ConfigError, SerialSatError
from .linearize import block_reduced_solve, find_equilibrium_residual, linearize, Equilibrium
from .planar_oracle import PlanarParams, accelerations, planar_test_chain
from .simulate import SimConfig, simulate_closed_loop

CONSERVATION_DURATION = 200.0  # s; the acceptance suite runs the full 1000 s
CONSERVATION_DT = 0.01
ENERGY_DRIFT_TOL = 1e-6
MOMENTUM_DRIFT_TOL = 1e-8
A_STRUCTURE_TOL = 1e-8
ORACLE_TOL = 1e-9
BLOCK_SOLVE_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _random_states(rng, n):
    for _ in range(n):
        x = np.concatenate([
            rng.uniform(-1.2, 1.2, 1), rng.uniform(-1.3, 1.3, 1),
            rng.uniform(-1.2, 1.2, 1), rng.uniform(-2.0, 2.0, 2),
            rng.uniform(-0.3, 0.3, 5)])
        yield AttitudeState.from_vector(x), ControlInput.from_vector(
            rng.uniform(-20.0, 20.0, 5))


def run_verification(path) -> list:
    """All named checks for one scenario file."""
    results = []

    def record(name, ok, detail=""):
        results.append(CheckResult(name=name, ok=bool(ok), detail=detail))

    try:
        raw = load_raw(path)
        check_unknown_keys(raw)
        record("config parses", True)
    except ConfigError as exc:
        record("config parses", False, str(exc))
        return results

    # Per-body parameter checks straight off the raw tree, so one bad body
    # reports precisely even when chain construction is impossible.
    masses_ok = True
    inertia_sym_ok = True
    inertia_pd_ok = True
    for body in ("spacecraft", "boom", "payload"):
        try:
            mass = raw["bodies"][body]["mass"]
        except (KeyError, TypeError):
            mass = None
        if not (isinstance(mass, (int, float)) and not isinstance(mass, bool)
                and mass > 0.0 and math.isfinite(mass)):
            masses_ok = False
            record("body mass positive", False, f"bodies.{body}.mass = {mass!r}")
        try:
            j = parse_inertia(raw, f"bodies.{body}")
        except ConfigError as exc:
            inertia_sym_ok = inertia_pd_ok = False
            record("inertia symmetry", False, str(exc))
            continue
        sym_err = float(np.max(np.abs(j - j.T)))
        if sym_err > 1e-12 * max(float(np.max(np.abs(j))), 1.0):
            inertia_sym_ok = False
            record("inertia symmetry", False,
                   f"bodies.{body}: asymmetry {sym_err:.3e}")
        elif np.any(np.linalg.eigvalsh(0.5 * (j + j.T)) <= 0.0):
            inertia_pd_ok = False
            record("inertia positive definite", False, f"bodies.{body}")
    if masses_ok:
        record("body mass positive", True)
    if inertia_sym_ok:
        record("inertia symmetry", True)
    if inertia_sym_ok and inertia_pd_ok:
        record("inertia positive definite", True)

    chain = None
    blocked = ""
    try:
        chain = build_chain(raw)
    except ConfigError as exc:
        blocked = str(exc)

    # Code-level invariants: these run regardless of the user's plant.
    rng = np.random.default_rng(20240901)
    worst = 0.0
    for _ in range(200):
        m = rng.normal(size=(8, 8))
        l_mat = m @ m.T + 8.0 * np.eye(8)
        p = rng.normal(size=8)
        x1, x2 = block_reduced_solve(l_mat, p)
        dense = np.linalg.solve(l_mat, p)
        denom = max(float(np.max(np.abs(dense))), 1e-300)
        worst = max(worst, float(np.max(np.abs(np.concatenate([x1, x2]) - dense))) / denom)
    record("block solve equals dense solve", worst < BLOCK_SOLVE_TOL,
           f"worst relative difference {worst:.3e}")

    planar = planar_test_chain()
    par = PlanarParams.from_chain(planar)
    worst = 0.0
    for _ in range(50):
        th, gam, lam = rng.uniform(-1.2, 1.2, 3)
        w2, s1, s2 = rng.uniform(-0.3, 0.3, 3)
        tau = rng.uniform(-50.0, 50.0, 3)
        st = AttitudeState.from_vector([0.0, th, 0.0, gam, lam, 0.0, w2, 0.0, s1, s2])
        xg = forward_dynamics(planar, st, ControlInput.from_vector(
            [0.0, tau[0], 0.0, tau[1], tau[2]]))
        qdd = accelerations(par, [0, 0, th, gam, lam], [0, 0, w2, s1, s2], tau)
        ref = np.array([0.0, qdd[2], 0.0, qdd[3], qdd[4], qdd[0], 0.0, qdd[1]])
        worst = max(worst, float(np.max(np.abs(xg - ref))))
    record("planar Lagrangian oracle agreement", worst < ORACLE_TOL,
           f"worst absolute difference {worst:.3e}")

    # Plant-specific checks.
    if chain is None:
        for name in ("L symmetry", "L positive definite", "equilibrium residual",
                     "free-float conservation", "A-matrix structure",
                     "B-matrix structure"):
            record(name, False, f"not evaluated: {blocked}")
        return results

    sym_worst, pd_ok = 0.0, True
    for st, u in _random_states(rng, 100):
        sys = assemble_kane(chain, st, u)
        l_mat = sys.mass_matrix
        sym_worst = max(sym_worst, float(
            np.max(np.abs(l_mat - l_mat.T)) / np.max(np.abs(l_mat))))
        if np.any(np.linalg.eigvalsh(0.5 * (l_mat + l_mat.T)) <= 0.0):
            pd_ok = False
    record("L symmetry", sym_worst < 1e-10, f"worst relative asymmetry {sym_worst:.3e}")
    record("L positive definite", pd_ok)

    try:
        scenario = load_scenario(path)
        res = find_equilibrium_residual(chain, scenario.equilibrium)
        record("equilibrium residual", res < 1e-10, f"residual {res:.3e}")
        eq_state = scenario.equilibrium
    except (ConfigError, SerialSatError, ValueError) as exc:
        record("equilibrium residual", False, str(exc))
        eq_state = None

    try:
        x0 = AttitudeState.from_vector(
            [0.1, -0.2, 0.3, 0.25, -0.15, 0.02, -0.015, 0.01, 0.005, -0.004])
        traj = simulate_closed_loop(chain, SimConfig(
            duration=CONSERVATION_DURATION, dt=CONSERVATION_DT, x0=x0,
            x_target=AttitudeState.zero_rates()))
        h0 = traj.angular_momentum[0]
        p0 = traj.linear_momentum[0]
        t0 = traj.kinetic_energy[0]
        dh = float(np.max(np.linalg.norm(traj.angular_momentum - h0, axis=1))
                   / max(np.linalg.norm(h0), 1e-300))
        dp = float(np.max(np.linalg.norm(traj.linear_momentum - p0, axis=1))
                   / max(np.linalg.norm(p0), 1e-300))
        dt_ = float(np.max(np.abs(traj.kinetic_energy - t0)) / max(abs(t0), 1e-300))
        ok = dh < MOMENTUM_DRIFT_TOL and dp < MOMENTUM_DRIFT_TOL and dt_ < ENERGY_DRIFT_TOL
        record("free-float conservation", ok,
               f"drift H {dh:.2e}  P {dp:.2e}  T {dt_:.2e} over {CONSERVATION_DURATION:.0f} s")
    except SerialSatError as exc:
        record("free-float conservation", False, str(exc))

    if eq_state is None:
        record("A-matrix structure", False, "not evaluated: no valid equilibrium")
        record("B-matrix structure", False, "not evaluated: no valid equilibrium")
        return results

    try:
        model = linearize(chain, Equilibrium.at(chain, eq_state))
        expected = np.zeros((10, 10))
        expected[0, 5] = 1.0
        expected[1, 7] = -1.0
        expected[2, 6] = 1.0
        expected[3, 8] = 1.0
        expected[4, 9] = 1.0
        err_a = float(np.max(np.abs(model.a - expected)))
        record("A-matrix structure", err_a < A_STRUCTURE_TOL,
               f"worst entry error {err_a:.3e}")
        b_top = float(np.max(np.abs(model.b[:5])))
        b2 = model.b[5:]
        sym = float(np.max(np.abs(b2 - b2.T)) / np.max(np.abs(b2)))
        pd = bool(np.all(np.linalg.eigvalsh(0.5 * (b2 + b2.T)) > 0.0))
        lmat = assemble_kane(chain, eq_state, ControlInput.zero()).mass_matrix
        linv_block = np.linalg.inv(lmat)[:5, :5]
        eq_linv = float(np.max(np.abs(b2 - linv_block)) / np.max(np.abs(b2)))
        ok = b_top < 1e-10 and sym < 1e-8 and pd and eq_linv < 1e-8
        record("B-matrix structure", ok,
               f"rows 1-5 {b_top:.1e}, asym {sym:.1e}, PD {pd}, vs L^-1 {eq_linv:.1e}")
    except SerialSatError as exc:
        record("A-matrix structure", False, str(exc))
        record("B-matrix structure", False, str(exc))
    return results
