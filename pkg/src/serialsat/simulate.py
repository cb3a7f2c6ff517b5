"""Closed- and open-loop integration of the nonlinear plant plus metrics.

Fixed-step RK4 with zero-order-hold state feedback.  Identical inputs
produce bit-identical trajectories; there is no randomness anywhere in
this module (the perturbation sweep uses a Halton sequence).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import kernel
from .bodies import AttitudeState, ChainConfig, ControlInput, JointAxes, RigidBodyParams
from .dynamics import state_derivative
from .errors import DivergedError, GimbalLockError

CSV_HEADER = ("t,phi,theta,psi,gamma,lambda,w1,w2,w3,sigma1,sigma2,"
              "u1,u2,u3,u4,u5")
SETTLING_BAND = 0.02
MAX_STEPS = 10 ** 8


@dataclass(frozen=True)
class SimConfig:
    """One integration run: duration, step, initial state, optional gain."""

    duration: float
    x0: AttitudeState
    x_target: AttitudeState
    dt: float = 0.01
    gain: np.ndarray | None = None  # 5x10 feedback; None = open loop

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")
        if self.duration / self.dt > MAX_STEPS:
            raise ValueError(f"duration/dt exceeds the {MAX_STEPS:.0e} step guard")
        if self.gain is not None:
            g = np.asarray(self.gain, dtype=float).reshape(5, 10).copy()
            g.flags.writeable = False
            object.__setattr__(self, "gain", g)

    @property
    def nsteps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid state/control history plus open-loop conserved records."""

    t: np.ndarray  # (n+1,)
    states: np.ndarray  # (n+1, 10)
    controls: np.ndarray  # (n+1, 5)
    target: np.ndarray  # (10,)
    angular_momentum: np.ndarray | None = None  # (n+1, 3), open loop only
    linear_momentum: np.ndarray | None = None  # (n+1, 3)
    kinetic_energy: np.ndarray | None = None  # (n+1,)

    def __post_init__(self):
        n = self.t.shape[0]
        if self.states.shape != (n, 10) or self.controls.shape != (n, 5):
            raise ValueError("inconsistent trajectory array lengths")
        dt = np.diff(self.t)
        if n > 1 and np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1e-300):
            raise ValueError("time grid must be uniform")


@dataclass(frozen=True)
class PerfReport:
    """Scalar performance summary of one closed-loop run."""

    energy: float  # integral of |u| dt
    settling_times: np.ndarray  # (10,), nan when never settled
    peak_frequency: np.ndarray  # (10,) Hz, dominant detrended tone
    peak_amplitude: np.ndarray  # (10,)
    peak_control: float


def rk4_step(cfg: ChainConfig, x, u, dt: float) -> np.ndarray:
    """One classical RK4 step of the ten-state model, u held constant."""
    x = np.asarray(x, dtype=float).reshape(10)
    uu = ControlInput.from_vector(u)

    def f(xv):
        return state_derivative(cfg, AttitudeState.from_vector(xv), uu)

    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate_closed_loop(cfg: ChainConfig, sim: SimConfig) -> Trajectory:
    """Integrate the nonlinear plant under u = -K (x - x_target).

    With no gain the run is open loop (u = 0) and the per-step conserved
    quantities (angular momentum about the system CoM, linear momentum,
    kinetic energy) are recorded; the spacecraft CoM velocity is carried
    internally so linear momentum is meaningful.
    """
    args = kernel.pack_chain(cfg)
    x0 = np.concatenate([sim.x0.as_vector(), np.zeros(3)])
    use_gain = sim.gain is not None
    gain = sim.gain if use_gain else np.zeros((5, 10))
    track = not use_gain
    n = sim.nsteps
    states, controls, conserved, status, stop = kernel.run_fixed_step(
        *args, x0, np.ascontiguousarray(gain), use_gain,
        sim.x_target.as_vector(), sim.dt, n, track)
    if status == kernel.STATUS_DIVERGED:
        raise DivergedError(stop)
    if status == kernel.STATUS_GIMBAL_LOCK:
        raise GimbalLockError(f"pitch hit the gimbal-lock guard at step {stop}")
    t = np.arange(n + 1) * sim.dt
    return Trajectory(
        t=t, states=states[:, :10].copy(), controls=controls,
        target=sim.x_target.as_vector(),
        angular_momentum=conserved[:, 0:3].copy() if track else None,
        linear_momentum=conserved[:, 3:6].copy() if track else None,
        kinetic_energy=conserved[:, 6].copy() if track else None)


def energy_metric(traj: Trajectory) -> float:
    """Trapezoidal integral of the Euclidean control norm over the run."""
    norms = np.linalg.norm(traj.controls, axis=1)
    return float(np.trapezoid(norms, traj.t))


def settling_time(t, error, band: float = SETTLING_BAND):
    """First time after which |error| stays within band * |error[0]|.

    Returns nan when the signal never settles and 0.0 when the initial
    error is already negligible.
    """
    e0 = abs(error[0])
    if e0 < 1e-300:
        return 0.0
    thresh = band * e0
    inside = np.abs(error) <= thresh
    if not inside[-1]:
        return math.nan
    # last index where the signal is outside the band
    outside = np.nonzero(~inside)[0]
    if outside.size == 0:
        return float(t[0])
    idx = outside[-1] + 1
    return float(t[idx]) if idx < t.shape[0] else math.nan


def _dominant_tone(t, y):
    """(frequency, amplitude) of the largest non-DC peak of the detrended,
    Hann-windowed signal, with parabolic interpolation around the peak bin
    to undo scalloping of off-bin tones."""
    n = y.shape[0]
    if n < 8:
        return 0.0, 0.0
    dt = t[1] - t[0]
    # linear detrend
    a = np.polyfit(t, y, 1)
    resid = y - (a[0] * t + a[1])
    w = np.hanning(n)
    spec = np.fft.rfft(resid * w)
    amps = 2.0 * np.abs(spec) / np.sum(w)
    freqs = np.fft.rfftfreq(n, dt)
    if amps.shape[0] <= 1:
        return 0.0, 0.0
    k = 1 + int(np.argmax(amps[1:]))
    freq, amp = float(freqs[k]), float(amps[k])
    if 1 < k < amps.shape[0] - 1 and amps[k - 1] > 0.0 and amps[k + 1] > 0.0:
        la, lb, lc = np.log(amps[k - 1]), np.log(amps[k]), np.log(amps[k + 1])
        denom = la - 2.0 * lb + lc
        if denom < 0.0:
            delta = 0.5 * (la - lc) / denom
            if abs(delta) <= 0.5:
                freq = float((k + delta) * (freqs[1] - freqs[0]))
                amp = float(np.exp(lb - 0.25 * (la - lc) * delta))
    return freq, amp


def oscillation_report(traj: Trajectory) -> PerfReport:
    """Per-state settling time and dominant post-settling oscillation.

    The tone detector runs on the detrended, Hann-windowed error signal over
    the post-settling window (the whole run when a state never settles);
    the first quarter of that window is skipped so the band-entry corner
    does not leak into the spectrum.  Needs at least 64 samples.
    """
    n = traj.t.shape[0]
    if n < 64:
        raise ValueError(f"need at least 64 samples, got {n}")
    errors = traj.states - traj.target[None, :]
    st = np.empty(10)
    pf = np.empty(10)
    pa = np.empty(10)
    for i in range(10):
        e = errors[:, i]
        st[i] = settling_time(traj.t, e)
        if math.isnan(st[i]):
            start = 0
        else:
            settled = int(np.searchsorted(traj.t, st[i]))
            start = settled + (n - settled) // 4
        if n - start < 64:
            start = max(0, n - 64)
        pf[i], pa[i] = _dominant_tone(traj.t[start:], e[start:])
    return PerfReport(energy=energy_metric(traj), settling_times=st,
                      peak_frequency=pf, peak_amplitude=pa,
                      peak_control=float(np.max(np.abs(traj.controls))))


@dataclass(frozen=True)
class PerturbationSpec:
    """Deterministic parameter-scaling robustness harness.

    Masses, inertias, and joint offsets are scaled per body by Halton
    samples in [1-bounds, 1+bounds]; this stands in for unmodeled plant
    error (the flexible structure is out of reach of a rigid model).
    """

    bounds: float = 0.2
    samples: int = 32
    duration: float = 4000.0
    dt: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.bounds < 1.0:
            raise ValueError("bounds must be in [0, 1)")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass(frozen=True)
class SweepCase:
    scales: np.ndarray
    stabilized: bool
    diverged: bool
    energy: float
    worst_settling: float


@dataclass(frozen=True)
class SweepResult:
    method: str
    fraction_stabilized: float
    worst_energy: float
    worst_settling: float
    cases: tuple


def _scaled_chain(cfg: ChainConfig, s) -> ChainConfig:
    """Scale masses (3), inertias (3), and offset lengths (4) by s (10,)."""
    def body(b, m_scale, j_scale, off_scales):
        return RigidBodyParams(
            mass=b.mass * m_scale, inertia=b.inertia * j_scale,
            offsets={k: np.asarray(v) * off_scales[k] for k, v in b.offsets.items()})

    return ChainConfig(
        spacecraft=body(cfg.spacecraft, s[0], s[3], {"g1": s[6]}),
        boom=body(cfg.boom, s[1], s[4], {"g1": s[7], "g2": s[8]}),
        payload=body(cfg.payload, s[2], s[5], {"g2": s[9]}),
        joints=JointAxes(cfg.joints.gamma1.copy(), cfg.joints.gamma2.copy()),
    )


def perturbation_sweep(cfg: ChainConfig, gains, x0: AttitudeState,
                       x_target: AttitudeState,
                       spec: PerturbationSpec = PerturbationSpec()):
    """Re-simulate each gain on parameter-scaled plants.

    `gains` maps method name to a 5x10 feedback matrix.  A case counts as
    stabilized when the run completes and the final state error is inside
    the settling band of the initial error.  Returns {method: SweepResult}.
    """
    halton = qmc.Halton(d=10, scramble=False)
    halton.fast_forward(1)  # skip the all-zero first point
    samples = 1.0 - spec.bounds + 2.0 * spec.bounds * halton.random(spec.samples)
    plants = [_scaled_chain(cfg, s) for s in samples]

    e0 = np.linalg.norm(x0.as_vector() - x_target.as_vector())
    results = {}
    for method, k in gains.items():
        cases = []
        for s, plant in zip(samples, plants):
            sim = SimConfig(duration=spec.duration, dt=spec.dt, x0=x0,
                            x_target=x_target, gain=k)
            try:
                traj = simulate_closed_loop(plant, sim)
            except (DivergedError, GimbalLockError):
                cases.append(SweepCase(scales=s, stabilized=False, diverged=True,
                                       energy=math.nan, worst_settling=math.nan))
                continue
            efin = np.linalg.norm(traj.states[-1] - traj.target)
            ok = bool(efin <= SETTLING_BAND * e0) if e0 > 0 else True
            errors = traj.states - traj.target[None, :]
            sts = [settling_time(traj.t, errors[:, i]) for i in range(10)]
            worst = max((s_ for s_ in sts if not math.isnan(s_)), default=math.nan)
            if any(math.isnan(s_) for s_ in sts):
                worst = math.nan
            cases.append(SweepCase(scales=s, stabilized=ok, diverged=False,
                                   energy=energy_metric(traj), worst_settling=worst))
        frac = sum(c.stabilized for c in cases) / len(cases)
        energies = [c.energy for c in cases if not math.isnan(c.energy)]
        settlings = [c.worst_settling for c in cases]
        worst_settling = math.nan if any(math.isnan(s_) for s_ in settlings) \
            else (max(settlings) if settlings else math.nan)
        results[method] = SweepResult(
            method=method, fraction_stabilized=frac,
            worst_energy=max(energies) if energies else math.nan,
            worst_settling=worst_settling, cases=tuple(cases))
    return results


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write the spec'd CSV: header plus one full-precision row per step."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for k in range(traj.t.shape[0]):
            row = [traj.t[k], *traj.states[k], *traj.controls[k]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory_csv(path, target=None) -> Trajectory:
    """Read a trajectory CSV written by write_trajectory_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        data = np.array([[float(v) for v in row] for row in reader])
    return Trajectory(
        t=data[:, 0], states=data[:, 1:11], controls=data[:, 11:16],
        target=np.zeros(10) if target is None else np.asarray(target, float))
