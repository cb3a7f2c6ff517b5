"""Design pipeline and machine-readable YAML reports.

Reports carry no timestamps: rerunning on an unchanged scenario file must
reproduce byte-identical output.  All floats are serialized via repr, so a
report round-trips losslessly through yaml.safe_load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from . import __version__
from .config import ScenarioConfig
from .control import (GainDesign, conditioning_report, lqr_gain,
                      robust_pole_assignment)
from .errors import ConfigError
from .linearize import Equilibrium, LinearModel, linearize
from .simulate import (PerfReport, SimConfig, Trajectory, oscillation_report,
                       perturbation_sweep, simulate_closed_loop)

METHODS = ("lqr", "rpa")


def _plain(obj):
    """Recursively convert numpy containers to YAML-safe python types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def dump_yaml(doc: dict, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(_plain(doc), fh, sort_keys=False, default_flow_style=None,
                       width=100)


def load_yaml(path) -> dict:
    with open(path) as fh:
        return yaml.safe_load(fh)


def _header(scenario: ScenarioConfig) -> dict:
    return {"tool": "serialsat", "version": __version__,
            "config_hash": scenario.config_hash}


def _eigs_doc(values) -> dict:
    ordered = np.sort_complex(np.asarray(values, dtype=complex))
    return {"real": [float(v.real) for v in ordered],
            "imag": [float(v.imag) for v in ordered]}


def run_linearize(scenario: ScenarioConfig):
    eq = Equilibrium.at(scenario.chain, scenario.equilibrium)
    return eq, linearize(scenario.chain, eq)


def linearize_doc(scenario: ScenarioConfig, eq: Equilibrium,
                  model: LinearModel) -> dict:
    doc = _header(scenario)
    doc["equilibrium"] = {"state": eq.state.as_vector(), "residual": eq.residual}
    doc["linear_model"] = {"fd_step": model.fd_step,
                           "a_matrix": model.a, "b_matrix": model.b}
    return doc


def run_designs(scenario: ScenarioConfig, model: LinearModel, methods=METHODS):
    designs = {}
    for method in methods:
        if method == "lqr":
            designs["lqr"] = lqr_gain(model.a, model.b, scenario.weights)
        elif method == "rpa":
            designs["rpa"] = robust_pole_assignment(model.a, model.b,
                                                    scenario.poles)
        else:
            raise ValueError(f"unknown design method {method!r}")
    return designs


def _design_doc(design: GainDesign, scenario: ScenarioConfig) -> dict:
    doc = {"gain": design.k,
           "closed_loop_eigenvalues": _eigs_doc(design.closed_loop_eigenvalues)}
    if design.method == "lqr":
        doc["riccati_residual"] = design.riccati_residual
        doc["q_diagonal"] = np.diag(scenario.weights.q)
        doc["r_diagonal"] = np.diag(scenario.weights.r)
    else:
        cond = conditioning_report(design.eigenvector_matrix)
        doc["prescribed_poles"] = [p.real for p in scenario.poles.poles]
        doc["abs_det_x_initial"] = design.det_history[0]
        doc["abs_det_x_final"] = design.abs_det_x
        doc["sweeps"] = len(design.det_history) - 1
        doc["condition_number"] = cond.condition_number
        doc["eigenvalue_conditions"] = cond.eigenvalue_conditions
    return doc


def gains_doc(scenario: ScenarioConfig, designs: dict) -> dict:
    doc = _header(scenario)
    doc["designs"] = {m: _design_doc(d, scenario) for m, d in designs.items()}
    return doc


def load_gain_matrix(path, method=None):
    """Read a gain file written by the design command.

    Returns (method, 5x10 array); `method` may be omitted when the file
    holds exactly one design.
    """
    doc = load_yaml(path)
    if not isinstance(doc, dict) or "designs" not in doc:
        raise ConfigError(str(path), "not a gain file (missing 'designs')")
    designs = doc["designs"]
    if method is None:
        if len(designs) != 1:
            raise ConfigError(str(path),
                              f"holds {sorted(designs)}; pick one with --method")
        method = next(iter(designs))
    if method not in designs:
        raise ConfigError(str(path), f"no {method!r} design (has {sorted(designs)})")
    gain = np.asarray(designs[method]["gain"], dtype=float)
    if gain.shape != (5, 10):
        raise ConfigError(str(path), f"gain must be 5x10, got {gain.shape}")
    return method, gain


def run_simulation(scenario: ScenarioConfig, gain) -> tuple[Trajectory, PerfReport]:
    sim = SimConfig(duration=scenario.sim_duration, dt=scenario.sim_dt,
                    x0=scenario.x0, x_target=scenario.equilibrium, gain=gain)
    traj = simulate_closed_loop(scenario.chain, sim)
    return traj, oscillation_report(traj)


def perf_doc(traj: Trajectory, rep: PerfReport) -> dict:
    e0 = float(np.linalg.norm(traj.states[0] - traj.target))
    efin = float(np.linalg.norm(traj.states[-1] - traj.target))
    return {
        "energy": rep.energy,
        "peak_control": rep.peak_control,
        "initial_error_norm": e0,
        "final_error_norm": efin,
        "settling_times": rep.settling_times,
        "dominant_frequency_hz": rep.peak_frequency,
        "dominant_amplitude": rep.peak_amplitude,
    }


def _fmt(v) -> str:
    return "n/a" if (v is None or (isinstance(v, float) and math.isnan(v))) else f"{v:.6g}"


def verdict_lines(perf: dict, sweep_doc: dict | None) -> list:
    """One comparison line per metric; reporting only, never an assertion."""
    lines = []

    def better(metric, key, smaller_wins=True):
        vals = {m: perf[m][key] for m in perf}
        usable = {m: v for m, v in vals.items()
                  if v is not None and not (isinstance(v, float) and math.isnan(v))}
        if len(usable) < 2:
            return f"{metric}: insufficient data"
        pick = min(usable, key=usable.get) if smaller_wins else max(usable, key=usable.get)
        parts = ", ".join(f"{m}={_fmt(v)}" for m, v in sorted(vals.items()))
        return f"{metric}: {pick} ({parts})"

    lines.append(better("energy integral", "energy"))
    lines.append(better("peak control", "peak_control"))
    lines.append(better("final error", "final_error_norm"))
    settle = {m: (max(p["settling_times"]) if not any(
        math.isnan(v) for v in p["settling_times"]) else math.nan)
        for m, p in perf.items()}
    usable = {m: v for m, v in settle.items() if not math.isnan(v)}
    if len(usable) >= 2:
        pick = min(usable, key=usable.get)
        parts = ", ".join(f"{m}={_fmt(v)}" for m, v in sorted(settle.items()))
        lines.append(f"worst settling time: {pick} ({parts})")
    else:
        lines.append("worst settling time: insufficient data")
    amp = {m: max(p["dominant_amplitude"]) for m, p in perf.items()}
    pick = min(amp, key=amp.get)
    parts = ", ".join(f"{m}={_fmt(v)}" for m, v in sorted(amp.items()))
    lines.append(f"worst oscillation amplitude: {pick} ({parts})")
    if sweep_doc:
        frac = {m: sweep_doc[m]["fraction_stabilized"] for m in sweep_doc}
        pick = max(frac, key=frac.get)
        parts = ", ".join(f"{m}={_fmt(v)}" for m, v in sorted(frac.items()))
        lines.append(f"perturbation fraction stabilized: {pick} ({parts})")
    return lines


@dataclass(frozen=True)
class CompareResult:
    doc: dict
    trajectories: dict
    designs: dict


def run_compare(scenario: ScenarioConfig, with_sweep: bool = True) -> CompareResult:
    """Full pipeline: linearize, design both methods, simulate, sweep."""
    eq, model = run_linearize(scenario)
    designs = run_designs(scenario, model)
    doc = linearize_doc(scenario, eq, model)
    doc["designs"] = {m: _design_doc(d, scenario) for m, d in designs.items()}

    trajectories = {}
    perf = {}
    for method, design in designs.items():
        traj, rep = run_simulation(scenario, design.k)
        trajectories[method] = traj
        perf[method] = perf_doc(traj, rep)
    doc["simulation"] = {"dt": scenario.sim_dt, "duration": scenario.sim_duration,
                         **perf}

    sweep_section = None
    if with_sweep:
        sweep = perturbation_sweep(
            scenario.chain, {m: d.k for m, d in designs.items()},
            scenario.x0, scenario.equilibrium, scenario.perturbation)
        sweep_section = {
            m: {"fraction_stabilized": r.fraction_stabilized,
                "worst_energy": r.worst_energy,
                "worst_settling": r.worst_settling,
                "cases": len(r.cases)}
            for m, r in sweep.items()}
        doc["perturbation"] = {"bounds": scenario.perturbation.bounds,
                               "samples": scenario.perturbation.samples,
                               "duration": scenario.perturbation.duration,
                               "dt": scenario.perturbation.dt,
                               **sweep_section}
    doc["verdicts"] = verdict_lines(perf, sweep_section)
    return CompareResult(doc=doc, trajectories=trajectories, designs=designs)
