"""Scenario files: schema, strict loading, and the shipped strawman plant.

Scenario files are YAML with angle quantities in degrees (and deg/s); the
library works in radians only.  Unknown keys are rejected with the full
key path so typos fail loudly.
"""
from __future__ import annotations

import hashlib
import importlib.resources
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .bodies import AttitudeState, ChainConfig, JointAxes, RigidBodyParams
from .control import LqrWeights, PoleSet
from .errors import ConfigError, GimbalLockError
from .simulate import PerturbationSpec

_INERTIA_KEYS = ("ixx", "iyy", "izz", "ixy", "ixz", "iyz")

SCHEMA = {
    "bodies": {
        "spacecraft": {"mass": None, "inertia": None, "inertia_matrix": None,
                       "joint_offsets": {"g1": None}},
        "boom": {"mass": None, "inertia": None, "inertia_matrix": None,
                 "joint_offsets": {"g1": None, "g2": None}},
        "payload": {"mass": None, "inertia": None, "inertia_matrix": None,
                    "joint_offsets": {"g2": None}},
    },
    "joints": {"gimbal1_axis": None, "gimbal2_axis": None},
    "equilibrium": {"roll_deg": None, "pitch_deg": None, "yaw_deg": None,
                    "boom_deg": None, "payload_deg": None},
    "lqr": {"q_diagonal": None, "r_diagonal": None},
    "rpa": {"poles": None},
    "sim": {"dt": None, "duration": None, "initial_state_deg": None,
            "perturbation": {"bounds": None, "samples": None,
                             "duration": None, "dt": None}},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one CLI run needs, in SI/radians."""

    chain: ChainConfig
    equilibrium: AttitudeState
    weights: LqrWeights
    poles: PoleSet
    sim_dt: float
    sim_duration: float
    x0: AttitudeState
    perturbation: PerturbationSpec
    config_hash: str


def strawman_path():
    """Path of the packaged strawman scenario."""
    return importlib.resources.files("serialsat").joinpath("data/strawman.yaml")


def resolve_config_path(arg: str) -> str:
    """Map the literal name 'strawman' to the packaged scenario file."""
    if arg == "strawman":
        return str(strawman_path())
    return arg


def config_hash(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def load_raw(path) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"YAML parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "top level must be a mapping")
    return raw


def check_unknown_keys(raw, schema=None, prefix="") -> None:
    """Reject keys the schema does not know, naming the offending path."""
    schema = SCHEMA if schema is None else schema
    for key, val in raw.items():
        path = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(path, "unknown key")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(val, dict):
                raise ConfigError(path, "expected a mapping")
            check_unknown_keys(val, sub, path + ".")


def _need(raw, path):
    node = raw
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(path, "missing required key")
        node = node[part]
    return node


def _float(raw, path):
    v = _need(raw, path)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    return float(v)


def _floats(raw, path, n):
    v = _need(raw, path)
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise ConfigError(path, f"expected a list of {n} numbers")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{path}[{i}]", f"expected a number, got {item!r}")
        out.append(float(item))
    return out


def parse_inertia(raw, body_path):
    """Inertia from either six unique entries or a full validated matrix."""
    node = _need(raw, body_path)
    has_six = isinstance(node, dict) and "inertia" in node
    has_mat = isinstance(node, dict) and "inertia_matrix" in node
    if has_six == has_mat:
        raise ConfigError(f"{body_path}.inertia",
                          "give exactly one of inertia / inertia_matrix")
    if has_six:
        entries = node["inertia"]
        if not isinstance(entries, dict):
            raise ConfigError(f"{body_path}.inertia", "expected a mapping")
        for key in entries:
            if key not in _INERTIA_KEYS:
                raise ConfigError(f"{body_path}.inertia.{key}", "unknown key")
        vals = {}
        for key in _INERTIA_KEYS:
            if key not in entries:
                raise ConfigError(f"{body_path}.inertia.{key}", "missing required key")
            vals[key] = _float(raw, f"{body_path}.inertia.{key}")
        return np.array([[vals["ixx"], vals["ixy"], vals["ixz"]],
                         [vals["ixy"], vals["iyy"], vals["iyz"]],
                         [vals["ixz"], vals["iyz"], vals["izz"]]])
    rows = _need(raw, f"{body_path}.inertia_matrix")
    if not isinstance(rows, list) or len(rows) != 3:
        raise ConfigError(f"{body_path}.inertia_matrix", "expected 3 rows of 3 numbers")
    mat = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 3:
            raise ConfigError(f"{body_path}.inertia_matrix[{i}]", "expected 3 numbers")
        mat.append([float(v) for v in row])
    return np.array(mat)


def _build_body(raw, name, joint_keys):
    path = f"bodies.{name}"
    mass = _float(raw, f"{path}.mass")
    inertia = parse_inertia(raw, path)
    offsets = {}
    for key in joint_keys:
        offsets[key] = _floats(raw, f"{path}.joint_offsets.{key}", 3)
    try:
        return RigidBodyParams(mass=mass, inertia=inertia, offsets=offsets)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def build_chain(raw) -> ChainConfig:
    spacecraft = _build_body(raw, "spacecraft", ("g1",))
    boom = _build_body(raw, "boom", ("g1", "g2"))
    payload = _build_body(raw, "payload", ("g2",))
    try:
        joints = JointAxes(gamma1=_floats(raw, "joints.gimbal1_axis", 3),
                           gamma2=_floats(raw, "joints.gimbal2_axis", 3))
        return ChainConfig(spacecraft=spacecraft, boom=boom, payload=payload,
                           joints=joints)
    except ValueError as exc:
        raise ConfigError("joints", str(exc)) from exc


def _attitude_from_degrees(values, key):
    vals = [math.radians(v) for v in values]
    try:
        return AttitudeState.from_vector(vals)
    except GimbalLockError:
        raise  # numerical failure, not a parse problem: callers exit 3
    except Exception as exc:
        raise ConfigError(key, str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    """Strictly parse and validate a scenario file."""
    raw = load_raw(path)
    check_unknown_keys(raw)
    chain = build_chain(raw)

    eq_deg = [_float(raw, f"equilibrium.{k}") for k in
              ("roll_deg", "pitch_deg", "yaw_deg", "boom_deg", "payload_deg")]
    equilibrium = _attitude_from_degrees(eq_deg + [0.0] * 5, "equilibrium")

    try:
        weights = LqrWeights(q=np.diag(_floats(raw, "lqr.q_diagonal", 10)),
                             r=np.diag(_floats(raw, "lqr.r_diagonal", 5)))
    except ValueError as exc:
        raise ConfigError("lqr", str(exc)) from exc
    try:
        poles = PoleSet(tuple(_floats(raw, "rpa.poles", 10)))
    except ValueError as exc:
        raise ConfigError("rpa.poles", str(exc)) from exc

    dt = _float(raw, "sim.dt")
    duration = _float(raw, "sim.duration")
    x0 = _attitude_from_degrees(_floats(raw, "sim.initial_state_deg", 10),
                                "sim.initial_state_deg")
    if dt <= 0.0:
        raise ConfigError("sim.dt", "must be positive")
    if duration < dt:
        raise ConfigError("sim.duration", "must cover at least one step")

    pert = raw.get("sim", {}).get("perturbation", {})
    try:
        spec = PerturbationSpec(
            bounds=float(pert.get("bounds", 0.2)),
            samples=int(pert.get("samples", 32)),
            duration=float(pert.get("duration", 4000.0)),
            dt=float(pert.get("dt", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError("sim.perturbation", str(exc)) from exc

    return ScenarioConfig(chain=chain, equilibrium=equilibrium, weights=weights,
                          poles=poles, sim_dt=dt, sim_duration=duration, x0=x0,
                          perturbation=spec, config_hash=config_hash(path))
