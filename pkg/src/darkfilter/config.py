"""Experiment configuration: JSON schema 1, validation and the bundled presets.

A config document looks like::

    {
      "schema": 1,
      "network": {"topology": "dimer_edge_coupled", "J": 5.4, "kappas": [2, 2],
                  "omegas": [0, 0], "delta": 1.0, "bath_sites": null},
      "input_state": [{"weight": 0.6, "state": [2, 0]},
                      {"weight": 0.4, "state": "dark(2)"}],
      "engine": "exact",
      "z_max": 6.0,
      "z_steps": 121,
      "target": "dark(2)",
      "tolerances": {"convergence_epsilon": 0.05},
      "output_path": "fig1.csv"
    }

``bath_sites: null`` picks a light-cone-safe length from ``J`` and ``z_max``.
With ``center_attachments: true`` the attachment pattern is moved to the
middle of the bath, which mimics an infinite lattice.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Union

import numpy as np

from darkfilter.engines import EngineKind, dark_state
from darkfilter.fock import DensityMatrix, PureState, fock_state, mix
from darkfilter.network import NetworkSpec, Topology, default_bath_sites

SCHEMA_VERSION = 1
PRESETS = ("fig1", "fig2")

StateDescriptor = Union[tuple[int, ...], str]

DEFAULT_TOLERANCES = {
    "dark_eigenvalue": 1e-8,
    "apt": 1e-8,
    "convergence_epsilon": 0.05,
    "lindblad_dz": None,
}

_TOP_KEYS = {
    "schema", "network", "input_state", "engine", "z_max", "z_steps",
    "target", "tolerances", "output_path",
}
_REQUIRED_TOP = {"schema", "network", "input_state", "z_max", "z_steps"}
_NETWORK_KEYS = {
    "topology", "J", "kappas", "omegas", "bias", "attach_sites", "delta",
    "bath_sites", "center_attachments",
}
_DARK = re.compile(r"^dark\((\d+)\)$")


class ConfigError(ValueError):
    """Raised with every violation found, not only the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid config:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkSpec
    input_state: tuple[tuple[float, StateDescriptor], ...]
    engine: EngineKind
    z_max: float
    z_steps: int
    target: StateDescriptor
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: str = "darkfilter.csv"

    @property
    def photons(self) -> int:
        return descriptor_photons(self.input_state[0][1])

    def z_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.z_max, self.z_steps)

    def tol(self, key: str):
        return self.tolerances.get(key, DEFAULT_TOLERANCES[key])


def descriptor_photons(desc: StateDescriptor) -> int:
    if isinstance(desc, str):
        return int(_DARK.match(desc).group(1))
    return sum(desc)


def _parse_descriptor(raw, path: str, errors: list[str]) -> StateDescriptor | None:
    if isinstance(raw, str):
        if _DARK.match(raw.strip()):
            return raw.strip()
        errors.append(f"{path}: unknown state descriptor {raw!r} (use an occupation list or 'dark(N)')")
        return None
    if isinstance(raw, list) and raw and all(isinstance(n, int) and not isinstance(n, bool) and n >= 0 for n in raw):
        return tuple(raw)
    errors.append(f"{path}: state must be a list of non-negative integers or 'dark(N)'")
    return None


def _number(d: dict, key: str, path: str, errors: list[str], required: bool = True,
            default=None):
    if key not in d or d[key] is None:
        if required:
            errors.append(f"{path}.{key}: missing required key")
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{path}.{key}: expected a number, got {val!r}")
        return default
    return float(val)


def _number_list(d: dict, key: str, path: str, errors: list[str], cast=float):
    if key not in d:
        errors.append(f"{path}.{key}: missing required key")
        return None
    val = d[key]
    if not isinstance(val, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in val
    ):
        errors.append(f"{path}.{key}: expected a list of numbers")
        return None
    if cast is int and not all(float(x).is_integer() for x in val):
        errors.append(f"{path}.{key}: expected integers")
        return None
    return [cast(x) for x in val]


def _parse_network(raw: dict, z_max: float | None, errors: list[str],
                   z_max_given=None) -> NetworkSpec | None:
    path = "network"
    if not isinstance(raw, dict):
        errors.append("network: expected an object")
        return None
    for key in sorted(set(raw) - _NETWORK_KEYS):
        errors.append(f"network.{key}: unknown key")
    before = len(errors)
    try:
        topology = Topology(raw.get("topology"))
    except ValueError:
        errors.append(f"network.topology: expected one of {[t.value for t in Topology]}")
        topology = None
    J = _number(raw, "J", path, errors)
    kappas = _number_list(raw, "kappas", path, errors)
    omegas = _number_list(raw, "omegas", path, errors)
    bias = _number(raw, "bias", path, errors, required=False, default=0.0)
    delta = _number(raw, "delta", path, errors, required=False, default=0.0)
    center = raw.get("center_attachments", False)
    if not isinstance(center, bool):
        errors.append("network.center_attachments: expected true or false")
        center = False
    if topology is Topology.SIDE_COUPLED_CHAIN:
        sites = _number_list(raw, "attach_sites", path, errors, cast=int)
    else:
        sites = [1, 1]
    bath = raw.get("bath_sites")
    if bath is not None and (isinstance(bath, bool) or not isinstance(bath, int) or bath < 1):
        errors.append("network.bath_sites: expected a positive integer or null")
        bath = None
    if len(errors) > before:
        return None

    if bath is None:
        if z_max is None or J is None or J <= 0:
            if z_max_given is None:
                errors.append("network.bath_sites: null needs z_max to size the bath")
            return None
        if center and sites:
            bath = default_bath_sites(J, z_max) + (max(sites) - min(sites))
        else:
            bath = default_bath_sites(J, z_max, max(sites))
    if center and topology is Topology.SIDE_COUPLED_CHAIN and sites:
        span = max(sites) - min(sites)
        shift = (bath - span) // 2 + 1 - min(sites)
        sites = [n + shift for n in sites]

    try:
        return NetworkSpec(
            topology=topology, J=J, kappas=tuple(kappas), omegas=tuple(omegas),
            bath_sites=int(bath), bias=bias,
            attach_sites=tuple(sites) if topology is Topology.SIDE_COUPLED_CHAIN else (),
            delta=delta,
        )
    except ValueError as exc:
        errors.extend(f"network: {p}" for p in str(exc).split(": ", 1)[-1].split("; "))
        return None


def validate(doc: Any) -> ExperimentConfig:
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level: expected a JSON object"])
    for key in sorted(set(doc) - _TOP_KEYS):
        errors.append(f"{key}: unknown key")
    for key in sorted(_REQUIRED_TOP - set(doc)):
        errors.append(f"{key}: missing required key")
    if "schema" in doc and doc["schema"] != SCHEMA_VERSION:
        errors.append(f"schema: unsupported version {doc['schema']!r}, expected {SCHEMA_VERSION}")

    z_max = _number(doc, "z_max", "", errors, required=False)
    if z_max is not None and not z_max > 0:
        errors.append(f"z_max: must be positive, got {z_max}")
    z_steps = doc.get("z_steps")
    if "z_steps" in doc and (isinstance(z_steps, bool) or not isinstance(z_steps, int) or z_steps < 2):
        errors.append(f"z_steps: must be an integer >= 2, got {z_steps!r}")

    try:
        engine = EngineKind(doc.get("engine", "exact"))
    except ValueError:
        errors.append(f"engine: expected one of {[e.value for e in EngineKind]}")
        engine = None

    network = None
    if "network" in doc:
        network = _parse_network(
            doc["network"], z_max if z_max and z_max > 0 else None, errors, doc.get("z_max")
        )

    mixture = []
    raw_mix = doc.get("input_state")
    if "input_state" in doc:
        if not isinstance(raw_mix, list) or not raw_mix:
            errors.append("input_state: expected a non-empty list of {weight, state}")
        else:
            for i, item in enumerate(raw_mix):
                path = f"input_state[{i}]"
                if not isinstance(item, dict) or set(item) != {"weight", "state"}:
                    errors.append(f"{path}: expected exactly the keys weight and state")
                    continue
                w = _number(item, "weight", path, errors)
                desc = _parse_descriptor(item["state"], f"{path}.state", errors)
                if w is not None and w < 0:
                    errors.append(f"{path}.weight: must be non-negative")
                if w is not None and desc is not None:
                    mixture.append((w, desc))
            if mixture and len(mixture) == len(raw_mix):
                total = sum(w for w, _ in mixture)
                if abs(total - 1.0) > 1e-12:
                    errors.append(f"input_state: weights sum to {total!r}, expected 1")
                counts = {descriptor_photons(d) for _, d in mixture}
                if len(counts) > 1:
                    errors.append("input_state: all states must share one photon number")

    target = None
    if mixture:
        default_target = f"dark({descriptor_photons(mixture[0][1])})"
        target = _parse_descriptor(doc.get("target", default_target), "target", errors)

    if network is not None:
        for i, (_, desc) in enumerate(mixture):
            if not isinstance(desc, str) and len(desc) != network.M:
                errors.append(f"input_state[{i}].state: expected {network.M} occupations")
        if isinstance(target, tuple) and len(target) != network.M:
            errors.append(f"target: expected {network.M} occupations")
        if mixture and target is not None and descriptor_photons(target) != descriptor_photons(mixture[0][1]):
            errors.append("target: photon number differs from the input state")

    tolerances = dict(DEFAULT_TOLERANCES)
    raw_tol = doc.get("tolerances", {})
    if not isinstance(raw_tol, dict):
        errors.append("tolerances: expected an object")
    else:
        for key, val in raw_tol.items():
            if key not in DEFAULT_TOLERANCES:
                errors.append(f"tolerances.{key}: unknown key")
            elif val is not None and (isinstance(val, bool) or not isinstance(val, (int, float)) or val <= 0):
                errors.append(f"tolerances.{key}: expected a positive number or null")
            else:
                tolerances[key] = None if val is None else float(val)

    output_path = doc.get("output_path", "darkfilter.csv")
    if not isinstance(output_path, str) or not output_path:
        errors.append("output_path: expected a non-empty string")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        network=network,
        input_state=tuple(mixture),
        engine=engine,
        z_max=z_max,
        z_steps=z_steps,
        target=target,
        tolerances=tolerances,
        output_path=output_path,
    )


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from None
    return validate(doc)


def _descriptor_json(desc: StateDescriptor):
    return desc if isinstance(desc, str) else list(desc)


def config_to_dict(config: ExperimentConfig) -> dict:
    net = config.network
    network = {
        "topology": net.topology.value,
        "J": net.J,
        "kappas": list(net.kappas),
        "omegas": list(net.omegas),
        "bias": net.bias,
        "delta": net.delta,
        "bath_sites": net.bath_sites,
    }
    if net.topology is Topology.SIDE_COUPLED_CHAIN:
        network["attach_sites"] = list(net.attach_sites)
    return {
        "schema": SCHEMA_VERSION,
        "network": network,
        "input_state": [
            {"weight": w, "state": _descriptor_json(d)} for w, d in config.input_state
        ],
        "engine": config.engine.value,
        "z_max": config.z_max,
        "z_steps": config.z_steps,
        "target": _descriptor_json(config.target),
        "tolerances": dict(config.tolerances),
        "output_path": config.output_path,
    }


def emit_config(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"


def load_preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError([f"preset: unknown preset {name!r}, expected one of {list(PRESETS)}"])
    text = resources.files("darkfilter").joinpath("presets", f"{name}.json").read_text("utf-8")
    return json.loads(text)


def apply_overrides(doc: dict, *, engine=None, z_max=None, z_steps=None,
                    bath_sites=None, output_path=None) -> dict:
    doc = copy.deepcopy(doc)
    if engine is not None:
        doc["engine"] = engine
    if z_max is not None:
        doc["z_max"] = z_max
    if z_steps is not None:
        doc["z_steps"] = z_steps
    if bath_sites is not None and isinstance(doc.get("network"), dict):
        doc["network"]["bath_sites"] = bath_sites
    if output_path is not None:
        doc["output_path"] = output_path
    return doc


def preset(name: str, **overrides) -> ExperimentConfig:
    return validate(apply_overrides(load_preset_dict(name), **overrides))


def build_state(desc: StateDescriptor, network: NetworkSpec) -> PureState:
    if isinstance(desc, str):
        return dark_state(network, descriptor_photons(desc))
    return fock_state(desc)


def build_input(config: ExperimentConfig) -> DensityMatrix:
    return mix([(w, build_state(d, config.network)) for w, d in config.input_state])


def fig2_network(J: float = 10.0, kappa: float = 2.0, z_max: float = 15.0) -> NetworkSpec:
    """Trimer preset network with ``omega_2`` tied to ``kappa`` by the dark condition."""
    bias = math.sqrt(2.0) * J
    doc = {
        "topology": "side_coupled_chain",
        "J": J,
        "kappas": [kappa] * 3,
        "omegas": [bias, bias - kappa**2 / bias, bias],
        "bias": bias,
        "attach_sites": [1, 2, 3],
        "center_attachments": True,
        "bath_sites": None,
    }
    errors: list[str] = []
    spec = _parse_network(doc, z_max, errors)
    if errors:
        raise ConfigError(errors)
    return spec
