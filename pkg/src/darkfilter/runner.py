"""Run a configured experiment and collect its outputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from darkfilter.config import ExperimentConfig, build_input, build_state, config_to_dict
from darkfilter.effective import apt_symmetry_check, dark_search, effective_hamiltonian, spectrum
from darkfilter.engines import run_sweep
from darkfilter.observables import EvolutionResult, convergence_length
from darkfilter.report import plot_result, write_csv, write_json


@dataclass
class RunOutput:
    result: EvolutionResult
    summary: dict
    files: list[Path] = field(default_factory=list)


def _pairs(values) -> list[list[float]]:
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def analysis(config: ExperimentConfig) -> dict:
    heff = effective_hamiltonian(config.network)
    tol = config.tol("dark_eigenvalue") * heff.scale
    certs = dark_search(heff, tol)
    return {
        "effective_hamiltonian": {
            "real": heff.matrix.real.tolist(),
            "imag": heff.matrix.imag.tolist(),
            "k0": heff.k0,
            "spectral_factor": heff.spectral_factor,
        },
        "spectrum": _pairs(spectrum(heff)),
        "apt_symmetric": apt_symmetry_check(heff, config.tol("apt") * max(heff.scale, 1.0)),
        "dark_certificates": [c.as_dict() for c in certs],
    }


def summary_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def plot_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".png")


def run(config: ExperimentConfig, *, write: bool = True, plot: bool = False) -> RunOutput:
    rho0 = build_input(config)
    target = build_state(config.target, config.network)
    result = run_sweep(
        config.network, rho0, config.z_grid(), config.engine, target,
        dz=config.tol("lindblad_dz"),
    )
    eps = config.tol("convergence_epsilon")

    def point(i):
        return {
            "z": result.z_values[i],
            "purity": result.purity[i],
            "trace_distance": result.trace_distance[i],
            "trace_distance_half": result.trace_distance_half[i],
            "success_probability": result.success_probability[i],
        }

    summary = {
        "engine": config.engine.value,
        "config": config_to_dict(config),
        "initial": point(0),
        "final": point(-1),
        "convergence_epsilon": eps,
        "convergence_length": convergence_length(result, eps),
        **analysis(config),
    }
    out = RunOutput(result, summary)
    if write:
        out.files.append(write_csv(result, config.output_path))
        out.files.append(write_json(summary, summary_path(config.output_path)))
        if plot:
            title = f"{config.engine.value} engine, N={config.photons}"
            out.files.append(plot_result(result, plot_path(config.output_path), title))
    return out
