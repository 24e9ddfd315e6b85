"""CSV, JSON summary and figure output for a sweep."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from darkfilter.observables import EvolutionResult

CSV_COLUMNS = ("z", "purity", "trace_distance", "trace_distance_half", "success_probability")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_text(result: EvolutionResult) -> str:
    lines = [",".join(CSV_COLUMNS)]
    rows = zip(
        result.z_values, result.purity, result.trace_distance,
        result.trace_distance_half, result.success_probability,
    )
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(result: EvolutionResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(result))
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(data: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def _style(plt):
    plt.rcParams.update({
        "font.size": 10,
        "axes.labelsize": 11,
        "axes.linewidth": 0.8,
        "lines.linewidth": 1.6,
        "xtick.direction": "in",
        "ytick.direction": "in",
        "savefig.dpi": 150,
    })


def plot_result(result: EvolutionResult, path: str | Path, title: str | None = None) -> Path:
    """Purity and trace distance against ``z`` in two stacked panels."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _style(plt)
    fig, (ax_p, ax_d) = plt.subplots(2, 1, figsize=(4.5, 5.0), sharex=True)
    z = np.asarray(result.z_values)
    ax_p.plot(z, result.purity, color="tab:blue")
    ax_p.set_ylabel(r"purity $\mathcal{P}(z)$")
    ax_p.set_ylim(min(0.0, min(result.purity, default=0)), 1.02)
    ax_d.plot(z, result.trace_distance, color="tab:red", label=r"Tr$|\rho-\rho_d|$")
    ax_d.plot(z, result.trace_distance_half, color="tab:red", ls="--", lw=1.0, label="halved")
    ax_d.set_ylabel(r"trace distance $d(z)$")
    ax_d.set_xlabel(r"$z$ (cm)")
    ax_d.set_ylim(bottom=0.0)
    ax_d.legend(frameon=False)
    if title:
        ax_p.set_title(title)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path
