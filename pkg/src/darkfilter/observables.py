"""Scalar diagnostics of the conditional state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from darkfilter.fock import DensityMatrix, PureState


@dataclass
class EvolutionResult:
    z_values: list[float] = field(default_factory=list)
    purity: list[float] = field(default_factory=list)
    trace_distance: list[float] = field(default_factory=list)
    trace_distance_half: list[float] = field(default_factory=list)
    success_probability: list[float] = field(default_factory=list)
    fidelity: list[float] = field(default_factory=list)
    engine: str = ""
    target_label: str = ""
    states: list[DensityMatrix] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.z_values)

    def append(self, z, rho, target, success):
        d = trace_distance(rho, target)
        self.z_values.append(float(z))
        self.purity.append(purity(rho))
        self.trace_distance.append(d)
        self.trace_distance_half.append(0.5 * d)
        self.success_probability.append(float(success))
        if isinstance(target, PureState):
            self.fidelity.append(fidelity_to_pure(rho, target))
        self.states.append(rho)


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return np.outer(rho.amplitudes, rho.amplitudes.conj())
    return np.asarray(rho, dtype=complex)


def _same_basis(a, b) -> None:
    ba = getattr(a, "basis", None)
    bb = getattr(b, "basis", None)
    if ba is not None and bb is not None and ba != bb:
        raise ValueError("states live on different Fock bases")


def purity(rho) -> float:
    """``Tr(rho^2)``."""
    m = _matrix(rho)
    value = np.einsum("ij,ji->", m, m)
    assert abs(value.imag) < 1e-12, "purity has an imaginary residue"
    return float(value.real)


def trace_distance(rho, sigma, halved: bool = False) -> float:
    """``Tr|rho - sigma|``, the sum of absolute eigenvalues of the difference.

    No conventional factor 1/2 unless ``halved`` is set, so orthogonal pure
    states sit at distance 2.
    """
    _same_basis(rho, sigma)
    diff = _matrix(rho) - _matrix(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    d = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    return 0.5 * d if halved else d


def fidelity_to_pure(rho, psi: PureState) -> float:
    """``<psi|rho|psi>``."""
    _same_basis(rho, psi)
    amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    return float(np.real(amps.conj() @ _matrix(rho) @ amps))


def convergence_length(result: EvolutionResult, epsilon: float) -> float | None:
    """First grid point from which the trace distance stays at or below ``epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    found = None
    for z, d in zip(result.z_values, result.trace_distance):
        if d <= epsilon:
            if found is None:
                found = z
        else:
            found = None
    return found
