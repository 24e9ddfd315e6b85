"""Born-Markov effective models: non-Hermitian Hamiltonians, dark states, spectra."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from darkfilter.network import NetworkSpec, Topology


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """``matrix = coherent - 1j * dissipative / 2``.

    ``spectral_factor`` is the bath density factor ``1/sqrt(4J^2 - bias^2)``
    and ``k0`` the Bloch wavenumber resonant with the bias.
    """

    matrix: np.ndarray
    coherent: np.ndarray
    dissipative: np.ndarray
    k0: float
    spectral_factor: float

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix), initial=0.0))


@dataclass(frozen=True)
class DarkStateCertificate:
    vector: np.ndarray
    eigenvalue: complex
    condition_met: bool
    defective: bool = False

    @property
    def residual_im(self) -> float:
        return abs(complex(self.eigenvalue).imag)

    def as_dict(self) -> dict:
        return {
            "eigenvalue": [complex(self.eigenvalue).real, complex(self.eigenvalue).imag],
            "vector_re": [float(x) for x in np.real(self.vector)],
            "vector_im": [float(x) for x in np.imag(self.vector)],
            "residual_im": self.residual_im,
            "condition_met": bool(self.condition_met),
            "defective": bool(self.defective),
        }


def _from_parts(coherent, dissipative, k0, factor) -> EffectiveHamiltonian:
    coherent = np.asarray(coherent, dtype=float)
    dissipative = np.asarray(dissipative, dtype=float)
    return EffectiveHamiltonian(coherent - 0.5j * dissipative, coherent, dissipative, k0, factor)


def effective_dimer(spec: NetworkSpec) -> EffectiveHamiltonian:
    """Two waveguides sharing the end site of a semi-infinite lattice.

    Each loses at ``gamma = 2 kappa^2 / J`` and the common bath adds an equal
    dissipative cross term; the direct coupling ``delta`` is the only coherent
    part.
    """
    if spec.topology is not Topology.DIMER_EDGE_COUPLED:
        raise ValueError("effective_dimer needs the edge-coupled dimer topology")
    if any(w != 0 for w in spec.omegas):
        raise ValueError("the dimer effective model assumes equal propagation constants")
    kappa = np.array(spec.kappas)
    gamma = 2.0 * np.outer(kappa, kappa) / spec.J
    coherent = np.array([[0.0, spec.delta], [spec.delta, 0.0]])
    # end site of a semi-infinite chain at zero detuning: k0 = -pi/2, doubled density
    return _from_parts(coherent, gamma, -math.pi / 2, 1.0 / (2.0 * spec.J))


def effective_network(spec: NetworkSpec) -> EffectiveHamiltonian:
    """Waveguides side-coupled to an infinite lattice, linearized around the bias."""
    if spec.topology is not Topology.SIDE_COUPLED_CHAIN:
        raise ValueError("effective_network needs the side-coupled chain topology")
    J, bias = spec.J, spec.bias
    if abs(bias) >= 2 * J:
        raise ValueError(f"bias {bias} lies outside the band (|bias| < 2J = {2 * J})")
    root = math.sqrt(4 * J * J - bias * bias)
    factor = 1.0 / root
    k0 = -math.pi / 2 + math.atan(bias / root)
    kappa = np.array(spec.kappas)
    sites = np.array(spec.attach_sites)
    phase = k0 * np.abs(sites[:, None] - sites[None, :])
    kk = factor * np.outer(kappa, kappa)
    coherent = np.diag(spec.omegas) + kk * np.sin(phase)
    dissipative = 2.0 * kk * np.cos(phase)
    return _from_parts(coherent, dissipative, k0, factor)


def effective_hamiltonian(spec: NetworkSpec) -> EffectiveHamiltonian:
    if spec.topology is Topology.DIMER_EDGE_COUPLED:
        return effective_dimer(spec)
    return effective_network(spec)


def _adjacent_trimer(spec: NetworkSpec) -> None:
    if spec.M != 3:
        raise ValueError(f"trimer condition needs three waveguides, got {spec.M}")
    n1, n2, n3 = spec.attach_sites
    if n2 - n1 != 1 or n3 - n2 != 1:
        raise ValueError("trimer condition holds only for adjacent attachment sites")


def dark_condition_trimer(spec: NetworkSpec) -> bool:
    """``omega_3 == omega_1`` and ``omega_2 == omega_1 - kappa_2^2 / omega_1``."""
    _adjacent_trimer(spec)
    w1, w2, w3 = spec.omegas
    if w1 == 0:
        return False
    tol = 1e-9 * abs(w1)
    return abs(w3 - w1) <= tol and abs(w2 - (w1 - spec.kappas[1] ** 2 / w1)) <= tol


def dark_vector_trimer(spec: NetworkSpec) -> DarkStateCertificate:
    """Dressed dark mode ``(1, -k1 w1 / (J k2), k1 / k3)``, normalized."""
    _adjacent_trimer(spec)
    k1, k2, k3 = spec.kappas
    w1 = spec.omegas[0]
    if w1 == 0 or k2 == 0 or k3 == 0:
        raise ValueError("dark vector undefined for omega_1 = 0 or vanishing kappa_2, kappa_3")
    if not dark_condition_trimer(spec):
        raise ValueError("network does not satisfy the trimer dark-state condition")
    v = np.array([1.0, -k1 * w1 / (spec.J * k2), k1 / k3], dtype=complex)
    v /= np.linalg.norm(v)
    heff = effective_network(spec).matrix
    # Rayleigh quotient; equals omega_1 when the bias matches omega_1
    eigenvalue = complex(v.conj() @ heff @ v)
    return DarkStateCertificate(v, eigenvalue, condition_met=True)


def spectrum(H_eff) -> np.ndarray:
    """Eigenvalues sorted by real part, then imaginary part."""
    mat = H_eff.matrix if isinstance(H_eff, EffectiveHamiltonian) else np.asarray(H_eff)
    vals = np.linalg.eigvals(mat)
    return np.array(sorted(vals, key=lambda x: (round(x.real, 12), round(x.imag, 12))))


def apt_symmetry_check(H_eff, tol: float = 1e-8) -> bool:
    """Whether the spectrum is invariant under ``lambda -> -conj(lambda)``."""
    vals = list(spectrum(H_eff))
    mirrored = sorted((-np.conj(v) for v in vals), key=lambda x: (x.real, x.imag))
    unmatched = list(mirrored)
    for v in vals:
        if not unmatched:
            return False
        dist = [abs(v - w) for w in unmatched]
        k = int(np.argmin(dist))
        if dist[k] > tol:
            return False
        unmatched.pop(k)
    return True


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    big = np.flatnonzero(np.abs(v) > 1e-8 * np.max(np.abs(v)))
    lead = v[big[0]]
    return v * (abs(lead) / lead)


def dark_search(H_eff, tol: float | None = None) -> list[DarkStateCertificate]:
    """Eigenpairs with ``|Im lambda| < tol``.

    The default tolerance is ``1e-8`` times the largest matrix entry.  Each
    real eigenvalue cluster yields one certificate per null vector of
    ``H - lambda``; clusters whose null space is smaller than their algebraic
    multiplicity are flagged defective.
    """
    mat = H_eff.matrix if isinstance(H_eff, EffectiveHamiltonian) else np.asarray(H_eff, complex)
    scale = float(np.max(np.abs(mat), initial=0.0)) or 1.0
    if tol is None:
        tol = 1e-8 * scale
    vals = np.linalg.eigvals(mat)
    real_vals = sorted((v for v in vals if abs(v.imag) < tol), key=lambda x: x.real)

    clusters: list[list[complex]] = []
    for v in real_vals:
        if clusters and abs(v - clusters[-1][-1]) < max(tol, 1e-9 * scale):
            clusters[-1].append(v)
        else:
            clusters.append([v])

    out = []
    for cluster in clusters:
        lam = complex(np.mean(cluster))
        null = scipy.linalg.null_space(mat - lam * np.eye(mat.shape[0]), rcond=1e-9)
        if null.shape[1] == 0:
            # eigvals found it but the SVD threshold is tighter; fall back to the smallest singular vector
            _, _, vh = np.linalg.svd(mat - lam * np.eye(mat.shape[0]))
            null = vh[-1:].conj().T
        defective = null.shape[1] < len(cluster)
        if defective:
            warnings.warn(f"real eigenvalue {lam:.6g} is defective", RuntimeWarning, stacklevel=2)
        for k in range(null.shape[1]):
            vec = _fix_phase(null[:, k])
            # eigenvalue re-estimated from the vector so the certificate is self-consistent
            eig = complex(vec.conj() @ mat @ vec)
            out.append(DarkStateCertificate(vec, eig, abs(eig.imag) < tol, defective))
    return out
