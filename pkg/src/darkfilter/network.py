"""Single-particle model of system waveguides coupled to a truncated lattice bath.

Mode amplitudes obey ``i da/dz = H a``, so the propagator is ``exp(-iHz)``.
Indices ``0..M-1`` are the system waveguides and ``M..M+L-1`` the bath sites
``1..L``.  Bath site 1 is a physical edge; site ``L`` is where the otherwise
semi-infinite lattice is truncated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class Topology(str, enum.Enum):
    DIMER_EDGE_COUPLED = "dimer_edge_coupled"
    SIDE_COUPLED_CHAIN = "side_coupled_chain"


def default_bath_sites(J: float, z_max: float, last_attach: int = 1) -> int:
    """Bath length keeping edge reflections outside the light cone up to ``z_max``.

    The fastest lattice wave moves at ``2J``; the margin is 1.5x plus 20 sites,
    counted beyond the last attachment site.
    """
    return math.ceil(2.0 * J * z_max * 1.5) + 20 + max(last_attach - 1, 0)


@dataclass(frozen=True)
class NetworkSpec:
    topology: Topology
    J: float
    kappas: tuple[float, ...]
    omegas: tuple[float, ...]
    bath_sites: int
    bias: float = 0.0
    attach_sites: tuple[int, ...] = ()
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if self.topology is Topology.DIMER_EDGE_COUPLED and not self.attach_sites:
            object.__setattr__(self, "attach_sites", (1,) * len(self.kappas))
        object.__setattr__(self, "attach_sites", tuple(int(n) for n in self.attach_sites))
        problems = self.violations()
        if problems:
            raise ValueError("invalid network: " + "; ".join(problems))

    @property
    def M(self) -> int:
        return len(self.kappas)

    def violations(self) -> list[str]:
        out = []
        if not self.J > 0:
            out.append(f"J must be positive, got {self.J}")
        if self.bath_sites < 1:
            out.append(f"bath_sites must be >= 1, got {self.bath_sites}")
        if self.M < 1:
            out.append("need at least one system waveguide")
        if any(k < 0 for k in self.kappas):
            out.append("kappas must be non-negative")
        if len(self.omegas) != self.M:
            out.append(f"got {len(self.omegas)} omegas for {self.M} kappas")
        if len(self.attach_sites) != self.M:
            out.append(f"got {len(self.attach_sites)} attach sites for {self.M} kappas")
        if any(abs(w) >= 2 * self.J for w in self.omegas):
            out.append("every |omega| must lie inside the band, below 2J")
        if self.topology is Topology.DIMER_EDGE_COUPLED:
            if self.M != 2:
                out.append(f"dimer needs exactly 2 system waveguides, got {self.M}")
            if any(n != 1 for n in self.attach_sites):
                out.append("dimer waveguides both attach to bath site 1")
        else:
            sites = self.attach_sites
            if any(b <= a for a, b in zip(sites, sites[1:])):
                out.append("attach sites must be strictly increasing")
            if any(n < 1 or n > self.bath_sites for n in sites):
                out.append(f"attach sites must lie in 1..{self.bath_sites}")
        return out

    def replace(self, **changes) -> "NetworkSpec":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class SingleParticleHamiltonian:
    matrix: np.ndarray
    system_indices: tuple[int, ...]
    spec: NetworkSpec = field(compare=False)


def build_hamiltonian(spec: NetworkSpec) -> SingleParticleHamiltonian:
    M, L = spec.M, spec.bath_sites
    H = np.zeros((M + L, M + L))
    for alpha in range(M):
        H[alpha, alpha] = spec.omegas[alpha]
        site = M + spec.attach_sites[alpha] - 1
        H[alpha, site] = H[site, alpha] = spec.kappas[alpha]
    for i in range(M, M + L - 1):
        H[i, i + 1] = H[i + 1, i] = spec.J
    if spec.topology is Topology.DIMER_EDGE_COUPLED:
        H[0, 1] = H[1, 0] = spec.delta
    return SingleParticleHamiltonian(H, tuple(range(M)), spec)


class Propagator:
    """``exp(-iHz)`` from a single eigendecomposition of ``H``."""

    def __init__(self, H: SingleParticleHamiltonian | np.ndarray):
        if isinstance(H, SingleParticleHamiltonian):
            self.system_indices = H.system_indices
            H = H.matrix
        else:
            self.system_indices = None
        self.energies, self.modes = np.linalg.eigh(np.asarray(H))

    def __call__(self, z: float) -> np.ndarray:
        if z < 0:
            raise ValueError(f"propagation length must be non-negative, got {z}")
        return (self.modes * np.exp(-1j * self.energies * z)) @ self.modes.conj().T

    @cached_property
    def _system_modes(self) -> np.ndarray:
        return self.modes[list(self.system_indices), :]

    def system_block(self, z: float) -> np.ndarray:
        """System rows and columns of ``U(z)`` without forming the full propagator."""
        if self.system_indices is None:
            raise ValueError("system indices unknown for a bare matrix")
        if z < 0:
            raise ValueError(f"propagation length must be non-negative, got {z}")
        V = self._system_modes
        return (V * np.exp(-1j * self.energies * z)) @ V.conj().T


def propagator(H: SingleParticleHamiltonian | np.ndarray, z: float) -> np.ndarray:
    return Propagator(H)(z)


def system_block(U: np.ndarray, system_indices: Sequence[int]) -> np.ndarray:
    idx = list(system_indices)
    return np.asarray(U)[np.ix_(idx, idx)]


def bound_state_tail(spec: NetworkSpec, v_sys) -> dict[int, complex]:
    """Bath amplitudes forced on a candidate bound state, keyed by bath site.

    Edge-coupled dimer: no bath amplitude.  Trimer on adjacent sites: the
    eigen-equations at the outer sites ``n1`` and ``n3`` force
    ``u(n2) = -kappa_1 c_1 / J`` and nothing elsewhere.
    """
    v = np.asarray(v_sys, dtype=complex)
    if spec.topology is Topology.DIMER_EDGE_COUPLED:
        return {}
    n = spec.attach_sites
    if spec.M == 3 and n[1] - n[0] == 1 and n[2] - n[1] == 1:
        return {n[1]: -spec.kappas[0] * v[0] / spec.J}
    raise ValueError("no bound-state tail model for this geometry")


def bound_state_residual(H: SingleParticleHamiltonian, v_sys, E: float) -> float:
    """``||H v - E v||`` for ``v_sys`` completed with its forced bath tail."""
    spec = H.spec
    v_sys = np.asarray(v_sys, dtype=complex)
    if v_sys.shape != (spec.M,):
        raise ValueError(f"expected {spec.M} system amplitudes, got {v_sys.shape}")
    full = np.zeros(H.matrix.shape[0], dtype=complex)
    full[list(H.system_indices)] = v_sys / np.linalg.norm(v_sys)
    for site, amp in bound_state_tail(spec, full[: spec.M]).items():
        full[spec.M + site - 1] = amp
    full /= np.linalg.norm(full)
    return float(np.linalg.norm(H.matrix @ full - E * full))


def light_cone_ok(spec: NetworkSpec, z: float) -> bool:
    """True when a wave leaving the system cannot return from the truncation end by ``z``."""
    return spec.bath_sites - max(spec.attach_sites) >= spec.J * z
