"""Bosonic Fock bases, N-photon states and the permanent lift of mode matrices.

Occupation vectors are ordered reverse-lexicographically, so for two modes and
two photons the basis reads ``(2, 0), (1, 1), (0, 2)``.  A basis is either a
single photon-number sector or the stack of sectors ``0..N`` (vacuum first),
the latter being what photon loss needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_BASIS_CAP = 10**6
DEFAULT_PERMANENT_CAP = 20


def _compositions(modes: int, photons: int) -> Iterator[tuple[int, ...]]:
    if modes == 1:
        yield (photons,)
        return
    for first in range(photons, -1, -1):
        for rest in _compositions(modes - 1, photons - first):
            yield (first,) + rest


def sector_size(M: int, N: int) -> int:
    return math.comb(N + M - 1, N)


@dataclass(frozen=True)
class FockBasis:
    """Ordered occupation vectors over ``M`` modes.

    ``N`` is the photon number of the sector, or the highest sector when
    ``stacked`` is true.
    """

    M: int
    N: int
    states: tuple[tuple[int, ...], ...]
    stacked: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})
        if len(self._index) != len(self.states):
            raise ValueError("duplicate occupation vectors in basis")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, occupation: Sequence[int]) -> int:
        try:
            return self._index[tuple(int(n) for n in occupation)]
        except KeyError:
            raise KeyError(f"occupation {tuple(occupation)} not in basis") from None

    def __contains__(self, occupation) -> bool:
        return tuple(occupation) in self._index

    def sector_indices(self, n: int) -> np.ndarray:
        """Positions of the states holding exactly ``n`` photons."""
        return np.array([i for i, s in enumerate(self.states) if sum(s) == n], dtype=int)


def enumerate_basis(M: int, N: int, cap: int = DEFAULT_BASIS_CAP) -> FockBasis:
    """All occupation vectors of ``N`` photons in ``M`` modes."""
    if M < 1:
        raise ValueError(f"need at least one mode, got M={M}")
    if N < 0:
        raise ValueError(f"photon number must be non-negative, got N={N}")
    size = sector_size(M, N)
    if size > cap:
        raise ValueError(f"sector has {size} states, above the cap of {cap}")
    return FockBasis(M, N, tuple(_compositions(M, N)))


def enumerate_stacked(M: int, N: int, cap: int = DEFAULT_BASIS_CAP) -> FockBasis:
    """Direct sum of the sectors ``0..N``, lowest photon number first."""
    if M < 1 or N < 0:
        raise ValueError(f"invalid sizes M={M}, N={N}")
    size = sum(sector_size(M, n) for n in range(N + 1))
    if size > cap:
        raise ValueError(f"stacked space has {size} states, above the cap of {cap}")
    states = tuple(s for n in range(N + 1) for s in _compositions(M, n))
    return FockBasis(M, N, states, stacked=True)


@dataclass(frozen=True)
class PureState:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise ValueError(
                f"expected {self.basis.size} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = 1e-12) -> bool:
        return abs(self.norm - 1.0) < atol

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.index(occupation)])

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.basis.size
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= atol)

    def normalized(self) -> "DensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a density matrix with non-positive trace")
        return DensityMatrix(self.basis, self.matrix / tr)

    def sector(self, n: int) -> "DensityMatrix":
        """Unnormalized block of a stacked matrix restricted to ``n`` photons."""
        if not self.basis.stacked:
            if n != self.basis.N:
                raise ValueError(f"single-sector basis holds N={self.basis.N}, not {n}")
            return self
        idx = self.basis.sector_indices(n)
        sub = enumerate_basis(self.basis.M, n)
        # stacked sectors reuse the single-sector ordering
        return DensityMatrix(sub, self.matrix[np.ix_(idx, idx)])

    def embed(self, stacked: FockBasis) -> "DensityMatrix":
        """Place a single-sector matrix inside a stacked basis."""
        if self.basis.stacked:
            raise ValueError("matrix is already over a stacked basis")
        if not stacked.stacked or stacked.M != self.basis.M or stacked.N < self.basis.N:
            raise ValueError("target basis does not contain this sector")
        idx = stacked.sector_indices(self.basis.N)
        out = np.zeros((stacked.size, stacked.size), dtype=complex)
        out[np.ix_(idx, idx)] = self.matrix
        return DensityMatrix(stacked, out)


def _factorial_norm(occupation: Sequence[int]) -> float:
    return math.prod(math.factorial(n) for n in occupation)


def mode_power_state(coeffs, N: int, basis: FockBasis | None = None,
                     atol: float = 1e-10) -> PureState:
    """The state ``(sum_a c_a a_a^dag)^N |0> / sqrt(N!)``.

    ``coeffs`` must be normalized so that the dressed mode is a proper boson.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1:
        raise ValueError("coefficients must be a vector")
    if abs(np.linalg.norm(c) - 1.0) > atol:
        raise ValueError(f"coefficients have norm {np.linalg.norm(c):.6g}, expected 1")
    if basis is None:
        basis = enumerate_basis(len(c), N)
    elif basis.M != len(c) or basis.N != N or basis.stacked:
        raise ValueError("basis does not match the coefficient vector and photon number")
    nfact = math.factorial(N)
    amps = np.array(
        [
            math.sqrt(nfact / _factorial_norm(occ)) * np.prod(c ** np.array(occ))
            for occ in basis.states
        ],
        dtype=complex,
    )
    state = PureState(basis, amps)
    # normalized by construction; renormalize away rounding
    return PureState(basis, amps / state.norm)


def fock_state(occupation: Sequence[int], basis: FockBasis | None = None) -> PureState:
    occupation = tuple(int(n) for n in occupation)
    if basis is None:
        basis = enumerate_basis(len(occupation), sum(occupation))
    amps = np.zeros(basis.size, dtype=complex)
    amps[basis.index(occupation)] = 1.0
    return PureState(basis, amps)


def permanent(matrix, cap: int = DEFAULT_PERMANENT_CAP) -> complex:
    """Permanent by Ryser's formula, visiting column subsets in Gray-code order."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > cap:
        raise ValueError(f"{n}x{n} permanent exceeds the size cap of {cap}")

    row_sums = np.zeros(n, dtype=complex)
    chosen = np.zeros(n, dtype=bool)
    total = 0.0 + 0.0j
    size = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if chosen[j]:
            row_sums -= a[:, j]
            size -= 1
        else:
            row_sums += a[:, j]
            size += 1
        chosen[j] = not chosen[j]
        term = np.prod(row_sums)
        total += -term if size & 1 else term
    return complex(total if n % 2 == 0 else -total)


def _mode_list(occupation: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(occupation)), occupation)


def lift_matrix(A, basis: FockBasis, cap: int = DEFAULT_PERMANENT_CAP) -> np.ndarray:
    """Action of the single-particle map ``A`` on the Fock basis.

    Entry ``<m|L(A)|n> = per(A[m, n]) / sqrt(prod m_i! prod n_j!)`` where
    ``A[m, n]`` repeats row i ``m_i`` times and column j ``n_j`` times, i.e.
    ``a_j^dag -> sum_i A_ij a_i^dag``.  Stacked bases give a block-diagonal
    result, one block per sector.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (basis.M, basis.M):
        raise ValueError(f"expected a {basis.M}x{basis.M} matrix, got {A.shape}")
    if basis.N > cap:
        raise ValueError(f"{basis.N} photons exceed the permanent size cap of {cap}")

    modes = [_mode_list(s) for s in basis.states]
    norms = [math.sqrt(_factorial_norm(s)) for s in basis.states]
    totals = [sum(s) for s in basis.states]
    out = np.zeros((basis.size, basis.size), dtype=complex)
    for i, (rows, ni) in enumerate(zip(modes, norms)):
        for j, (cols, nj) in enumerate(zip(modes, norms)):
            if totals[i] != totals[j]:
                continue
            out[i, j] = permanent(A[np.ix_(rows, cols)], cap) / (ni * nj)
    return out


def mix(states: Iterable[tuple[float, PureState]], atol: float = 1e-12) -> DensityMatrix:
    """Incoherent mixture ``sum_v p_v |psi_v><psi_v|``."""
    states = list(states)
    if not states:
        raise ValueError("mixture needs at least one state")
    basis = states[0][1].basis
    weights = np.array([w for w, _ in states], dtype=float)
    if np.any(weights < 0):
        raise ValueError("mixture weights must be non-negative")
    if abs(weights.sum() - 1.0) > atol:
        raise ValueError(f"mixture weights sum to {weights.sum():.15g}, expected 1")
    rho = np.zeros((basis.size, basis.size), dtype=complex)
    for w, psi in states:
        if psi.basis != basis:
            raise ValueError("all states in a mixture must share one basis")
        rho += w * np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityMatrix(basis, rho)


def annihilation_operators(basis: FockBasis) -> list[np.ndarray]:
    """Dense ``a_alpha`` matrices; only meaningful on stacked bases."""
    ops = []
    for mode in range(basis.M):
        a = np.zeros((basis.size, basis.size), dtype=complex)
        for j, occ in enumerate(basis.states):
            if occ[mode] == 0:
                continue
            lowered = list(occ)
            lowered[mode] -= 1
            if tuple(lowered) in basis:
                a[basis.index(lowered), j] = math.sqrt(occ[mode])
        ops.append(a)
    return ops


def second_quantize(A, basis: FockBasis) -> np.ndarray:
    """``sum_ij A_ij a_i^dag a_j`` on ``basis``, built from ladder operators."""
    A = np.asarray(A, dtype=complex)
    stacked = basis if basis.stacked else enumerate_stacked(basis.M, basis.N)
    ops = annihilation_operators(stacked)
    H = sum(
        A[i, j] * ops[i].conj().T @ ops[j]
        for i in range(basis.M)
        for j in range(basis.M)
        if A[i, j] != 0
    )
    if isinstance(H, int):
        H = np.zeros((stacked.size, stacked.size), dtype=complex)
    if basis.stacked:
        return H
    idx = stacked.sector_indices(basis.N)
    return H[np.ix_(idx, idx)]
