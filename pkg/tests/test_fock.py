import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from darkfilter.fock import (
    enumerate_basis,
    enumerate_stacked,
    fock_state,
    lift_matrix,
    mix,
    mode_power_state,
    permanent,
)


def naive_permanent(a):
    n = a.shape[0]
    return sum(
        math.prod(a[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))
    ) if n else 1.0


def polynomial_lift(A, basis):
    """Oracle: substitute a_j^dag -> sum_i A_ij x_i and expand symbolically."""
    xs = sympy.symbols(f"x0:{basis.M}")
    Asym = sympy.Matrix(A.tolist())
    out = np.zeros((basis.size, basis.size), dtype=complex)
    for col, n in enumerate(basis.states):
        expr = sympy.Integer(1)
        for j, nj in enumerate(n):
            expr *= sum(Asym[i, j] * xs[i] for i in range(basis.M)) ** nj
        poly = sympy.Poly(sympy.expand(expr), *xs)
        norm_in = math.sqrt(math.prod(math.factorial(k) for k in n))
        for row, m in enumerate(basis.states):
            coeff = complex(poly.coeff_monomial(math.prod(x**k for x, k in zip(xs, m))))
            out[row, col] = coeff * math.sqrt(math.prod(math.factorial(k) for k in m)) / norm_in
    return out


def test_basis_examples():
    assert enumerate_basis(2, 2).states == ((2, 0), (1, 1), (0, 2))
    assert enumerate_basis(3, 1).size == 3
    assert enumerate_basis(3, 2).size == 6


@given(st.integers(1, 5), st.integers(0, 5))
def test_basis_size_and_uniqueness(M, N):
    basis = enumerate_basis(M, N)
    assert basis.size == math.comb(N + M - 1, N)
    assert len(set(basis.states)) == basis.size
    assert all(sum(s) == N for s in basis.states)
    assert list(basis.states) == sorted(basis.states, reverse=True)


def test_basis_cap_and_bad_sizes():
    with pytest.raises(ValueError):
        enumerate_basis(10, 10, cap=1000)
    with pytest.raises(ValueError):
        enumerate_basis(0, 1)
    with pytest.raises(ValueError):
        enumerate_basis(2, -1)


def test_stacked_basis_order():
    b = enumerate_stacked(2, 2)
    assert b.states == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert list(b.sector_indices(1)) == [1, 2]


def test_permanent_examples():
    assert permanent([[1]]) == 1
    a, b, c, d = 2 + 1j, -0.5, 3j, 0.25
    assert permanent([[a, b], [c, d]]) == pytest.approx(a * d + b * c, abs=1e-14)
    assert permanent(np.ones((3, 3))) == pytest.approx(6)
    assert permanent(np.zeros((0, 0))) == 1


def test_permanent_cap():
    with pytest.raises(ValueError):
        permanent(np.ones((5, 5)), cap=4)
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ryser_matches_permutation_sum(n, rng):
    for _ in range(5):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        assert abs(permanent(a) - naive_permanent(a)) < 1e-12


def test_mode_power_state_examples():
    psi = mode_power_state(np.array([1, -1]) / np.sqrt(2), 2)
    assert psi.amplitude((2, 0)) == pytest.approx(0.5)
    assert psi.amplitude((0, 2)) == pytest.approx(0.5)
    assert psi.amplitude((1, 1)) == pytest.approx(-1 / np.sqrt(2))

    psi = mode_power_state(np.array([1, -np.sqrt(2), 1]) / 2, 1)
    assert np.allclose(psi.amplitudes, [0.5, -np.sqrt(2) / 2, 0.5])

    for N in range(4):
        psi = mode_power_state([1, 0, 0], N)
        assert psi.amplitude((N, 0, 0)) == pytest.approx(1)


def test_mode_power_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        mode_power_state([1, 1], 2)


def test_lift_identity_and_single_photon(rng):
    for M, N in [(2, 2), (3, 2), (3, 3)]:
        basis = enumerate_basis(M, N)
        assert np.allclose(lift_matrix(np.eye(M), basis), np.eye(basis.size))
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(lift_matrix(A, enumerate_basis(2, 1)), A)


def test_lift_two_photon_entries():
    a, b, c, d = 0.3 + 0.1j, -0.7j, 1.1, 0.4 - 0.2j
    A = np.array([[a, b], [c, d]])
    basis = enumerate_basis(2, 2)
    L = lift_matrix(A, basis)
    i11, i20 = basis.index((1, 1)), basis.index((2, 0))
    assert L[i11, i20] == pytest.approx(np.sqrt(2) * a * c, abs=1e-14)
    assert L[i11, i11] == pytest.approx(a * d + b * c, abs=1e-14)
    assert np.allclose(L, polynomial_lift(A, basis), atol=1e-12)


@pytest.mark.parametrize("M,N", [(2, 3), (3, 2)])
def test_lift_matches_polynomial_expansion(M, N, rng):
    A = np.round(rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)), 3)
    basis = enumerate_basis(M, N)
    assert np.allclose(lift_matrix(A, basis), polynomial_lift(A, basis), atol=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_lift_is_homomorphism(N, rng):
    basis = enumerate_basis(3, N)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    lhs = lift_matrix(A @ B, basis)
    rhs = lift_matrix(A, basis) @ lift_matrix(B, basis)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_lift_preserves_unitarity(M, N, seed):
    U = unitary_group.rvs(M, random_state=seed) if M > 1 else np.array([[np.exp(1j * seed)]])
    L = lift_matrix(U, enumerate_basis(M, N))
    assert np.max(np.abs(L @ L.conj().T - np.eye(L.shape[0]))) < 1e-9


def test_mode_power_state_equals_lifted_fock(rng):
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    c /= np.linalg.norm(c)
    # complete c to a unitary whose first column is c
    Q, R = np.linalg.qr(np.column_stack([c, rng.normal(size=(3, 2))]))
    Q[:, 0] *= R[0, 0] / abs(R[0, 0])
    assert np.allclose(Q[:, 0], c)
    for N in (1, 2, 3):
        basis = enumerate_basis(3, N)
        lifted = lift_matrix(Q, basis) @ fock_state((N, 0, 0), basis).amplitudes
        assert np.allclose(lifted, mode_power_state(c, N, basis).amplitudes, atol=1e-12)


def overlap_purity(p, overlap_sq):
    return p**2 + (1 - p) ** 2 + 2 * p * (1 - p) * overlap_sq


def test_mix_fig1_input():
    psi_d = mode_power_state(np.array([1, -1]) / np.sqrt(2), 2)
    psi_1 = fock_state((2, 0))
    overlap_sq = abs(np.vdot(psi_1.amplitudes, psi_d.amplitudes)) ** 2
    assert overlap_sq == pytest.approx(0.25)
    rho = mix([(0.6, psi_1), (0.4, psi_d)])
    assert rho.trace == pytest.approx(1, abs=1e-14)
    assert rho.is_hermitian()
    assert np.trace(rho.matrix @ rho.matrix).real == pytest.approx(overlap_purity(0.6, overlap_sq))
    assert overlap_purity(0.6, 0.25) == pytest.approx(0.64)


def test_mix_fig2_input():
    psi_d = mode_power_state(np.array([1, -np.sqrt(2), 1]) / 2, 1)
    rho = mix([(0.6, fock_state((1, 0, 0))), (0.4, psi_d)])
    assert np.trace(rho.matrix @ rho.matrix).real == pytest.approx(0.64, abs=1e-12)


def test_mix_single_state_and_errors():
    psi = fock_state((1, 1))
    rho = mix([(1.0, psi)])
    assert np.trace(rho.matrix @ rho.matrix).real == pytest.approx(1)
    with pytest.raises(ValueError):
        mix([(0.5, psi), (0.4, fock_state((2, 0)))])
    with pytest.raises(ValueError):
        mix([(0.5, psi), (0.5, fock_state((1, 0, 1)))])
    with pytest.raises(ValueError):
        mix([(-0.1, psi), (1.1, psi)])


def test_density_matrix_embed_and_sector():
    rho = fock_state((1, 1)).projector()
    stacked = enumerate_stacked(2, 2)
    big = rho.embed(stacked)
    assert big.trace == pytest.approx(1)
    back = big.sector(2)
    assert back.basis == rho.basis
    assert np.allclose(back.matrix, rho.matrix)
