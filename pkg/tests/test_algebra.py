"""Algebra substrate: tensor, flip, conditional expectation, Choi, duality."""

import numpy as np
import pytest

from qqsp.algebra import (
    AlgebraElement,
    State,
    SuperMap,
    basis_elements,
    certify_unital_cp,
    conditional_expectation,
    embed_supermap,
    expectation_supermap,
    flip_conjugate,
    flip_supermap,
    predual,
    supermap_tensor,
    tensor,
    trace_norm_distance,
)
from qqsp.seeds import symmetrized_embedding, transpose_embedding

from conftest import random_density, random_hermitian


# ---------------------------------------------------------------- oracles

def choi_by_hand(m: SuperMap) -> np.ndarray:
    """Independent Choi construction: explicit double loop over matrix units."""
    d_in, d_out = m.in_dim, m.out_dim
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1
            c += np.kron(e, m(e))
    return c


def expectation_by_basis_expansion(rho_phi: np.ndarray, z: np.ndarray) -> np.ndarray:
    """E_phi(z) = sum_ij phi(E_ij) B_ij with B_ij the (i, j) block of z."""
    n = rho_phi.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            phi_eij = rho_phi[j, i]  # trace(rho E_ij)
            out += phi_eij * z[i * n:(i + 1) * n, j * n:(j + 1) * n]
    return out


# ----------------------------------------------------------------- tensor

def test_tensor_unit_case():
    one2 = AlgebraElement.unit(2)
    assert np.array_equal(tensor(one2, one2).entries, np.eye(4))


def test_tensor_hand_oracle():
    # diag(2,3) (x) diag(1,0): expanding the Kronecker product by hand
    a = AlgebraElement.diagonal([2, 3])
    b = AlgebraElement.diagonal([1, 0])
    expected = np.diag([2, 0, 3, 0]).astype(complex)
    assert np.array_equal(tensor(a, b).entries, expected)
    assert tensor(a, b).algebra_kind == "diagonal"


def test_tensor_bilinear(rng):
    for _ in range(5):
        a, a2, b = (AlgebraElement(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
                    for _ in range(3))
        lhs = tensor(AlgebraElement(a.entries + a2.entries), b).entries
        rhs = tensor(a, b).entries + tensor(a2, b).entries
        assert np.abs(lhs - rhs).max() <= 1e-13


# ------------------------------------------------------------------- flip

def test_flip_on_products():
    x = AlgebraElement.diagonal([1, 0])
    y = AlgebraElement.diagonal([0, 1])
    assert np.array_equal(flip_conjugate(tensor(x, y)).entries, tensor(y, x).entries)


def test_flip_symmetric_case(rng):
    for _ in range(5):
        x = AlgebraElement(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        z = tensor(x, x)
        assert np.abs(flip_conjugate(z).entries - z.entries).max() <= 1e-13


def test_flip_involution(rng):
    for n in (2, 3):
        for _ in range(5):
            z = AlgebraElement(rng.normal(size=(n * n, n * n))
                               + 1j * rng.normal(size=(n * n, n * n)))
            twice = flip_conjugate(flip_conjugate(z)).entries
            assert np.abs(twice - z.entries).max() <= 1e-12


def test_flip_rejects_non_square_tensor_dim():
    with pytest.raises(ValueError):
        flip_conjugate(AlgebraElement(np.eye(3)))


# -------------------------------------------------- conditional expectation

def test_expectation_product_formula(rng):
    phi = State(np.diag([1, 0]).astype(complex))
    for _ in range(5):
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        z = np.kron(np.diag([2, 3]).astype(complex), b)
        assert np.abs(conditional_expectation(phi, z).entries - 2 * b).max() <= 1e-13


def test_expectation_unit_preservation(rng):
    for _ in range(3):
        phi = State(random_density(rng, 2))
        out = conditional_expectation(phi, np.eye(4)).entries
        assert np.abs(out - np.eye(2)).max() <= 1e-13


def test_expectation_matches_basis_expansion_oracle(rng):
    for _ in range(10):
        phi = State(random_density(rng, 2))
        z = random_hermitian(rng, 4)
        got = conditional_expectation(phi, z).entries
        want = expectation_by_basis_expansion(phi.rho, z)
        assert np.abs(got - want).max() <= 1e-12


def test_expectation_fixes_unaveraged_slot(rng):
    # E_phi(1 (x) x) = x for every phi, forced by the product formula at a = 1
    states = [State(random_density(rng, 2)), State(np.diag([1, 0]).astype(complex))]
    for phi in states:
        for x in basis_elements(2):
            out = conditional_expectation(phi, np.kron(np.eye(2), x)).entries
            assert np.abs(out - x).max() <= 1e-13


def test_expectation_supermap_is_unital_cp(rng):
    full_rank = State(random_density(rng, 2))
    rank_def = State(np.diag([1, 0]).astype(complex))
    for phi in (full_rank, rank_def):
        rep = certify_unital_cp(expectation_supermap(phi))
        assert rep.is_cp and rep.is_unital


# ------------------------------------------------------------ certify CP

def test_certify_constant_map():
    rep = certify_unital_cp(SuperMap.constant(State.maximally_mixed(2), 4))
    assert rep.is_cp and rep.is_unital


def test_certify_symmetrized_embedding_against_choi_oracle():
    m = symmetrized_embedding(2)
    rep = certify_unital_cp(m)
    assert rep.is_cp and rep.is_unital
    # oracle: diagonalize the explicitly assembled 8x8 Choi matrix
    eigs = np.linalg.eigvalsh(choi_by_hand(m))
    assert abs(rep.min_choi_eigenvalue - eigs.min()) <= 1e-12
    assert rep.min_choi_eigenvalue >= -1e-12


def test_certify_transpose_map_fails_cp():
    rep = certify_unital_cp(transpose_embedding(2))
    assert not rep.is_cp
    assert rep.min_choi_eigenvalue <= -0.5
    # oracle: the Choi matrix is swap (x) identity, eigenvalues +-1
    eigs = np.linalg.eigvalsh(choi_by_hand(transpose_embedding(2)))
    assert abs(eigs.min() + 1.0) <= 1e-12
    assert abs(rep.min_choi_eigenvalue + 1.0) <= 1e-12
    assert rep.is_unital


# ------------------------------------------------------------ trace norm

def test_trace_norm_coincidence(rng):
    phi = State(random_density(rng, 3))
    assert trace_norm_distance(phi, phi) == 0.0


def test_trace_norm_orthogonal_pure_states():
    phi = State.pure([1, 0])
    psi = State.pure([0, 1])
    assert abs(trace_norm_distance(phi, psi) - 2.0) <= 1e-13


def test_trace_norm_classical_l1():
    d = trace_norm_distance(State.from_weights([0.7, 0.3]),
                            State.from_weights([0.4, 0.6]))
    assert abs(d - 0.6) <= 1e-13


def test_trace_norm_dimension_mismatch():
    with pytest.raises(ValueError):
        trace_norm_distance(State.maximally_mixed(2), State.maximally_mixed(3))


def test_trace_norm_is_a_metric_on_samples(rng):
    states = [State(random_density(rng, 2)) for _ in range(6)]
    for a in states:
        for b in states:
            dab = trace_norm_distance(a, b)
            assert 0.0 <= dab <= 2.0
            assert abs(dab - trace_norm_distance(b, a)) == 0.0
            for c in states:
                assert dab <= trace_norm_distance(a, c) + trace_norm_distance(c, b) + 1e-12


# --------------------------------------------------------------- predual

def test_predual_constant_map(rng):
    omega = State.maximally_mixed(2)
    dual = predual(SuperMap.constant(omega, 4))
    for _ in range(5):
        rho = random_density(rng, 4)
        assert np.abs(dual(rho) - omega.rho).max() <= 1e-13


def test_predual_duality_oracle(rng):
    # direct two-sided evaluation on 20 random (rho, x) pairs
    m = SuperMap(2, 4, 0.5 * SuperMap.constant(State.maximally_mixed(2), 4).matrix
                 + 0.5 * symmetrized_embedding(2).matrix)
    dual = predual(m)
    for _ in range(20):
        rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        lhs = np.trace(dual(rho) @ x)
        rhs = np.trace(rho @ m(x))
        assert abs(lhs - rhs) <= 1e-12


def test_predual_of_unital_map_preserves_trace(rng):
    dual = predual(symmetrized_embedding(2))
    for _ in range(5):
        rho = random_density(rng, 4)
        assert abs(np.trace(dual(rho)) - 1.0) <= 1e-12


def test_duality_on_spanning_set(rng):
    maps = [symmetrized_embedding(2),
            SuperMap.constant(State.maximally_mixed(2), 4),
            expectation_supermap(State(random_density(rng, 2))),
            embed_supermap(2)]
    for m in maps:
        dual = predual(m)
        for rho in basis_elements(m.out_dim):
            for x in basis_elements(m.in_dim):
                lhs = np.trace(dual(rho) @ x)
                rhs = np.trace(rho @ m(x))
                assert abs(lhs - rhs) <= 1e-12


# ------------------------------------------------------- supermap algebra

def test_supermap_tensor_on_products(rng):
    m1 = SuperMap.from_function(lambda v: v.T, 2, 2)
    m2 = expectation_supermap(State(random_density(rng, 2))) @ symmetrized_embedding(2)
    mt = supermap_tensor(m1, m2)
    for _ in range(5):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.abs(mt(np.kron(x, y)) - np.kron(m1(x), m2(y))).max() <= 1e-12


def test_flip_supermap_matches_elementwise(rng):
    f = flip_supermap(2)
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.abs(f(z) - flip_conjugate(AlgebraElement(z)).entries).max() <= 1e-13


def test_supermap_shape_validation():
    with pytest.raises(ValueError):
        SuperMap(2, 4, np.eye(4))
    with pytest.raises(ValueError):
        SuperMap.identity(2)(np.eye(3))


# ------------------------------------------------------------- data types

def test_diagonal_element_rejects_offdiagonal():
    with pytest.raises(ValueError):
        AlgebraElement(np.ones((2, 2)), "diagonal")


def test_state_validation():
    with pytest.raises(ValueError):
        State(np.array([[1.0, 1.0], [0.0, 0.0]]))  # not hermitian
    with pytest.raises(ValueError):
        State(np.diag([1.5, -0.5]).astype(complex))  # negative eigenvalue
    with pytest.raises(ValueError):
        State(np.diag([0.6, 0.6]).astype(complex))  # trace != 1
    # tiny skew parts are symmetrized away
    rho = np.diag([0.5, 0.5]).astype(complex)
    rho[0, 1] = 1e-14j
    s = State(rho)
    assert np.abs(s.rho - s.rho.conj().T).max() == 0.0
