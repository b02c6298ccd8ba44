"""Dense linear algebra for superoperators on small matrix spaces.

Vectorization is column-stacking throughout: ``vec(A)[i + n*j] = A[i, j]``.
A linear map from n x n to m x m matrices is stored as the (m^2, n^2)
matrix acting on vectorizations. Dimensions stay small (n <= 16), so every
routine favors clarity over asymptotic speed.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def vec(a: Array) -> Array:
    """Column-stack a matrix into a vector."""
    return np.asarray(a, dtype=complex).reshape(-1, order="F")


def unvec(v: Array, n: int) -> Array:
    """Inverse of :func:`vec` for an n x n matrix."""
    return np.asarray(v, dtype=complex).reshape(n, n, order="F")


def dagger(a: Array) -> Array:
    return np.conj(np.asarray(a)).T


def matrix_unit(n: int, i: int, j: int) -> Array:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def swap_matrix(n: int) -> Array:
    """Permutation W on C^n (x) C^n with W(e_a (x) e_b) = e_b (x) e_a.

    The same permutation realizes vec(A^T) = W vec(A) for n x n matrices,
    so it doubles as the commutation matrix used when forming preduals.
    """
    w = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            w[b * n + a, a * n + b] = 1.0
    return w


def ptrace_first(z: Array, n_first: int, n_second: int) -> Array:
    """Partial trace over the first tensor factor of M_{n1} (x) M_{n2}."""
    z4 = np.asarray(z, dtype=complex).reshape(n_first, n_second, n_first, n_second)
    return np.einsum("ikil->kl", z4)


def ptrace_second(z: Array, n_first: int, n_second: int) -> Array:
    """Partial trace over the second tensor factor."""
    z4 = np.asarray(z, dtype=complex).reshape(n_first, n_second, n_first, n_second)
    return np.einsum("ikjk->ij", z4)


def apply_supermatrix(mat: Array, x: Array, out_dim: int) -> Array:
    """Apply a vectorization-form map to a matrix."""
    return unvec(mat @ vec(x), out_dim)


def supermatrix_from_function(f, in_dim: int, out_dim: int) -> Array:
    """Build the vectorization matrix of a linear map given as a function."""
    mat = np.zeros((out_dim * out_dim, in_dim * in_dim), dtype=complex)
    for q in range(in_dim * in_dim):
        i, j = q % in_dim, q // in_dim
        mat[:, q] = vec(f(matrix_unit(in_dim, i, j)))
    return mat


def supermatrix_tensor(m1: Array, in1: int, out1: int,
                       m2: Array, in2: int, out2: int) -> Array:
    """Vectorization matrix of the tensor product of two maps.

    Acts on M_{in1*in2} with the Kronecker index convention (first factor
    major), sending E_{i1 j1} (x) E_{i2 j2} to Phi1(E_{i1 j1}) (x) Phi2(E_{i2 j2}).
    """
    in_dim = in1 * in2
    out_dim = out1 * out2
    mat = np.zeros((out_dim * out_dim, in_dim * in_dim), dtype=complex)
    for q in range(in_dim * in_dim):
        r, s = q % in_dim, q // in_dim
        i1, i2 = divmod(r, in2)
        j1, j2 = divmod(s, in2)
        y1 = apply_supermatrix(m1, matrix_unit(in1, i1, j1), out1)
        y2 = apply_supermatrix(m2, matrix_unit(in2, i2, j2), out2)
        mat[:, q] = vec(np.kron(y1, y2))
    return mat


def choi_matrix(mat: Array, in_dim: int, out_dim: int) -> Array:
    """Choi matrix sum_ij E_ij (x) Phi(E_ij) of a map in vectorization form."""
    c = np.zeros((in_dim * out_dim, in_dim * out_dim), dtype=complex)
    for i in range(in_dim):
        for j in range(in_dim):
            block = apply_supermatrix(mat, matrix_unit(in_dim, i, j), out_dim)
            c[i * out_dim:(i + 1) * out_dim, j * out_dim:(j + 1) * out_dim] = block
    return c


def predual_matrix(mat: Array, in_dim: int, out_dim: int) -> Array:
    """Vectorization matrix of the bilinear adjoint.

    Satisfies trace(Phi_*(rho) x) = trace(rho Phi(x)) for all rho, x
    (no conjugation; on hermitian arguments this is the usual predual).
    """
    t_in = swap_matrix(in_dim)
    t_out = swap_matrix(out_dim)
    return t_in @ mat.T @ t_out


def trace_norm(a: Array) -> float:
    """Sum of singular values; uses eigvalsh when the input is hermitian."""
    a = np.asarray(a, dtype=complex)
    if np.linalg.norm(a - dagger(a)) <= 1e-12 * max(1.0, np.linalg.norm(a)):
        return float(np.abs(np.linalg.eigvalsh((a + dagger(a)) / 2)).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def operator_norm(a: Array) -> float:
    """Largest singular value (operator norm on Frobenius vectorizations)."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(np.asarray(a, dtype=complex), ord=2))


def hermiticity_defect(a: Array) -> float:
    return float(np.linalg.norm(a - dagger(a)))
