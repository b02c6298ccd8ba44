"""Matrix-algebra substrate: elements, states, superoperators, duality.

Conventions, fixed once for the whole package:

* vectorization is column-stacking (see :mod:`qqsp.linalg`);
* tensor factors are ordered "first (x) second", and the conditional
  expectation averages the FIRST factor: E_phi(a (x) b) = phi(a) b;
* consequently the embedding of M into M (x) M that the expectation leaves
  untouched is x -> 1 (x) x (:func:`embed_supermap`). Texts that average
  the second factor state the same identities with the slots exchanged.

In finite dimension every linear functional is normal, so the predual and
the dual coincide; states are plain density matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    Array,
    apply_supermatrix,
    choi_matrix,
    dagger,
    hermiticity_defect,
    matrix_unit,
    operator_norm,
    predual_matrix,
    ptrace_first,
    supermatrix_from_function,
    swap_matrix,
    trace_norm,
)

DEFAULT_CP_TOL = 1e-9
DEFAULT_UNITAL_TOL = 1e-10
HERMITICITY_TOL = 1e-12


def _frozen(a: Array) -> Array:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class AlgebraElement:
    """A complex square matrix over a full or diagonal matrix algebra."""

    entries: Array
    algebra_kind: str = "full"

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"algebra element must be square, got shape {m.shape}")
        if self.algebra_kind not in ("full", "diagonal"):
            raise ValueError(f"unknown algebra kind {self.algebra_kind!r}")
        if self.algebra_kind == "diagonal":
            off = m - np.diag(np.diag(m))
            if np.any(off != 0):
                raise ValueError("diagonal algebra element has off-diagonal entries")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def unit(cls, n: int, algebra_kind: str = "full") -> "AlgebraElement":
        return cls(np.eye(n, dtype=complex), algebra_kind)

    @classmethod
    def diagonal(cls, values) -> "AlgebraElement":
        return cls(np.diag(np.asarray(values, dtype=complex)), "diagonal")

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return hermiticity_defect(self.entries) <= tol


def as_matrix(x) -> Array:
    """Accept an AlgebraElement or a bare ndarray."""
    if isinstance(x, AlgebraElement):
        return x.entries
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True)
class State:
    """A density matrix: hermitian, positive semidefinite, unit trace.

    Harmless skew parts (below 1e-12) are symmetrized away; anything worse
    is rejected rather than silently repaired.
    """

    rho: Array

    def __post_init__(self):
        m = np.asarray(self.rho, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        skew = hermiticity_defect(m)
        if skew > HERMITICITY_TOL * max(1.0, float(np.linalg.norm(m))):
            raise ValueError(f"density matrix is not hermitian (defect {skew:.2e})")
        m = (m + dagger(m)) / 2
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace {tr!r} is not 1")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -1e-12:
            raise ValueError(f"density matrix has eigenvalue {lo:.2e} < -1e-12")
        object.__setattr__(self, "rho", _frozen(m))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def maximally_mixed(cls, n: int) -> "State":
        return cls(np.eye(n, dtype=complex) / n)

    @classmethod
    def pure(cls, vector) -> "State":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_weights(cls, weights) -> "State":
        w = np.asarray(weights, dtype=float)
        return cls(np.diag(w).astype(complex))

    def expect(self, x) -> complex:
        """phi(x) = trace(rho x)."""
        return complex(np.trace(self.rho @ as_matrix(x)))

    def diagonal_weights(self) -> Array:
        return np.real(np.diag(self.rho)).copy()


@dataclass(frozen=True)
class SuperMap:
    """A linear map between matrix spaces in vectorization form.

    ``matrix`` has shape (out_dim^2, in_dim^2) and acts on column-stacked
    vectorizations.
    """

    in_dim: int
    out_dim: int
    matrix: Array

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        want = (self.out_dim ** 2, self.in_dim ** 2)
        if m.shape != want:
            raise ValueError(f"supermap matrix shape {m.shape} != {want}")
        object.__setattr__(self, "matrix", _frozen(m))

    def __call__(self, x) -> Array:
        x = as_matrix(x)
        if x.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"input shape {x.shape} does not match in_dim {self.in_dim}")
        return apply_supermatrix(self.matrix, x, self.out_dim)

    def compose(self, other: "SuperMap") -> "SuperMap":
        """self after other."""
        if other.out_dim != self.in_dim:
            raise ValueError("dimension mismatch in composition")
        return SuperMap(other.in_dim, self.out_dim, self.matrix @ other.matrix)

    def __matmul__(self, other: "SuperMap") -> "SuperMap":
        return self.compose(other)

    @classmethod
    def identity(cls, n: int) -> "SuperMap":
        return cls(n, n, np.eye(n * n, dtype=complex))

    @classmethod
    def from_function(cls, f, in_dim: int, out_dim: int) -> "SuperMap":
        return cls(in_dim, out_dim, supermatrix_from_function(f, in_dim, out_dim))

    @classmethod
    def constant(cls, omega: State, out_dim: int) -> "SuperMap":
        """x -> omega(x) * 1 on the out_dim algebra."""
        one = np.eye(out_dim, dtype=complex)
        return cls.from_function(lambda x: omega.expect(x) * one, omega.dim, out_dim)


def predual(m: SuperMap) -> SuperMap:
    """Map on densities with trace(predual(m)(rho) x) = trace(rho m(x)).

    If m is unital and completely positive the predual carries states to
    states (it is trace preserving and positive).
    """
    return SuperMap(m.out_dim, m.in_dim, predual_matrix(m.matrix, m.in_dim, m.out_dim))


def supermap_tensor(m1: SuperMap, m2: SuperMap) -> SuperMap:
    from .linalg import supermatrix_tensor

    mat = supermatrix_tensor(m1.matrix, m1.in_dim, m1.out_dim,
                             m2.matrix, m2.in_dim, m2.out_dim)
    return SuperMap(m1.in_dim * m2.in_dim, m1.out_dim * m2.out_dim, mat)


def tensor(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Kronecker product of algebra elements; bilinear in both arguments."""
    kind = "diagonal" if (a.algebra_kind == "diagonal" and b.algebra_kind == "diagonal") else "full"
    return AlgebraElement(np.kron(a.entries, b.entries), kind)


def flip_conjugate(z) -> AlgebraElement:
    """Exchange tensor factors: the involution with U(x (x) y) = y (x) x."""
    m = as_matrix(z)
    d = m.shape[0]
    n = int(round(np.sqrt(d)))
    if n * n != d:
        raise ValueError(f"flip needs a matrix on M_n (x) M_n, got side {d}")
    w = swap_matrix(n)
    kind = z.algebra_kind if isinstance(z, AlgebraElement) else "full"
    return AlgebraElement(w @ m @ w, kind)


def flip_supermap(n: int) -> SuperMap:
    """The flip as a superoperator on M_{n^2}."""
    w = swap_matrix(n)
    return SuperMap(n * n, n * n, np.kron(w, w))


def conditional_expectation(phi: State, z) -> AlgebraElement:
    """Slice map averaging the first factor: E_phi(a (x) b) = phi(a) b.

    Realized as the partial trace of (rho_phi (x) 1) z over the first
    factor, which agrees with the product formula and extends linearly.
    """
    m = as_matrix(z)
    n = phi.dim
    if m.shape != (n * n, n * n):
        raise ValueError(f"expected an element of M_{n} (x) M_{n}, got side {m.shape[0]}")
    lifted = np.kron(phi.rho, np.eye(n, dtype=complex)) @ m
    return AlgebraElement(ptrace_first(lifted, n, n))


def expectation_supermap(phi: State) -> SuperMap:
    """The conditional expectation E_phi as a SuperMap from M_{n^2} to M_n."""
    n = phi.dim
    return SuperMap.from_function(lambda z: conditional_expectation(phi, z).entries,
                                  n * n, n)


def embed_supermap(n: int) -> SuperMap:
    """The unital embedding x -> 1 (x) x left fixed by every E_phi.

    This is the reconstruction slot: for marginal processes built from a
    process lattice, applying them after this embedding recovers the
    lattice maps.
    """
    one = np.eye(n, dtype=complex)
    return SuperMap.from_function(lambda x: np.kron(one, x), n, n * n)


def embed_averaged_supermap(n: int) -> SuperMap:
    """The complementary embedding x -> x (x) 1 (the slot E_phi averages)."""
    one = np.eye(n, dtype=complex)
    return SuperMap.from_function(lambda x: np.kron(x, one), n, n * n)


@dataclass(frozen=True)
class ChoiReport:
    """Certificate for unitality and complete positivity of a SuperMap.

    ``min_choi_eigenvalue`` is taken on the hermitian part of the Choi
    matrix; ``hermiticity_residual`` records how far the Choi matrix is
    from hermitian (nonzero only for maps that are not hermiticity
    preserving, which can never be CP).
    """

    is_unital: bool
    min_choi_eigenvalue: float
    unitality_residual: float
    is_cp: bool
    hermiticity_residual: float = 0.0


def certify_unital_cp(m: SuperMap,
                      cp_tolerance: float = DEFAULT_CP_TOL,
                      unital_tolerance: float = DEFAULT_UNITAL_TOL) -> ChoiReport:
    """Certify Def-style unital complete positivity via the Choi matrix."""
    c = choi_matrix(m.matrix, m.in_dim, m.out_dim)
    herm = hermiticity_defect(c)
    c_h = (c + dagger(c)) / 2
    min_eig = float(np.linalg.eigvalsh(c_h).min())
    one_in = np.eye(m.in_dim, dtype=complex)
    one_out = np.eye(m.out_dim, dtype=complex)
    unital_res = float(np.linalg.norm(m(one_in) - one_out))
    return ChoiReport(
        is_unital=unital_res <= unital_tolerance,
        min_choi_eigenvalue=min_eig,
        unitality_residual=unital_res,
        is_cp=(min_eig >= -cp_tolerance and herm <= cp_tolerance),
        hermiticity_residual=herm,
    )


def flip_symmetry_residual(m: SuperMap) -> float:
    """Operator-norm residual of U Phi = Phi for a map into M_n (x) M_n."""
    n = int(round(np.sqrt(m.out_dim)))
    if n * n != m.out_dim:
        raise ValueError("flip symmetry needs a map into a doubled algebra")
    f = flip_supermap(n)
    return operator_norm(f.matrix @ m.matrix - m.matrix)


def trace_norm_distance(phi: State, psi: State) -> float:
    """Trace-norm distance between two states; lies in [0, 2]."""
    if phi.dim != psi.dim:
        raise ValueError(f"dimension mismatch: {phi.dim} vs {psi.dim}")
    return trace_norm(phi.rho - psi.rho)


def basis_elements(n: int):
    """The matrix units E_ij of M_n, a spanning set for identity checks."""
    return [matrix_unit(n, i, j) for i in range(n) for j in range(n)]


def identity_residual_on_basis(m1: SuperMap, m2: SuperMap) -> float:
    """Max Frobenius gap of two maps over the matrix-unit basis."""
    if (m1.in_dim, m1.out_dim) != (m2.in_dim, m2.out_dim):
        raise ValueError("maps must share dimensions")
    worst = 0.0
    for x in basis_elements(m1.in_dim):
        worst = max(worst, float(np.linalg.norm(m1(x) - m2(x))))
    return worst
