"""Dense symmetric linear algebra: Cholesky factorization, triangular
solves/inversion, and symmetric eigendecomposition.

Symmetric and lower-triangular matrices are stored as packed lower
triangles (row-major, d(d+1)/2 doubles), which halves memory at large d
and is the layout persisted in model files.  Computation expands to dense
arrays internally so the hot loops run in BLAS.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    ZeroDiagonal,
)

__all__ = [
    "SymMatrix",
    "LowerTriangular",
    "Spectrum",
    "cholesky_factor",
    "solve_lower",
    "invert_lower",
    "sym_eig",
]


def packed_size(d: int) -> int:
    return d * (d + 1) // 2


def _pack(dense: np.ndarray) -> np.ndarray:
    d = dense.shape[0]
    i, j = np.tril_indices(d)
    return np.ascontiguousarray(dense[i, j], dtype=np.float64)


def _unpack(packed: np.ndarray, d: int) -> np.ndarray:
    """Packed lower triangle -> dense lower-triangular array."""
    out = np.zeros((d, d), dtype=np.float64)
    i, j = np.tril_indices(d)
    out[i, j] = packed
    return out


@dataclass
class SymMatrix:
    """Symmetric matrix of order d, packed lower triangle."""

    order: int
    packed: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise DimensionMismatch(f"order must be >= 1, got {self.order}")
        self.packed = np.asarray(self.packed, dtype=np.float64)
        if self.packed.shape != (packed_size(self.order),):
            raise DimensionMismatch(
                f"packed storage for order {self.order} needs "
                f"{packed_size(self.order)} entries, got {self.packed.shape}")

    @classmethod
    def from_dense(cls, a) -> "SymMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got {a.shape}")
        return cls(a.shape[0], _pack(a))

    @classmethod
    def identity(cls, d: int) -> "SymMatrix":
        return cls.from_dense(np.eye(d))

    def dense(self) -> np.ndarray:
        lower = _unpack(self.packed, self.order)
        return lower + np.tril(lower, -1).T


@dataclass
class LowerTriangular:
    """Lower-triangular matrix of order d, packed lower triangle."""

    order: int
    packed: np.ndarray
    _dense: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise DimensionMismatch(f"order must be >= 1, got {self.order}")
        self.packed = np.asarray(self.packed, dtype=np.float64)
        if self.packed.shape != (packed_size(self.order),):
            raise DimensionMismatch(
                f"packed storage for order {self.order} needs "
                f"{packed_size(self.order)} entries, got {self.packed.shape}")

    @classmethod
    def from_dense(cls, a) -> "LowerTriangular":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got {a.shape}")
        return cls(a.shape[0], _pack(a))

    @classmethod
    def identity(cls, d: int) -> "LowerTriangular":
        return cls.from_dense(np.eye(d))

    def dense(self) -> np.ndarray:
        # Cached: scoring calls hit this repeatedly for the same factor.
        if self._dense is None:
            self._dense = _unpack(self.packed, self.order)
        return self._dense

    def diagonal(self) -> np.ndarray:
        d = self.order
        idx = np.cumsum(np.arange(1, d + 1)) - 1
        return self.packed[idx]


@dataclass
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    ``eigenvalues`` sorted descending; ``eigenvectors[:, i]`` is the unit
    eigenvector for ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def cholesky_factor(a: SymMatrix) -> LowerTriangular:
    """Factor a symmetric positive-definite matrix as C @ C.T.

    Uses the standard row/column recurrences
        C[j, j] = sqrt(A[j, j] - sum_k C[j, k]^2)
        C[i, j] = (A[i, j] - sum_k C[i, k] * C[j, k]) / C[j, j]
    evaluated one column at a time so the inner products vectorize.

    Raises NotPositiveDefinite with the failing pivot index if a diagonal
    pivot is non-positive.
    """
    d = a.order
    A = a.dense()
    L = np.zeros((d, d), dtype=np.float64)
    for j in range(d):
        s = A[j:, j] - L[j:, :j] @ L[j, :j]
        pivot = s[0]
        if not pivot > 0.0:
            raise NotPositiveDefinite(j, float(pivot))
        L[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            L[j + 1:, j] = s[1:] / L[j, j]
    return LowerTriangular.from_dense(L)


def solve_lower(c: LowerTriangular, b) -> np.ndarray:
    """Forward substitution: return z with C @ z = b."""
    b = np.asarray(b, dtype=np.float64)
    d = c.order
    if b.shape != (d,):
        raise DimensionMismatch(
            f"right-hand side has shape {b.shape}, expected ({d},)")
    diag = c.diagonal()
    if np.any(diag <= 0.0):
        raise ZeroDiagonal("triangular factor has a non-positive diagonal")
    L = c.dense()
    z = np.zeros(d, dtype=np.float64)
    for i in range(d):
        z[i] = (b[i] - L[i, :i] @ z[:i]) / L[i, i]
    return z


def _invert_lower_dense(L: np.ndarray) -> np.ndarray:
    """Blocked recursive inversion of a dense lower-triangular matrix.

    inv([[A, 0], [B, C]]) = [[inv(A), 0], [-inv(C) B inv(A), inv(C)]],
    so the O(d^3) work lands in matrix products.
    """
    d = L.shape[0]
    if d <= 32:
        W = np.zeros_like(L)
        for j in range(d):
            W[j, j] = 1.0 / L[j, j]
            for i in range(j + 1, d):
                W[i, j] = -(L[i, j:i] @ W[j:i, j]) / L[i, i]
        return W
    m = d // 2
    iA = _invert_lower_dense(L[:m, :m])
    iC = _invert_lower_dense(L[m:, m:])
    W = np.zeros_like(L)
    W[:m, :m] = iA
    W[m:, m:] = iC
    W[m:, :m] = -iC @ (L[m:, :m] @ iA)
    return W


def invert_lower(c: LowerTriangular) -> LowerTriangular:
    """Invert a lower-triangular matrix with positive diagonal."""
    diag = c.diagonal()
    if np.any(diag == 0.0):
        raise ZeroDiagonal("cannot invert: zero diagonal entry at index "
                           f"{int(np.argmax(diag == 0.0))}")
    return LowerTriangular.from_dense(_invert_lower_dense(c.dense()))


def sym_eig(a: SymMatrix, *, max_sweeps: int = 100) -> Spectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Backed by LAPACK's symmetric solver; a convergence failure surfaces
    as ConvergenceFailure.  ``max_sweeps`` is accepted for interface
    stability but the LAPACK driver manages its own iteration budget.
    """
    A = a.dense()
    try:
        vals, vecs = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(vals)[::-1]
    return Spectrum(np.ascontiguousarray(vals[order]),
                    np.ascontiguousarray(vecs[:, order]))
