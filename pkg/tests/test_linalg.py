import math

import numpy as np
import pytest

from gdc import linalg
from gdc.errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    ZeroDiagonal,
)

from testutil import random_spd


def cholesky_outer_product(a):
    """Recursive outer-product factorization used as an independent oracle.

    Peels one pivot at a time: A = L_i A' L_i.T with L_i carrying
    sqrt(pivot) and the scaled column, then recurses on the trailing
    block.  O(d^3) with explicit elimination matrices; only used at
    tiny d.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    total = np.eye(n)
    for i in range(n):
        pivot = a[i, i]
        assert pivot > 0
        step = np.eye(n)
        step[i, i] = math.sqrt(pivot)
        step[i + 1:, i] = a[i + 1:, i] / math.sqrt(pivot)
        trailing = (a[i + 1:, i + 1:]
                    - np.outer(a[i + 1:, i], a[i + 1:, i]) / pivot)
        a[i, i] = 1.0
        a[i, i + 1:] = 0.0
        a[i + 1:, i] = 0.0
        a[i + 1:, i + 1:] = trailing
        total = total @ step
    return total


class TestCholesky:
    def test_identity(self):
        c = linalg.cholesky_factor(linalg.SymMatrix.identity(3))
        assert np.array_equal(c.dense(), np.eye(3))

    def test_2x2_hand(self):
        a = linalg.SymMatrix.from_dense([[4.0, 2.0], [2.0, 3.0]])
        c = linalg.cholesky_factor(a)
        expected = np.array([[2.0, 0.0], [1.0, math.sqrt(2.0)]])
        assert np.allclose(c.dense(), expected, atol=1e-15)

    def test_reconstruction_d50(self):
        rng = np.random.default_rng(1)
        a = random_spd(rng, 50)
        c = linalg.cholesky_factor(linalg.SymMatrix.from_dense(a)).dense()
        err = np.max(np.abs(c @ c.T - a))
        assert err < 1e-10 * np.max(np.abs(a))

    @pytest.mark.parametrize("d", range(1, 9))
    def test_matches_outer_product_oracle(self, d):
        rng = np.random.default_rng(100 + d)
        a = random_spd(rng, d)
        c = linalg.cholesky_factor(linalg.SymMatrix.from_dense(a)).dense()
        oracle = cholesky_outer_product(a)
        assert np.max(np.abs(c - oracle)) < 1e-12

    def test_indefinite_raises_with_pivot(self):
        a = np.array([[1.0, 2.0], [2.0, 1.0]])  # second leading minor < 0
        with pytest.raises(NotPositiveDefinite) as err:
            linalg.cholesky_factor(linalg.SymMatrix.from_dense(a))
        assert err.value.pivot_index == 1

    def test_seeded_indefinite_matrices(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            d = int(rng.integers(2, 10))
            a = rng.uniform(-1, 1, size=(d, d))
            a = (a + a.T) / 2 - 2.0 * np.eye(d)  # shifted negative definite
            with pytest.raises(NotPositiveDefinite):
                linalg.cholesky_factor(linalg.SymMatrix.from_dense(a))


class TestSolveLower:
    def test_identity(self):
        c = linalg.LowerTriangular.identity(2)
        assert np.array_equal(linalg.solve_lower(c, [3.0, -1.0]), [3.0, -1.0])

    def test_hand_2x2(self):
        c = linalg.LowerTriangular.from_dense(
            [[2.0, 0.0], [1.0, math.sqrt(2.0)]])
        z = linalg.solve_lower(c, [4.0, 3.0])
        assert np.allclose(z, [2.0, 1.0 / math.sqrt(2.0)], atol=1e-15)

    def test_residual_d20(self):
        rng = np.random.default_rng(3)
        c = linalg.cholesky_factor(
            linalg.SymMatrix.from_dense(random_spd(rng, 20)))
        b = rng.normal(size=20)
        z = linalg.solve_lower(c, b)
        res = np.max(np.abs(c.dense() @ z - b))
        assert res < 1e-12 * np.max(np.abs(b))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            linalg.solve_lower(linalg.LowerTriangular.identity(3), [1.0, 2.0])


class TestInvertLower:
    def test_identity(self):
        w = linalg.invert_lower(linalg.LowerTriangular.identity(4))
        assert np.array_equal(w.dense(), np.eye(4))

    def test_diagonal(self):
        c = linalg.LowerTriangular.from_dense(np.diag([2.0, 4.0]))
        w = linalg.invert_lower(c)
        assert np.array_equal(w.dense(), np.diag([0.5, 0.25]))

    @pytest.mark.parametrize("d", [5, 33, 50, 100])
    def test_product_oracle(self, d):
        rng = np.random.default_rng(4 + d)
        c = linalg.cholesky_factor(
            linalg.SymMatrix.from_dense(random_spd(rng, d)))
        w = linalg.invert_lower(c)
        assert np.max(np.abs(w.dense() @ c.dense() - np.eye(d))) < 1e-10
        assert np.allclose(w.diagonal(), 1.0 / c.diagonal(), rtol=0,
                           atol=0)  # exact reciprocal

    def test_zero_diagonal(self):
        c = linalg.LowerTriangular.from_dense([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(ZeroDiagonal):
            linalg.invert_lower(c)

    def test_precision_applies_inverse(self):
        # W.T @ W acts as the inverse of the original SPD matrix.
        rng = np.random.default_rng(5)
        a = random_spd(rng, 12)
        c = linalg.cholesky_factor(linalg.SymMatrix.from_dense(a))
        w = linalg.invert_lower(c).dense()
        assert np.max(np.abs((w.T @ w) @ a - np.eye(12))) < 1e-8


def charpoly_coefficients(a):
    """Characteristic polynomial via the Faddeev-LeVerrier trace recurrence;
    independent of any eigensolver."""
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


class TestSymEig:
    def test_diagonal(self):
        s = linalg.sym_eig(linalg.SymMatrix.from_dense(np.diag([3.0, 1.0, 2.0])))
        assert np.allclose(s.eigenvalues, [3.0, 2.0, 1.0])
        assert np.allclose(np.abs(s.eigenvectors),
                           np.eye(3)[:, [0, 2, 1]], atol=1e-12)

    def test_identity(self):
        s = linalg.sym_eig(linalg.SymMatrix.identity(4))
        assert np.allclose(s.eigenvalues, np.ones(4))

    def test_characteristic_polynomial_oracle(self):
        rng = np.random.default_rng(6)
        a = rng.uniform(-1, 1, size=(10, 10))
        a = (a + a.T) / 2
        s = linalg.sym_eig(linalg.SymMatrix.from_dense(a))
        roots = np.sort(np.roots(charpoly_coefficients(a)).real)[::-1]
        assert np.max(np.abs(s.eigenvalues - roots)) < 1e-8

    def test_invariants(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = int(rng.integers(2, 16))
            a = rng.uniform(-1, 1, size=(d, d))
            a = (a + a.T) / 2
            s = linalg.sym_eig(linalg.SymMatrix.from_dense(a))
            assert np.all(np.diff(s.eigenvalues) <= 1e-12)
            v = s.eigenvectors
            assert np.max(np.abs(v.T @ v - np.eye(d))) < 1e-10
            assert abs(s.eigenvalues.sum() - np.trace(a)) <= (
                1e-8 * max(1.0, abs(np.trace(a))))
            for i in range(d):
                assert np.max(np.abs(a @ v[:, i]
                                     - s.eigenvalues[i] * v[:, i])) < 1e-8


class TestPackedStorage:
    def test_sym_round_trip(self):
        rng = np.random.default_rng(8)
        a = random_spd(rng, 7)
        m = linalg.SymMatrix.from_dense(a)
        assert m.packed.shape == (7 * 8 // 2,)
        assert np.array_equal(m.dense(), np.tril(a) + np.tril(a, -1).T)

    def test_bad_packed_size(self):
        with pytest.raises(DimensionMismatch):
            linalg.SymMatrix(3, np.zeros(5))
