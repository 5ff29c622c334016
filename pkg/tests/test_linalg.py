import math

import numpy as np
import pytest

from hypdecay.errors import NonSquare
from hypdecay.linalg import as_matrix, eig, expm, numerical_rank, poly_adjugate


class TestAsMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            as_matrix([[0.0, np.nan], [0.0, 1.0]])

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            as_matrix([[np.inf, 0.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(NonSquare):
            as_matrix([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])

    def test_result_is_readonly(self):
        m = as_matrix([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            m[0, 0] = 2.0


class TestEig:
    def test_diagonal(self):
        ed = eig(np.diag([0.0, 1.0]))
        np.testing.assert_allclose(ed.values, [0.0, 1.0], atol=1e-14)

    def test_swap_matrix(self):
        ed = eig([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(ed.values, [-1.0, 1.0], atol=1e-14)

    def test_damped_wave_symbol_quadratic_roots(self):
        # det(E - lambda I) = lambda^2 + lambda + xi^2 at xi = 0.1
        xi = 0.1
        e = -(np.array([[0.0, 0.0], [0.0, 1.0]]) + 1j * xi * np.array([[0.0, 1.0], [1.0, 0.0]]))
        disc = math.sqrt(1.0 - 4.0 * xi**2)
        expected = sorted([(-1.0 - disc) / 2.0, (-1.0 + disc) / 2.0])
        ed = eig(e)
        np.testing.assert_allclose(ed.values.real, expected, atol=1e-12)
        np.testing.assert_allclose(ed.values.imag, 0.0, atol=1e-12)

    def test_ordering_is_deterministic(self):
        rng = np.random.default_rng(7)
        m = rng.standard_normal((5, 5))
        v1 = eig(m).values
        v2 = eig(m).values
        np.testing.assert_array_equal(v1, v2)
        assert np.all(np.diff(v1.real) >= -1e-14)

    @pytest.mark.parametrize("seed", range(8))
    def test_trace_and_det_consistency(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        ed = eig(m)
        scale = max(1.0, float(np.linalg.norm(m, 2)))
        assert abs(np.sum(ed.values) - np.trace(m)) <= 1e-10 * n * scale
        det = np.linalg.det(m)
        assert abs(np.prod(ed.values) - det) <= 1e-8 * max(1e-30, abs(det))

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((4, 4))
        ed = eig(m)
        assert ed.residual <= 1e-10


class TestExpm:
    def test_zero_matrix(self):
        np.testing.assert_allclose(expm(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        out = expm(np.diag([1.0, -2.0]))
        np.testing.assert_allclose(out, np.diag([math.e, math.exp(-2.0)]), rtol=1e-13)

    def test_nilpotent_truncates(self):
        n = np.array([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(expm(n), np.eye(2) + n, atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_inverse_property(self, seed):
        rng = np.random.default_rng(100 + seed)
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        m *= 5.0 / max(np.linalg.norm(m, 2), 1e-30)
        prod = expm(m) @ expm(-m)
        assert np.max(np.abs(prod - np.eye(4))) <= 1e-10


class TestPolyAdjugate:
    def test_diag_example(self):
        adj, det = poly_adjugate(np.diag([0.0, 1.0]))
        np.testing.assert_allclose(adj.coeff(0), np.diag([1.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(adj.coeff(1), np.eye(2), atol=1e-14)
        np.testing.assert_allclose(det, [0.0, 1.0, 1.0], atol=1e-14)  # x + x^2

    def test_identity(self):
        adj, det = poly_adjugate(np.eye(2))
        x = 0.7
        np.testing.assert_allclose(adj(x), (1 + x) * np.eye(2), atol=1e-14)
        np.testing.assert_allclose(np.polyval(det[::-1], x), (1 + x) ** 2, atol=1e-14)

    def test_jordan_block(self):
        adj, det = poly_adjugate(np.array([[0.0, 1.0], [0.0, 0.0]]))
        x = -1.3
        np.testing.assert_allclose(adj(x), np.array([[x, -1.0], [0.0, x]]), atol=1e-14)
        np.testing.assert_allclose(det, [0.0, 0.0, 1.0], atol=1e-14)  # x^2

    @pytest.mark.parametrize("seed", range(6))
    def test_defining_identity_at_random_nodes(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(2, 7))
        m = rng.standard_normal((n, n))
        adj, det = poly_adjugate(m)
        scale = max(1.0, float(np.linalg.norm(m, 2))) ** n
        for x in rng.uniform(-2, 2, size=7):
            lhs = (m + x * np.eye(n)) @ adj(x)
            rhs = np.polyval(det[::-1], x) * np.eye(n)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


class TestNumericalRank:
    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((3, 3)), 1e-10) == 0

    def test_identity(self):
        assert numerical_rank(np.eye(3), 1e-10) == 3

    def test_rank_one(self):
        assert numerical_rank(np.ones((2, 2)), 1e-10) == 1

    def test_requires_positive_tol(self):
        with pytest.raises(ValueError):
            numerical_rank(np.eye(2), 0.0)
