import numpy as np
import pytest

from hypdecay.errors import ClusterAmbiguous, ZeroDenominator
from hypdecay.linalg import eig
from hypdecay.projections import proj_oracle, proj_semisimple_zero

from conftest import planted_zero_system


class TestSemisimpleZeroFormula:
    def test_damped_wave_relaxation(self):
        pair = proj_semisimple_zero(np.diag([0.0, 1.0]), 1)
        np.testing.assert_allclose(pair.P, np.diag([1.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(pair.S, np.diag([0.0, 1.0]), atol=1e-14)

    def test_goldstein_kac_relaxation(self):
        b = np.array([[0.5, -0.5], [-0.5, 0.5]])
        pair = proj_semisimple_zero(b, 1)
        np.testing.assert_allclose(pair.P, np.full((2, 2), 0.5), atol=1e-14)
        # spectral oracle: S = P_1 / 1 = I - P
        np.testing.assert_allclose(pair.S, np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-14)

    def test_zero_matrix_full_kernel(self):
        pair = proj_semisimple_zero(np.zeros((4, 4)), 4)
        np.testing.assert_allclose(pair.P, np.eye(4), atol=1e-14)
        np.testing.assert_allclose(pair.S, np.zeros((4, 4)), atol=1e-14)

    def test_wrong_multiplicity_raises(self):
        with pytest.raises(ZeroDenominator):
            proj_semisimple_zero(np.diag([0.0, 1.0]), 2)

    def test_defective_zero_raises(self):
        with pytest.raises(ZeroDenominator):
            proj_semisimple_zero(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)


class TestOracle:
    def test_diagonal_cluster(self):
        pair = proj_oracle(np.diag([0.0, 0.0, 3.0]), 0.0)
        np.testing.assert_allclose(pair.P, np.diag([1.0, 1.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(pair.S, np.diag([0.0, 0.0, 1.0 / 3.0]), atol=1e-14)
        assert pair.m == 2

    def test_matches_formula_route(self):
        b = np.diag([0.0, 1.0])
        a = proj_semisimple_zero(b, 1)
        o = proj_oracle(b, 0.0)
        np.testing.assert_allclose(a.P, o.P, atol=1e-12)
        np.testing.assert_allclose(a.S, o.S, atol=1e-12)

    def test_no_cluster_raises(self):
        with pytest.raises(ClusterAmbiguous):
            proj_oracle(np.diag([1.0, 2.0]), 0.0)

    def test_tight_gap_raises(self):
        with pytest.raises(ClusterAmbiguous):
            proj_oracle(np.diag([0.0, 1e-7, 1.0]), 0.0, tol=2e-8)

    def test_defective_cluster(self):
        # Jordan block at 1: projector exists even though eigenvectors degenerate
        b = np.zeros((3, 3))
        b[1, 1] = b[2, 2] = 1.0
        b[1, 2] = 1.0
        pair = proj_oracle(b, 1.0)
        assert pair.m == 2
        np.testing.assert_allclose(pair.P @ pair.P, pair.P, atol=1e-12)
        nil = (b - np.eye(3)) @ pair.P
        assert np.linalg.norm(nil) > 0.5
        np.testing.assert_allclose(nil @ nil, 0.0, atol=1e-12)

    def test_matches_eigenvector_sum_on_diagonalizable_input(self):
        # independent spectral-sum construction P = sum_cluster v_i w_i
        rng = np.random.default_rng(11)
        a, m, _, _, _ = planted_zero_system(rng, n=5, m=2)
        ed = eig(a)
        vinv = np.linalg.inv(ed.vectors)
        mask = np.abs(ed.values) <= 1e-8
        p_sum = (ed.vectors[:, mask] @ vinv[mask, :])
        pair = proj_oracle(a, 0.0)
        np.testing.assert_allclose(pair.P, p_sum, atol=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_planted_systems_formula_vs_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    a, m, p_true, s_true, cond = planted_zero_system(rng)
    tol = 1e-7 * cond**2
    pair_f = proj_semisimple_zero(a, m)
    pair_o = proj_oracle(a, 0.0)
    assert np.max(np.abs(pair_f.P - pair_o.P)) <= tol
    assert np.max(np.abs(pair_f.S - pair_o.S)) <= tol
    assert np.max(np.abs(pair_f.P - p_true)) <= tol
    assert np.max(np.abs(pair_f.S - s_true)) <= tol


@pytest.mark.parametrize("seed", range(10))
def test_projector_pair_identities(seed):
    """P^2=P, AP=PA, AP=0, rank(P)=m, SA=AS=I-P, SP=PS=0."""
    rng = np.random.default_rng(2000 + seed)
    a, m, _, _, cond = planted_zero_system(rng)
    n = a.shape[0]
    tol = 1e-8 * cond**2
    for pair in (proj_semisimple_zero(a, m), proj_oracle(a, 0.0)):
        p, s = pair.P, pair.S
        assert np.max(np.abs(p @ p - p)) <= tol
        assert np.max(np.abs(a @ p - p @ a)) <= tol
        assert np.max(np.abs(a @ p)) <= tol  # semi-simple zero
        assert np.linalg.matrix_rank(p, tol=1e-6) == m
        assert np.max(np.abs(s @ a - (np.eye(n) - p))) <= tol
        assert np.max(np.abs(a @ s - (np.eye(n) - p))) <= tol
        assert np.max(np.abs(s @ p)) <= tol
        assert np.max(np.abs(p @ s)) <= tol
