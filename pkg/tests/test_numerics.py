import numpy as np
import pytest
import scipy.optimize

from spherefit.numerics import (
    AsymmetricMatrixError,
    NnlsIterationWarning,
    condition_number,
    largest_eigenvalue,
    nnls,
    solve_spd,
    sym_eig,
)


def random_spd(rng, n, cond=1e3):
    q = np.linalg.qr(rng.normal(size=(n, n)))[0]
    vals = np.logspace(0, -np.log10(cond), n)
    return (q * vals) @ q.T


class TestSolveSpd:
    def test_identity(self, rng):
        b = rng.normal(size=6)
        x, warned = solve_spd(np.eye(6), b)
        assert np.allclose(x, b) and not warned

    def test_diagonal_with_shift(self):
        x, warned = solve_spd(np.diag([2.0, 3.0]), np.array([2.0, 3.0]), shift=1.0)
        assert np.allclose(x, [2.0 / 3.0, 3.0 / 4.0]) and not warned

    def test_zero_matrix_flags(self):
        x, warned = solve_spd(np.zeros((3, 3)), np.array([1.0, 0.0, 0.0]))
        assert warned and np.allclose(x, 0.0)

    def test_residual_on_conditioned_system(self, rng):
        a = random_spd(rng, 40, cond=1e8)
        b = rng.normal(size=40)
        x, warned = solve_spd(a, b)
        assert not warned
        assert np.linalg.norm(a @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_rejects_asymmetric(self, rng):
        a = rng.normal(size=(5, 5))
        with pytest.raises(AsymmetricMatrixError):
            solve_spd(a, np.ones(5))

    def test_rejects_negative_shift(self):
        with pytest.raises(ValueError):
            solve_spd(np.eye(2), np.ones(2), shift=-1.0)


class TestSymEig:
    def test_identity(self):
        e = sym_eig(np.eye(3))
        assert np.allclose(e.eigenvalues, 1.0)

    def test_sorted_descending(self):
        e = sym_eig(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(e.eigenvalues, [3.0, 2.0, 1.0])

    def test_reconstruction_and_orthogonality(self, rng):
        a = rng.normal(size=(50, 50))
        a = a + a.T
        e = sym_eig(a)
        assert np.linalg.norm(e.reconstruct() - a) <= 1e-8 * np.linalg.norm(a)
        q = e.eigenvectors
        assert np.abs(q.T @ q - np.eye(50)).max() <= 1e-10

    def test_agrees_with_solve(self, rng):
        a = random_spd(rng, 30, cond=1e6)
        b = rng.normal(size=30)
        e = sym_eig(a)
        x_eig = e.eigenvectors @ ((e.eigenvectors.T @ b) / e.eigenvalues)
        x_solve, _ = solve_spd(a, b)
        assert np.linalg.norm(x_eig - x_solve) <= 1e-6 * np.linalg.norm(x_solve)


class TestConditionNumber:
    def test_scale_invariant(self, rng):
        a = random_spd(rng, 20, cond=1e5)
        c1 = condition_number(a)
        c2 = condition_number(7.5 * a)
        assert c1 >= 1.0
        assert c2 == pytest.approx(c1, rel=1e-8)


class TestLargestEigenvalue:
    def test_diagonal(self):
        assert largest_eigenvalue(np.diag([5.0, 1.0])) == pytest.approx(5.0, rel=1e-6)

    def test_rank_one(self, rng):
        v = rng.normal(size=9)
        assert largest_eigenvalue(np.outer(v, v)) == pytest.approx(v @ v, rel=1e-8)

    def test_zero_matrix(self):
        assert largest_eigenvalue(np.zeros((4, 4))) == 0.0

    def test_matches_sym_eig(self, rng):
        a = random_spd(rng, 100, cond=1e4)
        top = sym_eig(a).eigenvalues[0]
        assert largest_eigenvalue(a, tol=1e-10) == pytest.approx(top, rel=1e-6)


class TestNnls:
    def test_projection_onto_orthant(self):
        x = nnls(np.eye(2), np.array([1.0, -1.0]))
        assert np.allclose(x, [1.0, 0.0])

    def test_exact_fit_single_column(self):
        x = nnls(np.array([[1.0], [1.0]]), np.array([1.0, 1.0]))
        assert np.allclose(x, [1.0])

    def test_kkt_on_random_system(self, rng):
        a = rng.normal(size=(50, 20))
        b = rng.normal(size=50)
        x = nnls(a, b)
        grad = a.T @ (b - a @ x)  # positive gradient would mean KKT violation
        scale = np.abs(a.T @ b).max()
        assert np.all(x >= 0.0)
        assert np.all(grad <= 1e-10 * scale + 1e-12)
        assert np.abs(grad[x > 0]).max() <= 1e-8 * scale

    def test_matches_scipy(self, rng):
        for seed in range(4):
            local = np.random.default_rng(seed)
            a = local.normal(size=(30, 12))
            b = local.normal(size=30)
            ours = nnls(a, b)
            ref, _ = scipy.optimize.nnls(a, b)
            assert np.abs(ours - ref).max() < 1e-9

    def test_warm_start_agrees(self, rng):
        a = rng.normal(size=(40, 15))
        b = rng.normal(size=40)
        cold = nnls(a, b)
        warm = nnls(a, b, start_passive=np.arange(15))
        assert np.abs(cold - warm).max() < 1e-9

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            nnls(np.array([[np.nan]]), np.array([1.0]))

    def test_iteration_cap_warns(self, rng):
        a = rng.normal(size=(30, 10))
        b = rng.normal(size=30) + 5.0
        with pytest.warns(NnlsIterationWarning):
            x = nnls(a, b, max_iter=1)
        assert np.all(x >= 0.0)
