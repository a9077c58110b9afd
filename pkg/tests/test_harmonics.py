import numpy as np
import pytest

from spherefit.harmonics import basis_size, harmonic_basis, harmonic_dim, legendre

from conftest import random_unit_vectors


class TestHarmonicDim:
    def test_degree_zero(self):
        assert harmonic_dim(2, 0) == 1

    def test_degree_one(self):
        # (2k+d-1)/(k+d-1) * binom(k+d-1, k) = (3/2) * 2 = 3
        assert harmonic_dim(2, 1) == 3

    def test_s2_is_odd_numbers(self):
        assert harmonic_dim(2, 5) == 11
        assert [harmonic_dim(2, k) for k in range(6)] == [1, 3, 5, 7, 9, 11]

    def test_rejects_low_dimension(self):
        with pytest.raises(ValueError):
            harmonic_dim(1, 2)

    def test_total_count(self):
        assert sum(harmonic_dim(2, k) for k in range(8)) == basis_size(7)


class TestLegendre:
    def test_value_at_one(self):
        for k in range(51):
            assert legendre(k, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_degree_one_is_identity(self):
        u = np.linspace(-1, 1, 11)
        assert np.allclose(legendre(1, u), u)

    def test_degree_two(self):
        assert legendre(2, 0.5) == pytest.approx(-0.125)

    def test_bounded_on_interval(self):
        u = np.linspace(-1, 1, 2001)
        for k in (10, 50, 100):
            assert np.abs(legendre(k, u)).max() <= 1.0 + 1e-12

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            legendre(3, 1.5)


class TestHarmonicBasis:
    def test_constant_row(self, rng):
        pts = random_unit_vectors(rng, 9)
        v = harmonic_basis(pts, 0)
        assert v.shape == (1, 9)
        assert np.allclose(v, 1.0)

    def test_shape(self, rng):
        v = harmonic_basis(random_unit_vectors(rng, 3), 1)
        assert v.shape == (4, 3)

    def test_gram_identity_on_design(self, t11_design):
        # A t-design integrates degree <= 2s products exactly for s <= t/2.
        v = harmonic_basis(t11_design, 5)
        gram = (v @ v.T) / len(t11_design)
        assert np.abs(gram - np.eye(36)).max() <= 1e-8

    def test_addition_theorem(self, rng):
        x = random_unit_vectors(rng, 5)
        y = random_unit_vectors(rng, 5)
        vx = harmonic_basis(x, 20)
        vy = harmonic_basis(y, 20)
        row = 0
        for k in range(21):
            z = harmonic_dim(2, k)
            lhs = vx[row : row + z].T @ vy[row : row + z]
            rhs = z * legendre(k, x @ y.T)
            assert np.abs(lhs - rhs).max() < 1e-8
            row += z

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ValueError):
            harmonic_basis(np.eye(4), 2)
