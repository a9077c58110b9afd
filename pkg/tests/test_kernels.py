import math

import numpy as np
import pytest

from spherefit.geometry import PointSet
from spherefit.kernels import (
    bump,
    get_kernel,
    kernel_cross,
    kernel_eval,
    kernel_matrix,
    target_function,
)

from conftest import random_unit_vectors

AXES = PointSet(np.eye(3))


class TestKernelEval:
    def test_unknown_family(self):
        with pytest.raises(KeyError):
            get_kernel("gaussian")

    def test_same_point(self):
        k = get_kernel()
        assert kernel_eval(k, (1, 0, 0), (1, 0, 0)) == 1.0

    def test_outside_support(self):
        k = get_kernel()
        # orthogonal unit vectors: chord sqrt(2) > 1
        assert kernel_eval(k, (1, 0, 0), (0, 1, 0)) == 0.0
        assert kernel_eval(k, (1, 0, 0), (-1, 0, 0)) == 0.0

    def test_half_chord(self):
        # h(1/2) = (1/2)^4 * 3 = 0.1875; dot giving chord 1/2 is 7/8.
        k = get_kernel()
        dot = 1.0 - 0.5**2 / 2.0
        b = np.array([dot, math.sqrt(1 - dot * dot), 0.0])
        assert kernel_eval(k, (1, 0, 0), b) == pytest.approx(0.1875, abs=1e-15)


class TestKernelMatrix:
    def test_single_point(self):
        m = kernel_matrix(get_kernel(), PointSet([[0, 0, 1]]))
        assert m.shape == (1, 1) and m[0, 0] == 1.0

    def test_antipodal_identity(self):
        m = kernel_matrix(get_kernel(), PointSet([[1, 0, 0], [-1, 0, 0]]))
        assert np.array_equal(m, np.eye(2))

    def test_axes_identity_by_compact_support(self):
        m = kernel_matrix(get_kernel(), AXES)
        assert np.array_equal(m, np.eye(3))

    def test_symmetric_unit_diagonal(self, rng):
        pts = PointSet(random_unit_vectors(rng, 60))
        m = kernel_matrix(get_kernel(), pts)
        assert np.abs(m - m.T).max() <= 1e-14
        assert np.allclose(np.diag(m), 1.0)

    def test_positive_semidefinite(self, rng):
        for seed in (0, 1, 2):
            local = np.random.default_rng(seed)
            pts = PointSet(random_unit_vectors(local, 200))
            m = kernel_matrix(get_kernel(), pts)
            smallest = np.linalg.eigvalsh(m)[0]
            assert smallest >= -1e-10 * np.trace(m)

    def test_rotation_invariance(self, rng):
        pts = random_unit_vectors(rng, 40)
        theta = 0.7
        rot = np.array(
            [
                [math.cos(theta), -math.sin(theta), 0],
                [math.sin(theta), math.cos(theta), 0],
                [0, 0, 1],
            ]
        )
        m1 = kernel_matrix(get_kernel(), PointSet(pts))
        m2 = kernel_matrix(get_kernel(), PointSet(pts @ rot.T))
        assert np.abs(m1 - m2).max() < 1e-12

    def test_cross_matches_square(self, rng):
        pts = PointSet(random_unit_vectors(rng, 25))
        k = get_kernel()
        assert np.allclose(kernel_cross(k, pts, pts), kernel_matrix(k, pts))


class TestTargetFunction:
    def test_axis_values(self):
        assert target_function(np.array([1.0, 0, 0])) == pytest.approx(1.0)
        assert target_function(np.array([0.0, 0, -1.0])) == pytest.approx(1.0)

    def test_diagonal_point(self):
        x = np.full(3, 1.0 / math.sqrt(3.0))
        expected = 3.0 * bump(math.sqrt(2.0 - 2.0 / math.sqrt(3.0)))
        assert target_function(x) == pytest.approx(expected, rel=1e-14)

    def test_symmetry_under_axis_permutations_and_flips(self, rng):
        pts = random_unit_vectors(rng, 20)
        base = target_function(pts)
        for perm in ([1, 0, 2], [2, 1, 0], [0, 2, 1]):
            assert np.allclose(target_function(pts[:, perm]), base, atol=1e-14)
        for flip in ([-1, 1, 1], [1, -1, 1], [1, 1, -1]):
            assert np.allclose(target_function(pts * flip), base, atol=1e-14)

    def test_vectorized_matches_scalar(self, rng):
        pts = random_unit_vectors(rng, 7)
        vec = target_function(pts)
        for row, expected in zip(pts, vec):
            assert target_function(row) == pytest.approx(expected)
