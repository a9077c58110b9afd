import numpy as np
import pytest

from spherefit.geometry import PointSet, sample_random
from spherefit.harmonics import harmonic_basis
from spherefit.quadrature import (
    InfeasibleDegreeError,
    QuadratureRule,
    compute_weights,
    design_rule,
    load_rule,
    max_feasible_degree,
    moment_weights,
    save_rule,
    verify_exactness,
)

from conftest import random_unit_vectors


class TestQuadratureRule:
    def test_rejects_nonpositive_weights(self, t3_design):
        with pytest.raises(ValueError):
            QuadratureRule(points=t3_design, weights=np.zeros(8), degree=3)

    def test_rejects_length_mismatch(self, t3_design):
        with pytest.raises(ValueError):
            QuadratureRule(points=t3_design, weights=np.ones(5), degree=3)


class TestDesignRule:
    def test_equal_weights_sum_one(self, t11_design):
        rule = design_rule(t11_design, 11)
        assert np.allclose(rule.weights, 1.0 / len(t11_design))
        assert rule.integrate(np.ones(len(t11_design))) == pytest.approx(1.0)

    def test_design_residual_tiny(self, t11_design):
        rule = design_rule(t11_design, 11)
        assert verify_exactness(rule, 11) <= 1e-10

    def test_random_points_rejected(self):
        points = sample_random(80, seed=5)
        with pytest.raises(InfeasibleDegreeError):
            design_rule(points, 11)

    def test_max_weight_bound_on_designs(self, t11_design, t47_design):
        # Quasi-uniform rule weights stay within a small multiple of 1/n.
        for t, design in ((11, t11_design), (47, t47_design)):
            rule = design_rule(design, t)
            assert rule.weights.max() <= 5.0 / len(design)


class TestVerifyExactness:
    def test_degree_zero_is_sum_gap(self, t3_design):
        rule = QuadratureRule(
            points=t3_design, weights=np.full(8, 0.9 / 8), degree=0
        )
        assert verify_exactness(rule, 0) == pytest.approx(0.1)

    def test_equal_weights_on_random_points_fail(self):
        points = sample_random(100, seed=11)
        rule = QuadratureRule(points=points, weights=np.full(100, 0.01), degree=0)
        assert verify_exactness(rule, 5) > 1e-3


class TestComputeWeights:
    def test_degree_zero_any_points(self, rng):
        points = PointSet(random_unit_vectors(rng, 12))
        rule = compute_weights(points, 0)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-10)

    def test_recovers_equal_weights_on_design(self, t11_design):
        rule = compute_weights(t11_design, 11)
        n = len(t11_design)
        assert np.abs(rule.weights * n - 1.0).max() <= 1e-6
        assert rule.clamped_count == 0

    def test_random_points_full_pipeline(self):
        points = sample_random(500, seed=2024)
        s = max_feasible_degree(points)
        rule = compute_weights(points, s)
        assert s >= 1
        assert verify_exactness(rule, s) <= 1e-8
        assert np.all(rule.weights > 0)

    def test_weight_sum_bounded(self, rng):
        points = PointSet(random_unit_vectors(rng, 200))
        rule = compute_weights(points, 4)
        assert rule.weights.sum() <= 1.0 + 1e-8

    def test_infeasible_degree_raises(self, rng):
        points = PointSet(random_unit_vectors(rng, 20))
        with pytest.raises(InfeasibleDegreeError) as err:
            compute_weights(points, 12)
        assert err.value.residual > 1e-8

    def test_exactness_recheck_independent(self, rng):
        # Postcondition re-checked through the basis matrix directly.
        points = PointSet(random_unit_vectors(rng, 150))
        rule = compute_weights(points, 3)
        moments = harmonic_basis(points, 3) @ rule.weights
        moments[0] -= 1.0
        assert np.abs(moments).max() <= 1e-8


class TestMaxFeasibleDegree:
    def test_design_reaches_its_strength(self, t11_design):
        assert max_feasible_degree(t11_design, s_hint=11) == 11

    def test_two_points(self):
        points = PointSet([[1, 0, 0], [-1, 0, 0]])
        s = max_feasible_degree(points, s_hint=5)
        assert s in (0, 1)

    def test_hint_zero(self, rng):
        points = PointSet(random_unit_vectors(rng, 10))
        assert max_feasible_degree(points, s_hint=0) == 0

    def test_descends_from_infeasible_hint(self, rng):
        points = PointSet(random_unit_vectors(rng, 40))
        s = max_feasible_degree(points, s_hint=10)
        assert 0 <= s < 10
        rule = compute_weights(points, s)
        assert verify_exactness(rule, s) <= 1e-8


class TestMomentWeights:
    def test_dense_positive_on_scattered_points(self):
        points = sample_random(300, seed=9)
        w, residual, n_zero = moment_weights(points, 5)
        assert residual <= 1e-8
        assert (300 - n_zero) / 300 >= 0.95


class TestRuleSerialization:
    def test_roundtrip(self, tmp_path, t11_design):
        rule = design_rule(t11_design, 11)
        path = tmp_path / "rule.csv"
        save_rule(rule, path)
        loaded = load_rule(path)
        assert loaded.degree == 11
        assert np.allclose(loaded.weights, rule.weights)
        assert np.allclose(loaded.points.coords, rule.points.coords)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "rule.csv"
        path.write_text("1 0 0 0.5\n-1 0 0 0.5\n")
        with pytest.raises(ValueError, match="degree"):
            load_rule(path)
