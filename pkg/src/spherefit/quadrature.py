"""Positive quadrature rules on scattered sphere points.

A rule of degree s integrates every spherical polynomial of degree <= s
exactly against the measure normalized to mass 1, so the moment targets are
1 for the constant harmonic and 0 for all others. Shipped designs get equal
weights; scattered sets get weights from nonnegative least squares on the
moment system, anchored at equal weights so the solution stays dense and
positive whenever the degree is feasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import PointSet, load_points
from .harmonics import basis_size, harmonic_basis
from .numerics import nnls

EXACTNESS_TOL = 1e-8
# Floor applied to zeroed weights so the diagonal weighting stays invertible.
WEIGHT_FLOOR = 1e-12


class InfeasibleDegreeError(RuntimeError):
    """No positive rule of the requested degree on these points."""

    def __init__(self, degree, residual):
        super().__init__(
            f"no positive quadrature rule of degree {degree}: "
            f"moment residual {residual:.3e} > {EXACTNESS_TOL:g}"
        )
        self.degree = degree
        self.residual = residual


@dataclass(frozen=True)
class QuadratureRule:
    """Points with positive weights summing to ~1 and an exactness degree."""

    points: PointSet
    weights: np.ndarray
    degree: int
    clamped_count: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.points),):
            raise ValueError("one weight per point required")
        if np.any(w <= 0.0):
            raise ValueError("quadrature weights must be strictly positive")
        object.__setattr__(self, "weights", w)
        self.weights.setflags(write=False)

    def integrate(self, values):
        return float(self.weights @ np.asarray(values, dtype=float))


def verify_exactness(rule, s):
    """Worst moment error over all harmonics of degree <= s.

    Returns max |sum_i w_i Y_(k,l)(x_i) - [k == 0]|.
    """
    if s < 0:
        raise ValueError("degree must be >= 0")
    moments = harmonic_basis(rule.points, s) @ rule.weights
    moments[0] -= 1.0
    return float(np.abs(moments).max())


def design_rule(points, t):
    """Equal-weight rule for a spherical t-design, validated at degree t."""
    n = len(points)
    rule = QuadratureRule(points=points, weights=np.full(n, 1.0 / n), degree=t)
    residual = verify_exactness(rule, t)
    if residual > EXACTNESS_TOL:
        raise InfeasibleDegreeError(t, residual)
    return rule


def moment_weights(points, s, anchor_ridge=1e-12):
    """Nonnegative weights minimizing the degree-s moment residual.

    Solves ``min ||V w - e_1||^2 + ridge * ||w - 1/n||^2`` over ``w >= 0``
    (V the harmonic basis matrix, e_1 the moment vector). The equal-weight
    anchor selects, among the many exact solutions, the dense positive one;
    the active set only trims weights where the geometry forces it.

    Returns ``(weights, residual, n_zero)`` with untouched (unclamped) zeros.
    """
    n = len(points)
    v = harmonic_basis(points, s)
    target = np.zeros(v.shape[0])
    target[0] = 1.0
    anchor = np.full(n, 1.0 / n)
    ridge = np.sqrt(anchor_ridge)

    # Unconstrained anchored solution first: w = anchor + V'(VV' + rI)^-1 r0.
    vvt = v @ v.T
    vvt[np.diag_indices_from(vvt)] += anchor_ridge
    gap = target - v @ anchor
    w = anchor + v.T @ np.linalg.solve(vvt, gap)
    if w.min() < 0.0:
        a_aug = np.vstack([v, ridge * np.eye(n)])
        b_aug = np.concatenate([target, ridge * anchor])
        w = nnls(a_aug, b_aug, start_passive=np.flatnonzero(w > 0.0))
    else:
        w = np.maximum(w, 0.0)
    residual = float(np.abs(v @ w - target).max())
    return w, residual, int(np.count_nonzero(w <= 0.0))


def compute_weights(points, s, anchor_ridge=1e-12):
    """Positive quadrature rule of degree s via anchored NNLS.

    Zero weights returned by the active set are clamped to a 1e-12 floor so
    every node stays usable by the weighted estimator; the rule records how
    many were clamped and the weights are renormalized to unit mass.
    """
    if s < 0:
        raise ValueError("degree must be >= 0")
    w, residual, n_zero = moment_weights(points, s, anchor_ridge)
    if residual > EXACTNESS_TOL:
        raise InfeasibleDegreeError(s, residual)
    if n_zero:
        w = np.maximum(w, WEIGHT_FLOOR)
        w *= 1.0 / w.sum()
    return QuadratureRule(points=points, weights=w, degree=s, clamped_count=n_zero)


def max_feasible_degree(points, s_hint=None, min_positive_fraction=0.95,
                        probe_resolution=400):
    """Largest degree <= s_hint admitting a positive rule on these points.

    Descends from ``s_hint`` (default floor(1 / mesh_norm)) until the moment
    residual passes and at least ``min_positive_fraction`` of the nodes carry
    strictly positive weight before clamping. Degree 0 always succeeds (the
    anchored solution is exactly equal weights), so the search terminates.
    """
    if s_hint is None:
        s_hint = int(1.0 / points.mesh_norm(probe_resolution))
    if s_hint < 0:
        raise ValueError("degree hint must be >= 0")
    n = len(points)
    for s in range(s_hint, -1, -1):
        if basis_size(s) > 4 * n and s > 0:
            continue  # grossly infeasible; skip the expensive solve
        try:
            w, residual, n_zero = moment_weights(points, s)
        except np.linalg.LinAlgError:
            continue
        if residual <= EXACTNESS_TOL and (n - n_zero) >= min_positive_fraction * n:
            return s
    raise InfeasibleDegreeError(0, np.inf)


def save_rule(rule, path):
    """Write a rule as `x y z w` rows under a `# degree=s` header."""
    lines = [f"# degree={rule.degree}"]
    for (x, y, z), w in zip(rule.points.coords, rule.weights):
        lines.append(f"{x:.17g} {y:.17g} {z:.17g} {w:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_rule(path):
    """Read a rule written by :func:`save_rule`."""
    path = Path(path)
    degree = None
    coords, weights = [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text.lstrip("#").strip()
                if body.startswith("degree="):
                    degree = int(body.split("=", 1)[1])
                continue
            parts = text.split()
            if len(parts) != 4:
                raise ValueError(f"{path.name}:{lineno}: expected `x y z w` row")
            coords.append([float(p) for p in parts[:3]])
            weights.append(float(parts[3]))
    if degree is None:
        raise ValueError(f"{path.name}: missing `# degree=` header")
    return QuadratureRule(
        points=PointSet(np.array(coords)),
        weights=np.array(weights),
        degree=degree,
    )


def rule_for_design_file(path, t):
    """Convenience: load a design file and build its equal-weight rule."""
    return design_rule(load_points(path), t)
