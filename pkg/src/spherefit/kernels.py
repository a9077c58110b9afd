"""Compactly supported spherical basis functions and the synthetic target.

Kernels are zonal: phi(x . x') = h(||x - x'||_2) evaluated at the Euclidean
chord distance. The registry ships the C^2 Wendland kernel used everywhere
in the experiments; its smoothness exponent (Legendre coefficients decaying
like k^-4) is carried as metadata for the rate diagnostics only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointSet


@dataclass(frozen=True)
class KernelSpec:
    """A registered radial profile together with its support and smoothness."""

    family: str
    support_radius: float = 1.0
    smoothness_exponent_gamma: float = 2.0

    def profile(self, r):
        return _PROFILES[self.family](np.asarray(r, dtype=float), self.support_radius)


def _wendland_4_1(r, support):
    u = r / support
    return np.where(u < 1.0, (1.0 - u) ** 4 * (4.0 * u + 1.0), 0.0)


_PROFILES = {"wendland_4_1": _wendland_4_1}


def get_kernel(family="wendland_4_1"):
    if family not in _PROFILES:
        raise KeyError(f"unknown kernel family '{family}' (have {sorted(_PROFILES)})")
    return KernelSpec(family=family)


def chord_from_dot(dot):
    """Euclidean chord distance between unit vectors from their dot product."""
    return np.sqrt(np.clip(2.0 - 2.0 * np.asarray(dot, dtype=float), 0.0, None))


def kernel_eval(spec, a, b):
    """phi(a . b) = h(||a - b||) for unit vectors a, b."""
    dot = float(np.dot(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
    return float(spec.profile(chord_from_dot(dot)))


def kernel_matrix(spec, points):
    """Symmetric kernel matrix over a point set (or query x center cross matrix).

    ``kernel_matrix(spec, points)`` gives the square Gram matrix; use
    :func:`kernel_cross` for rectangular evaluation blocks.
    """
    coords = points.coords if isinstance(points, PointSet) else np.atleast_2d(points)
    g = coords @ coords.T
    m = spec.profile(chord_from_dot(g))
    return 0.5 * (m + m.T)


def kernel_cross(spec, queries, centers):
    """Rectangular matrix phi(q_i . c_j) for queries x centers."""
    q = queries.coords if isinstance(queries, PointSet) else np.atleast_2d(queries)
    c = centers.coords if isinstance(centers, PointSet) else np.atleast_2d(centers)
    return spec.profile(chord_from_dot(q @ c.T))


def bump(u):
    """Order-3 compact bump (1-u)_+^8 (32u^3 + 25u^2 + 8u + 1)."""
    u = np.asarray(u, dtype=float)
    head = np.clip(1.0 - u, 0.0, None) ** 8
    return head * (32.0 * u**3 + 25.0 * u**2 + 8.0 * u + 1.0)


_BUMP_CENTERS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)


def target_function(x):
    """Ground-truth field: six compact bumps centered on the coordinate axes.

    Accepts a single unit vector or an (n, 3) block / PointSet and returns a
    scalar or vector accordingly.
    """
    coords = x.coords if isinstance(x, PointSet) else np.asarray(x, dtype=float)
    single = coords.ndim == 1
    coords = np.atleast_2d(coords)
    chords = chord_from_dot(coords @ _BUMP_CENTERS.T)
    values = bump(chords).sum(axis=1)
    return float(values[0]) if single else values
