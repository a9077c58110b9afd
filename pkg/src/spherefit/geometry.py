"""Point sets on the unit sphere: construction, statistics, samplers.

All coordinates are direction cosines in R^(d+1); only d = 2 (the ordinary
sphere S^2 in R^3) is exercised by the samplers and file loaders, but the
distance and statistics code is dimension-agnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

UNIT_NORM_TOL = 1e-12
# Loader rejects rows whose norm is off by more than this before renormalizing.
FILE_NORM_TOL = 1e-6


class PointFileError(ValueError):
    """Raised when a point file cannot be parsed."""


def normalize_rows(coords):
    """Return a copy of ``coords`` with every row scaled to unit 2-norm.

    Rows already within 1e-13 of unit norm pass through bit-identically so
    that exact symmetries (identity rotations, file round trips) survive.
    """
    coords = np.array(coords, dtype=float)
    norms = np.linalg.norm(coords, axis=-1, keepdims=True)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("cannot normalize zero or non-finite vectors")
    off = np.abs(norms - 1.0) > 1e-13
    if np.any(off):
        rows = off[..., 0] if coords.ndim > 1 else off
        coords[rows] = coords[rows] / norms[rows]
    return coords


class PointSet:
    """Immutable ordered collection of distinct unit vectors.

    Parameters
    ----------
    coords : (n, d+1) array
        Direction vectors; renormalized on construction and rejected if any
        norm is zero. Rows must be pairwise distinct.
    """

    def __init__(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 2:
            raise ValueError("PointSet needs an (n, d+1) array with n >= 1, d >= 1")
        coords = normalize_rows(coords)
        self._coords = coords
        self._coords.setflags(write=False)
        self._check_distinct()
        self._mesh_cache = {}
        self._separation = None

    def _check_distinct(self):
        # Exact-duplicate scan via lexicographic sort; geodesic distance is
        # zero only for bitwise-equal unit vectors.
        c = self._coords
        if len(c) < 2:
            return
        order = np.lexsort(c.T)
        equal = np.all(c[order[1:]] == c[order[:-1]], axis=1)
        if np.any(equal):
            i = int(np.argmax(equal))
            raise ValueError(
                f"duplicate points at sorted positions {order[i]} and {order[i + 1]}"
            )

    @property
    def coords(self):
        return self._coords

    @property
    def ambient_dim(self):
        """Sphere dimension d (points live in R^(d+1))."""
        return self._coords.shape[1] - 1

    def __len__(self):
        return self._coords.shape[0]

    def __iter__(self):
        return iter(self._coords)

    def __getitem__(self, idx):
        return self._coords[idx]

    def subset(self, indices):
        return PointSet(self._coords[np.asarray(indices)])

    def mesh_norm(self, probe_resolution=400):
        """Covering radius in radians, approximated on a deterministic grid.

        Probes a Fibonacci equal-area grid of at least ``probe_resolution**2``
        points; the result is a lower bound of the true covering radius and
        converges from below as the resolution grows.
        """
        if probe_resolution < 10:
            raise ValueError("probe_resolution must be >= 10")
        if self.ambient_dim != 2:
            raise NotImplementedError("mesh norm probing implemented for S^2 only")
        key = int(probe_resolution)
        if key not in self._mesh_cache:
            probes = fibonacci_grid(key * key)
            self._mesh_cache[key] = _max_min_distance(probes, self._coords)
        return self._mesh_cache[key]

    def separation_radius(self):
        """Half the minimal pairwise geodesic distance (exact, O(n^2))."""
        if len(self) < 2:
            raise ValueError("separation radius needs at least 2 points")
        if self._separation is None:
            g = self._coords @ self._coords.T
            np.fill_diagonal(g, -1.0)
            self._separation = 0.5 * math.acos(min(float(g.max()), 1.0))
        return self._separation

    def stats(self, probe_resolution=400):
        h = self.mesh_norm(probe_resolution)
        q = self.separation_radius()
        return GeometryStats(mesh_norm=h, separation_radius=q, mesh_ratio=h / q)


@dataclass(frozen=True)
class GeometryStats:
    """Covering radius, packing radius and their ratio, all in radians."""

    mesh_norm: float
    separation_radius: float
    mesh_ratio: float


def geodesic_distance(a, b):
    """Great-circle distance in [0, pi] between unit vectors a and b."""
    d = float(np.dot(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
    return math.acos(max(-1.0, min(1.0, d)))


def fibonacci_grid(n):
    """Deterministic equal-area grid of n points on S^2 (golden-angle spiral)."""
    n = int(n)
    if n < 1:
        raise ValueError("need n >= 1 grid points")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    azimuth = math.pi * (3.0 - math.sqrt(5.0)) * i
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    return np.column_stack([r * np.cos(azimuth), r * np.sin(azimuth), z])


def _max_min_distance(probes, centers, block=65536):
    """max over probes of min over centers of geodesic distance."""
    worst_dot = 1.0  # min over probes of (max over centers of dot)
    for start in range(0, len(probes), block):
        dots = probes[start : start + block] @ centers.T
        worst_dot = min(worst_dot, float(dots.max(axis=1).min()))
    return math.acos(max(-1.0, min(1.0, worst_dot)))


def sample_random(n, seed):
    """Uniform points on S^2: z ~ U[-1,1], azimuth ~ U[0,2pi), seeded.

    Draws two uniforms per point from ``numpy.random.default_rng(seed)`` so
    the stream is reproducible and independent of numpy's Gaussian layout.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    rng = np.random.default_rng(seed)
    u = rng.random((n, 2))
    z = 2.0 * u[:, 0] - 1.0
    azimuth = 2.0 * math.pi * u[:, 1]
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    return PointSet(np.column_stack([r * np.cos(azimuth), r * np.sin(azimuth), z]))


def load_points(source):
    """Parse a whitespace-separated ``x y z`` point file.

    Lines starting with ``#`` and blank lines are skipped. Every row must be
    within 1e-6 of unit norm before renormalization.
    """
    path = Path(source)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 3:
                raise PointFileError(
                    f"{path.name}:{lineno}: expected 3 coordinates, got {len(parts)}"
                )
            try:
                xyz = [float(p) for p in parts]
            except ValueError as exc:
                raise PointFileError(f"{path.name}:{lineno}: {exc}") from None
            norm = math.sqrt(sum(v * v for v in xyz))
            if abs(norm - 1.0) > FILE_NORM_TOL:
                raise PointFileError(
                    f"{path.name}:{lineno}: vector norm {norm:.8f} is not within "
                    f"{FILE_NORM_TOL:g} of 1"
                )
            rows.append(xyz)
    if not rows:
        raise PointFileError(f"{path.name}: no points found")
    return PointSet(np.array(rows))


def load_tdesign(source, t, drop_poles=False):
    """Load a spherical t-design point file (size ~ t^2/2 + t/2 + O(1)).

    ``drop_poles`` removes the two exact pole points (0, 0, +-1) when the
    design contains them, as needed by the geomagnetic ingestion recipe.
    """
    if t < 1:
        raise ValueError("design strength t must be >= 1")
    points = load_points(source)
    if drop_poles:
        keep = np.abs(points.coords[:, 2]) < 1.0 - 1e-12
        if int((~keep).sum()) != 2:
            raise ValueError(
                f"expected exactly 2 pole points to drop, found {int((~keep).sum())}"
            )
        points = PointSet(points.coords[keep])
    return points


def rotation_about_z(k):
    """Rotation matrix by angle k*pi/20 about the z axis."""
    angle = k * math.pi / 20.0
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotated_design(base, k):
    """Union of the base set with its first k rotations about the z axis.

    The base is the 120-point design used by the clustered-sampling
    experiments; the result has 120*(k+1) points for 0 <= k <= 19 (larger k
    would alias whole copies onto each other).
    """
    if len(base) != 120:
        raise ValueError(f"rotation base must have 120 points, got {len(base)}")
    if not 0 <= k <= 19:
        raise ValueError(f"rotation count k must be in [0, 19], got {k}")
    blocks = [base.coords @ rotation_about_z(j).T for j in range(k + 1)]
    return PointSet(np.vstack(blocks))
