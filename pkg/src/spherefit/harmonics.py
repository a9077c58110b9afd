"""Legendre polynomials and real spherical harmonics on S^2.

Harmonics are real, Condon–Shortley-free, and orthonormal with respect to
the surface measure normalized to total mass 1, so the constant harmonic is
identically 1 and the addition theorem reads

    sum_l Y_(k,l)(x) Y_(k,l)(y) = harmonic_dim(2, k) * legendre(k, x . y).
"""

from __future__ import annotations

import math

import numpy as np


def harmonic_dim(d, k):
    """Dimension of the space of degree-k spherical harmonics on S^d."""
    if d < 2:
        raise ValueError("sphere dimension d must be >= 2")
    if k < 0:
        raise ValueError("degree k must be >= 0")
    if k == 0:
        return 1
    return (2 * k + d - 1) * math.comb(k + d - 1, k) // (k + d - 1)


def basis_size(s):
    """Number of harmonics of degree <= s on S^2, i.e. (s+1)^2."""
    return (s + 1) * (s + 1)


def legendre(k, u):
    """Legendre polynomial P_k(u) normalized so that P_k(1) = 1.

    Vectorized over ``u``; raises for arguments outside [-1, 1].
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0 + 1e-15):
        raise ValueError("Legendre argument must lie in [-1, 1]")
    u = np.clip(u, -1.0, 1.0)
    if k < 0:
        raise ValueError("degree k must be >= 0")
    if k == 0:
        return np.ones_like(u) if u.ndim else 1.0
    prev = np.ones_like(u)
    cur = u.copy()
    for j in range(2, k + 1):
        prev, cur = cur, ((2 * j - 1) * u * cur - (j - 1) * prev) / j
    return cur if u.ndim else float(cur)


def _normalized_assoc_legendre(s, z):
    """Associated Legendre functions with 4pi-orthonormal scaling.

    Returns P[k][m] evaluated at z = cos(theta) for 0 <= m <= k <= s, each an
    array shaped like z. Normalization is chosen so that the corresponding
    complex harmonics are orthonormal under the un-normalized surface
    measure; the on-the-fly scaling keeps values O(1) up to high degree.
    """
    z = np.asarray(z, dtype=float)
    sin_theta = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    p = [[None] * (k + 1) for k in range(s + 1)]
    p[0][0] = np.full_like(z, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(1, s + 1):
        p[m][m] = math.sqrt((2 * m + 1) / (2.0 * m)) * sin_theta * p[m - 1][m - 1]
    for m in range(0, s):
        p[m + 1][m] = math.sqrt(2 * m + 3.0) * z * p[m][m]
    for m in range(0, s + 1):
        for k in range(m + 2, s + 1):
            a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = math.sqrt(((2.0 * k + 1.0) * ((k - 1.0) ** 2 - m * m)) / ((2.0 * k - 3.0) * (k * k - m * m)))
            p[k][m] = a * z * p[k - 1][m] - b * p[k - 2][m]
    return p


def harmonic_basis(points, s):
    """Evaluate all real harmonics of degree <= s at the given points.

    Parameters
    ----------
    points : PointSet or (n, 3) array
        Unit vectors on S^2.
    s : int
        Maximum degree.

    Returns
    -------
    (basis_size(s), n) array
        Row (k, l) holds Y_(k,l) at every point; rows are ordered by degree
        k, within a degree as m = 0, then (cos, sin) pairs for m = 1..k.
        Row 0 is the constant 1.
    """
    coords = getattr(points, "coords", None)
    if coords is None:
        coords = np.atleast_2d(np.asarray(points, dtype=float))
    if coords.shape[1] != 3:
        raise ValueError("harmonic basis implemented for S^2 only (3 coordinates)")
    if s < 0:
        raise ValueError("degree bound s must be >= 0")
    x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
    azimuth = np.arctan2(y, x)
    p = _normalized_assoc_legendre(s, z)

    # sqrt(4pi) converts 4pi-orthonormal values to the normalized measure.
    scale = math.sqrt(4.0 * math.pi)
    rows = np.empty((basis_size(s), coords.shape[0]))
    r = 0
    for k in range(s + 1):
        rows[r] = scale * p[k][0]
        r += 1
        for m in range(1, k + 1):
            base = scale * math.sqrt(2.0) * p[k][m]
            rows[r] = base * np.cos(m * azimuth)
            rows[r + 1] = base * np.sin(m * azimuth)
            r += 2
    return rows
