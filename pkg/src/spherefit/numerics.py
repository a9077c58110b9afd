"""Dense symmetric linear algebra shared by the quadrature and filter code.

Factorizations are delegated to LAPACK through numpy/scipy; the module owns
the contracts (symmetry checks, descending eigenvalue order, conditioning
fallbacks) plus a small active-set nonnegative least squares solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class AsymmetricMatrixError(ValueError):
    """Input that was required to be symmetric is not."""


def _require_symmetric(a, tol_factor=1e-10):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.abs(a).max()) if a.size else 0.0
    asym = float(np.abs(a - a.T).max())
    if asym > tol_factor * max(scale, 1e-300):
        raise AsymmetricMatrixError(
            f"matrix asymmetry {asym:.3e} exceeds {tol_factor:g} * max entry {scale:.3e}"
        )
    return 0.5 * (a + a.T)


def solve_spd(a, b, shift=0.0):
    """Solve (A + shift*I) x = b for symmetric positive semidefinite A.

    Returns ``(x, ill_conditioned)``. Cholesky is attempted first; if it
    fails (or leaves a poor residual) the solve falls back to an
    eigenvalue-based pseudo-inverse and flags the result instead of raising,
    so callers can surface a conditioning warning and continue.
    """
    a = _require_symmetric(a)
    b = np.asarray(b, dtype=float)
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    n = a.shape[0]
    m = a if shift == 0.0 else a + shift * np.eye(n)
    try:
        c, lower = scipy.linalg.cho_factor(m, check_finite=False)
        x = scipy.linalg.cho_solve((c, lower), b, check_finite=False)
        resid = np.linalg.norm(m @ x - b)
        if resid <= 1e-8 * max(np.linalg.norm(b), 1e-300):
            return x, False
    except scipy.linalg.LinAlgError:
        pass
    # Semidefinite or numerically singular: pseudo-solve on the spectrum.
    vals, vecs = np.linalg.eigh(m)
    cutoff = np.finfo(float).eps * max(float(vals.max(initial=0.0)), 0.0) * n
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    x = vecs @ (inv * (vecs.T @ b))
    return x, True


@dataclass(frozen=True)
class SymmetricEigenDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        q, lam = self.eigenvectors, self.eigenvalues
        return (q * lam) @ q.T


def sym_eig(a):
    """Full eigendecomposition of a symmetric matrix, descending order."""
    a = _require_symmetric(a)
    vals, vecs = np.linalg.eigh(a)
    return SymmetricEigenDecomposition(
        eigenvalues=vals[::-1].copy(), eigenvectors=vecs[:, ::-1].copy()
    )


def condition_number(a):
    """2-norm condition number via the eigenvalue ratio of a symmetric PSD matrix."""
    vals = sym_eig(a).eigenvalues
    top = float(vals[0])
    if top <= 0.0:
        return math.inf
    bottom = max(float(vals[-1]), np.finfo(float).eps * top)
    return top / bottom


def largest_eigenvalue(a, tol=1e-8, max_iter=10000):
    """Top eigenvalue of a symmetric PSD matrix by power iteration.

    Iterates until the Rayleigh quotient's relative change drops below
    ``tol``; the estimate approaches the true value from below.
    """
    a = _require_symmetric(a)
    n = a.shape[0]
    if n == 0 or not np.any(a):
        return 0.0
    # Deterministic start with a small index-dependent tilt so the start is
    # never orthogonal to the top eigenvector of structured matrices.
    v = np.ones(n) + 1e-3 * np.sin(np.arange(1, n + 1))
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_estimate = float(v @ (a @ v))
        if abs(new_estimate - estimate) <= tol * max(abs(new_estimate), 1e-300):
            return new_estimate
        estimate = new_estimate
    return estimate


class NnlsIterationWarning(RuntimeWarning):
    """Active-set iteration cap reached; best iterate returned."""


def nnls(a, b, start_passive=None, kkt_tol=1e-10, max_iter=None):
    """Lawson–Hanson active-set nonnegative least squares.

    Solves ``min ||A x - b||_2 s.t. x >= 0``. ``start_passive`` optionally
    seeds the passive (unconstrained) index set, which makes dense solutions
    cheap to reach; correctness does not depend on the seed because every
    passive-set solve is sign-checked. If the iteration cap (default
    10 * n_cols) is exceeded the best iterate so far is returned under
    ``NnlsIterationWarning``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("nnls requires finite entries")
    m, n = a.shape
    gram = a.T @ a
    atb = a.T @ b

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    if start_passive is not None:
        passive[np.asarray(start_passive)] = True

    def solve_passive():
        idx = np.flatnonzero(passive)
        if idx.size == 0:
            return np.zeros(0), idx
        sub = gram[np.ix_(idx, idx)]
        try:
            z = scipy.linalg.solve(sub, atb[idx], assume_a="pos", check_finite=False)
        except scipy.linalg.LinAlgError:
            z = np.linalg.lstsq(sub, atb[idx], rcond=None)[0]
        return z, idx

    max_outer = 10 * n if max_iter is None else max_iter
    best_x = x
    best_obj = float(np.dot(b, b))
    scale = float(np.abs(atb).max(initial=0.0)) or 1.0

    for _ in range(max_outer):
        # Inner loop: shrink the passive set until its solve is nonnegative.
        for _ in range(max_outer):
            z, idx = solve_passive()
            if idx.size == 0 or np.all(z >= 0.0):
                break
            # Standard interpolation step toward feasibility.
            xi = x[idx]
            neg = z < 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(neg, xi / (xi - z), np.inf)
            alpha = float(np.min(steps))
            x[idx] = xi + alpha * (z - xi)
            passive[idx[x[idx] <= 0.0]] = False
            x[~passive] = 0.0
        x = np.zeros(n)
        if idx.size:
            x[idx] = z
        grad = atb - gram @ x
        obj = float(x @ gram @ x - 2.0 * x @ atb + b @ b)
        if obj < best_obj:
            best_obj, best_x = obj, x.copy()
        candidates = np.flatnonzero(~passive & (grad > kkt_tol * scale))
        if candidates.size == 0:
            return x
        passive[candidates[np.argmax(grad[candidates])]] = True

    warnings.warn(
        "nnls iteration cap reached; returning best iterate",
        NnlsIterationWarning,
        stacklevel=2,
    )
    return best_x
