"""High-pass spectral filters that stabilize weighted kernel systems.

Three families are provided. Writing sigma for an eigenvalue of the weighted
kernel matrix and lambda for the filter parameter:

* ``tikhonov``  g(sigma) = 1 / (sigma + lambda), applied as a shifted solve;
* ``landweber`` g(sigma) = tau * sum_(k=0..l) (1 - tau*sigma)^k with
  lambda = 1/l, applied as l residual-correction iterations;
* ``cutoff``    g(sigma) = 1/sigma for sigma >= lambda else 0, applied on the
  eigendecomposition with the pseudo-inverse convention g(0) = 0.

Each approximates plain inversion as lambda -> 0 while damping the small end
of the spectrum; the grid-based condition checks quantify the damping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import largest_eigenvalue, solve_spd, sym_eig

FAMILIES = ("tikhonov", "landweber", "cutoff")

# Slack multiplier on the tau <= 1/kappa bound: the power-iteration kappa
# estimate approaches from below, so 1/kappa_hat can sit a hair above 1/kappa.
TAU_SLACK = 1.0 + 1e-6


@dataclass(frozen=True)
class FilterSpec:
    """A filter family with its scalar parameter and fixed metadata.

    ``parameter`` is the generic lambda: the Tikhonov shift, the cutoff
    threshold, or 1/l for l Landweber iterations. ``qualification`` and
    ``stability_constant_b`` are reference constants, not inputs to the
    computation.
    """

    family: str
    parameter: float
    qualification: float = field(init=False)
    stability_constant_b: float = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown filter family '{self.family}'")
        if not self.parameter > 0.0:
            raise ValueError("filter parameter must be positive")
        object.__setattr__(
            self, "qualification", 1.0 if self.family == "tikhonov" else math.inf
        )
        object.__setattr__(self, "stability_constant_b", 1.0)

    @property
    def iterations(self):
        """Landweber iteration count l = round(1 / parameter)."""
        if self.family != "landweber":
            raise AttributeError("iterations only defined for landweber filters")
        if math.isinf(self.parameter):
            return 0
        return int(round(1.0 / self.parameter))


def tikhonov(mu):
    return FilterSpec("tikhonov", float(mu))


def landweber(l):
    """Landweber spec from an iteration count l >= 0 (parameter 1/l)."""
    if l < 0:
        raise ValueError("iteration count must be >= 0")
    return FilterSpec("landweber", math.inf if l == 0 else 1.0 / l)


def cutoff(nu):
    return FilterSpec("cutoff", float(nu))


def _landweber_scalar(sigma, l, tau):
    """tau * sum_(k=0..l) (1 - tau*sigma)^k, stable for large l."""
    sigma = np.asarray(sigma, dtype=float)
    base = 1.0 - tau * sigma
    out = np.empty_like(sigma)
    pos = sigma > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1 - base^(l+1)) / sigma via log1p for accuracy near base = 1.
        safe = pos & (base > 0.0)
        out[safe] = -np.expm1((l + 1) * np.log1p(-tau * sigma[safe])) / sigma[safe]
        flip = pos & (base <= 0.0)
        if np.any(flip):
            out[flip] = (1.0 - np.sign(base[flip]) ** (l + 1)
                         * np.abs(base[flip]) ** (l + 1)) / sigma[flip]
    out[~pos] = tau * (l + 1)
    return out


def filter_scalar(spec, sigma, kappa, tau=None):
    """Scalar filter value(s) g_lambda(sigma) on (0, kappa].

    ``tau`` (Landweber step size) must lie in (0, 1/kappa]; other families
    ignore it. Vectorized over ``sigma``.
    """
    sigma = np.asarray(sigma, dtype=float)
    single = sigma.ndim == 0
    sigma = np.atleast_1d(sigma)
    if spec.family == "tikhonov":
        out = 1.0 / (sigma + spec.parameter)
    elif spec.family == "cutoff":
        out = np.where(sigma >= spec.parameter, 1.0 / np.where(sigma > 0, sigma, 1.0), 0.0)
    else:
        if tau is None or not (0.0 < tau <= TAU_SLACK / kappa):
            raise ValueError(
                f"landweber step tau={tau} must lie in (0, 1/kappa] for kappa={kappa}"
            )
        out = _landweber_scalar(sigma, spec.iterations, tau)
    return float(out[0]) if single else out


def apply_filter(spec, psi, rhs, tau=None, eig=None):
    """Apply g_lambda to a symmetric PSD matrix: returns g_lambda(psi) @ rhs.

    Realizations per family: Tikhonov is a shifted SPD solve, Landweber runs
    its iteration (no factorization), cutoff uses the eigendecomposition
    (pass a precomputed ``eig`` to reuse one across parameters). For
    Landweber, ``tau`` defaults to 1/kappa_hat from power iteration.
    """
    psi = np.asarray(psi, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if spec.family == "tikhonov":
        x, _ = solve_spd(psi, rhs, shift=spec.parameter)
        return x
    if spec.family == "cutoff":
        if eig is None:
            eig = sym_eig(psi)
        vals = eig.eigenvalues
        inv = np.where(
            (vals >= spec.parameter) & (vals > 0.0),
            1.0 / np.where(vals > 0.0, vals, 1.0),
            0.0,
        )
        return eig.eigenvectors @ (inv * (eig.eigenvectors.T @ rhs))
    # Landweber iteration: u_0 = tau*rhs, u_(k+1) = u_k + tau*(rhs - psi u_k).
    if tau is None:
        kappa = largest_eigenvalue(psi)
        tau = 1.0 / kappa if kappa > 0 else 1.0
    u = tau * rhs
    for _ in range(spec.iterations):
        u = u + tau * (rhs - psi @ u)
    return u


@dataclass(frozen=True)
class FilterConditionReport:
    """Grid suprema quantifying the high-pass filter conditions.

    ``sup_g_times_lambda`` bounds lambda * |g| (the 1/lambda growth cap),
    ``sup_g_sigma`` bounds |g(sigma) * sigma| (spectral contraction), and
    ``residual_bounds`` maps exponents v to the constants bounding
    |1 - g(sigma) sigma| sigma^v / lambda^v.
    """

    family: str
    parameter: float
    sup_g_times_lambda: float
    sup_g_sigma: float
    residual_bounds: dict

    @property
    def stability_bound(self):
        """The empirical b: max of the two sup conditions."""
        return max(self.sup_g_times_lambda, self.sup_g_sigma)


def check_filter_conditions(spec, kappa, grid_size=10000):
    """Evaluate the filter conditions numerically on a log grid of sigma.

    The grid spans (kappa * 1e-12, kappa]. For Landweber the step size
    tau = l / ((l+1) * kappa) is used; it satisfies tau <= 1/kappa and
    attains the sharp stability constant lambda * sup|g| = 1/kappa.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    sigma = np.logspace(math.log10(kappa) - 12.0, math.log10(kappa), grid_size)
    lam = spec.parameter
    tau = None
    if spec.family == "landweber":
        l = spec.iterations
        if l == 0:
            raise ValueError("condition checks need at least one landweber iteration")
        tau = l / ((l + 1.0) * kappa)
    g = filter_scalar(spec, sigma, kappa, tau)
    residual = np.abs(1.0 - g * sigma)
    exponents = [0.0, 0.5, 1.0]
    if spec.family in ("landweber", "cutoff"):
        exponents.append(2.0)
    bounds = {v: float(np.max(residual * sigma**v) / lam**v) for v in exponents}
    return FilterConditionReport(
        family=spec.family,
        parameter=lam,
        sup_g_times_lambda=float(np.max(np.abs(g)) * lam),
        sup_g_sigma=float(np.max(np.abs(g * sigma))),
        residual_bounds=bounds,
    )
