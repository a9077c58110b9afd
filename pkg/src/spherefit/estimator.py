"""Kernel interpolation and its weighted spectral-filter stabilization.

Plain interpolation solves Phi a = y and falls apart when Phi is badly
conditioned. The stabilized path rescales by the quadrature weights,
Psi = W^(1/2) Phi W^(1/2), applies a spectral filter in place of inversion,

    a = W^(1/2) g_lambda(Psi) W^(1/2) y,

and reduces to interpolation as the filter parameter goes to zero. Both
paths produce a :class:`FittedModel` that evaluates anywhere on the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .filters import FilterSpec, apply_filter, filter_scalar
from .geometry import PointSet
from .kernels import KernelSpec, get_kernel, kernel_cross, kernel_matrix
from .numerics import largest_eigenvalue, solve_spd, sym_eig
from .quadrature import QuadratureRule

# Eigen-based diagnostics are skipped above this size (cost, not correctness).
DIAGNOSTICS_MAX_N = 2500


@dataclass(frozen=True)
class LabeledData:
    """Sample points with observed values and optional noise-free values."""

    points: PointSet
    values: np.ndarray
    clean_values: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.points),):
            raise ValueError("one value per point required")
        object.__setattr__(self, "values", values)
        if self.clean_values is not None:
            clean = np.asarray(self.clean_values, dtype=float)
            if clean.shape != values.shape:
                raise ValueError("clean_values must match values in length")
            object.__setattr__(self, "clean_values", clean)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class ConditioningReport:
    """Spectral extremes of the operative system plus bookkeeping flags.

    ``cnkm`` is the condition number of the map actually applied to the
    data: Phi for interpolation, the filtered inverse on its retained
    spectrum for the stabilized path. ``None`` fields mean diagnostics were
    skipped for size.
    """

    cnkm: float | None = None
    sigma_min: float | None = None
    sigma_max: float | None = None
    clamped_weight_count: int = 0
    solver_warning: bool = False
    skipped: bool = False


@dataclass(frozen=True)
class FittedModel:
    """Kernel expansion f = sum_i a_i phi(x_i . *) with fit diagnostics."""

    kernel: KernelSpec
    centers: PointSet
    coefficients: np.ndarray
    method_tag: str
    diagnostics: ConditioningReport = ConditioningReport()

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=float)
        if coeff.shape != (len(self.centers),):
            raise ValueError("one coefficient per center required")
        object.__setattr__(self, "coefficients", coeff)

    def predict(self, queries):
        return kernel_cross(self.kernel, queries, self.centers) @ self.coefficients

    def __call__(self, queries):
        return self.predict(queries)


def evaluate(model, queries):
    """Evaluate a fitted model at query points."""
    return model.predict(queries)


def conditioning(matrix):
    """Eigen-based conditioning report for a symmetric PSD matrix."""
    n = matrix.shape[0]
    if n > _diag_limit():
        return ConditioningReport(skipped=True)
    vals = sym_eig(matrix).eigenvalues
    top = float(vals[0])
    bottom = float(vals[-1])
    eps_floor = np.finfo(float).eps * max(top, 0.0)
    cnkm = np.inf if top <= 0 else top / max(bottom, eps_floor)
    return ConditioningReport(cnkm=cnkm, sigma_min=bottom, sigma_max=top)


def _diag_limit():
    return DIAGNOSTICS_MAX_N


def fit_ki(data, kernel=None):
    """Minimal-norm kernel interpolant: coefficients solve Phi a = y.

    Ill conditioning is reported in the diagnostics, not raised: the failure
    mode of plain interpolation on noisy data is one of the things this
    package exists to measure.
    """
    kernel = kernel or get_kernel()
    phi = kernel_matrix(kernel, data.points)
    coeff, warned = solve_spd(phi, data.values)
    diag = conditioning(phi)
    diag = ConditioningReport(
        cnkm=diag.cnkm,
        sigma_min=diag.sigma_min,
        sigma_max=diag.sigma_max,
        solver_warning=warned,
        skipped=diag.skipped,
    )
    return FittedModel(
        kernel=kernel,
        centers=data.points,
        coefficients=coeff,
        method_tag="ki",
        diagnostics=diag,
    )


class WsfSystem:
    """Weighted kernel system prepared once and filtered many times.

    Precomputes Psi = W^(1/2) Phi W^(1/2) for a data/rule pair and caches
    the eigendecomposition and top-eigenvalue estimate so that parameter
    sweeps (cross-validation, stability curves) pay for them once.
    ``with_values`` swaps in new observations (fresh noise draws) while
    sharing the matrix and its spectral cache.
    """

    def __init__(self, data, kernel, rule):
        if not isinstance(rule, QuadratureRule):
            raise TypeError("rule must be a QuadratureRule")
        if rule.points is not data.points and not np.array_equal(
            rule.points.coords, data.points.coords
        ):
            raise ValueError("quadrature rule must be built on the data points")
        self.data = data
        self.kernel = kernel or get_kernel()
        self.rule = rule
        self.sqrt_w = np.sqrt(rule.weights)
        phi = kernel_matrix(self.kernel, data.points)
        self.psi = self.sqrt_w[:, None] * phi * self.sqrt_w[None, :]
        self._spectral = {"eig": None, "kappa": None}

    def with_values(self, values, clean_values=None):
        """Same matrix system, different observations; caches are shared."""
        clone = object.__new__(WsfSystem)
        clone.data = LabeledData(
            points=self.data.points, values=values, clean_values=clean_values
        )
        clone.kernel = self.kernel
        clone.rule = self.rule
        clone.sqrt_w = self.sqrt_w
        clone.psi = self.psi
        clone._spectral = self._spectral
        return clone

    @property
    def eig(self):
        if self._spectral["eig"] is None:
            self._spectral["eig"] = sym_eig(self.psi)
        return self._spectral["eig"]

    @property
    def kappa(self):
        if self._spectral["kappa"] is None:
            eig = self._spectral["eig"]
            if eig is not None:
                self._spectral["kappa"] = float(eig.eigenvalues[0])
            else:
                self._spectral["kappa"] = largest_eigenvalue(self.psi)
        return self._spectral["kappa"]

    def tau(self):
        """Landweber step 1/kappa_hat (fastest contraction allowed)."""
        kappa = self.kappa
        return 1.0 / kappa if kappa > 0 else 1.0

    def _diagnostics(self, spec):
        n = self.psi.shape[0]
        if n > _diag_limit():
            return ConditioningReport(
                skipped=True, clamped_weight_count=self.rule.clamped_count
            )
        vals = self.eig.eigenvalues
        tau = self.tau() if spec.family == "landweber" else None
        g = filter_scalar(spec, np.clip(vals, 0.0, None), max(self.kappa, 1e-300), tau)
        g = np.atleast_1d(g)
        positive = g[g > 0.0]
        cnkm = float(positive.max() / positive.min()) if positive.size else np.inf
        return ConditioningReport(
            cnkm=cnkm,
            sigma_min=float(vals[-1]),
            sigma_max=float(vals[0]),
            clamped_weight_count=self.rule.clamped_count,
        )

    def fit(self, spec, values=None, tag=None):
        """Filtered fit: a = W^(1/2) g_lambda(Psi) W^(1/2) values."""
        if not isinstance(spec, FilterSpec):
            raise TypeError("spec must be a FilterSpec")
        y = self.data.values if values is None else np.asarray(values, dtype=float)
        rhs = self.sqrt_w * y
        if spec.family == "landweber":
            filtered = apply_filter(spec, self.psi, rhs, tau=self.tau())
        elif spec.family == "cutoff":
            filtered = apply_filter(spec, self.psi, rhs, eig=self.eig)
        else:
            filtered = apply_filter(spec, self.psi, rhs)
        coeff = self.sqrt_w * filtered
        return FittedModel(
            kernel=self.kernel,
            centers=self.data.points,
            coefficients=coeff,
            method_tag=tag or f"wsf+{spec.family}+{spec.parameter:g}",
            diagnostics=self._diagnostics(spec),
        )


def fit_wsf(data, kernel, rule, spec):
    """One-shot weighted spectral-filter fit (see :class:`WsfSystem`)."""
    return WsfSystem(data, kernel, rule).fit(spec)


def fit_wsf_noise_free(data, kernel, rule, spec):
    """The same filtered fit fed the noise-free values, for error splitting."""
    if data.clean_values is None:
        raise ValueError("noise-free fit requires clean_values")
    system = WsfSystem(data, kernel, rule)
    return system.fit(
        spec,
        values=data.clean_values,
        tag=f"wsf-clean+{spec.family}+{spec.parameter:g}",
    )


def save_model(model, path):
    """Write centers and coefficients as `x y z a` rows with metadata header."""
    lines = [
        f"# kernel={model.kernel.family}",
        f"# method={model.method_tag}",
        f"# param={_model_param(model):g}",
    ]
    for (x, y, z), a in zip(model.centers.coords, model.coefficients):
        lines.append(f"{x:.17g} {y:.17g} {z:.17g} {a:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def _model_param(model):
    parts = model.method_tag.split("+")
    return float(parts[-1]) if len(parts) == 3 else 0.0


def load_model(path):
    """Read a model written by :func:`save_model`."""
    path = Path(path)
    meta = {}
    coords, coeffs = [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text.lstrip("#").strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            parts = text.split()
            if len(parts) != 4:
                raise ValueError(f"{path.name}:{lineno}: expected `x y z a` row")
            coords.append([float(p) for p in parts[:3]])
            coeffs.append(float(parts[3]))
    kernel = get_kernel(meta.get("kernel", "wendland_4_1"))
    return FittedModel(
        kernel=kernel,
        centers=PointSet(np.array(coords)),
        coefficients=np.array(coeffs),
        method_tag=meta.get("method", "ki"),
    )
