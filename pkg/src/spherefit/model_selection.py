"""Filter-parameter selection by quadrature-weighted cross-validation.

The filter parameter trades stability against fitting accuracy, so it is
chosen a posteriori: fit one model per candidate on the training set,
score each on a validation set with that set's own quadrature weights,

    score(lambda) = sum_i w_i^val (f_lambda(x_i^val) - y_i^val)^2,

and keep the arg-min (ties resolved toward the largest, most stable
parameter). No truncation is applied to the validation predictions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .estimator import LabeledData, WsfSystem
from .filters import FilterSpec
from .kernels import kernel_cross
from .quadrature import QuadratureRule


@dataclass(frozen=True)
class ParameterGrid:
    """Descending positive filter-parameter candidates for one family."""

    candidates: tuple
    family: str

    def __post_init__(self):
        cands = tuple(float(c) for c in self.candidates)
        if not cands:
            raise ValueError("parameter grid must be nonempty")
        if any(c <= 0.0 for c in cands):
            raise ValueError("parameter candidates must be positive")
        if any(a < b for a, b in zip(cands, cands[1:])):
            raise ValueError("parameter candidates must be sorted descending")
        object.__setattr__(self, "candidates", cands)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


def default_grid(n, family):
    """The harmonic grid {1, 1/2, 1/3, ..., 1/ceil(sqrt(n))}.

    For Landweber the reciprocals are the iteration counts, which are
    integers already, so the grid maps onto l = 1 .. ceil(sqrt(n)).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    top = max(1, math.ceil(math.sqrt(n)))
    return ParameterGrid(tuple(1.0 / k for k in range(1, top + 1)), family)


@dataclass(frozen=True)
class CvResult:
    """Chosen parameter with the per-candidate weighted validation scores."""

    chosen_lambda: float
    chosen_index: int
    weighted_scores: np.ndarray
    train_size: int
    val_size: int
    chosen_model: object = None
    models: list | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "weighted_scores", np.asarray(self.weighted_scores, dtype=float)
        )


def split_data(data, fraction, seed):
    """Deterministic random split into (train, validation) by fraction."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    n = len(data)
    n_train = int(round(fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise ValueError(f"split {fraction} of {n} points leaves an empty side")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx, val_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])

    def take(idx):
        return LabeledData(
            points=data.points.subset(idx),
            values=data.values[idx],
            clean_values=None if data.clean_values is None else data.clean_values[idx],
        )

    return take(train_idx), take(val_idx)


def select_parameter(train, val, val_rule, kernel, family, grid=None,
                     train_rule=None, train_system=None, keep_models=False):
    """Weighted cross-validation over a parameter grid for one filter family.

    ``train_rule`` supplies the training quadrature rule (required unless a
    prebuilt ``train_system`` is passed); ``val_rule`` must be built on the
    validation points. Candidates whose fit fails are skipped with a warning;
    if every candidate fails the selection errors out. ``keep_models``
    retains every candidate model on the result for reuse.
    """
    if not isinstance(val_rule, QuadratureRule):
        raise TypeError("val_rule must be a QuadratureRule")
    if not np.array_equal(val_rule.points.coords, val.points.coords):
        raise ValueError("validation rule must be built on the validation points")
    if grid is None:
        grid = default_grid(len(train), family)
    if grid.family != family:
        raise ValueError(f"grid family {grid.family!r} != requested {family!r}")
    if train_system is None:
        if train_rule is None:
            raise ValueError("need train_rule or train_system")
        train_system = WsfSystem(train, kernel, train_rule)
    elif not np.array_equal(train_system.data.values, train.values):
        train_system = train_system.with_values(train.values, train.clean_values)

    # One cross matrix serves every candidate's validation predictions.
    val_cross = kernel_cross(train_system.kernel, val.points,
                             train_system.data.points)
    scores = np.full(len(grid), np.inf)
    models = [None] * len(grid)
    for i, lam in enumerate(grid):
        try:
            model = train_system.fit(FilterSpec(family, lam))
            gap = val_cross @ model.coefficients - val.values
            scores[i] = float(val_rule.weights @ (gap * gap))
            models[i] = model
        except Exception as exc:  # noqa: BLE001 - candidate-level isolation
            warnings.warn(
                f"candidate {family} lambda={lam:g} failed: {exc}", stacklevel=2
            )
    if not np.any(np.isfinite(scores)):
        raise RuntimeError(f"every {family} candidate failed during selection")
    # argmin returns the first minimizer; descending order makes that the
    # largest (most stable) parameter on ties.
    best = int(np.argmin(scores))
    return CvResult(
        chosen_lambda=grid.candidates[best],
        chosen_index=best,
        weighted_scores=scores,
        train_size=len(train),
        val_size=len(val),
        chosen_model=models[best],
        models=models if keep_models else None,
    )
