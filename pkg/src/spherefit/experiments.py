"""The simulation harness: noise, metrics, scenarios, ingestion, persistence.

Six scenarios mirror the study this package operationalizes, at desk scale:

* sim1 - filter-parameter sweeps splitting the error into stability and
  fitting parts, with conditioning diagnostics, per sampling mechanism;
* sim2 - sampling mechanisms (uniform random vs design) across noise levels;
* sim3 - weighted cross-validation versus an oracle tuned on the test set;
* sim4 - RMSE against training size for interpolation and filtered fits;
* sim5 - the same sweep scored in the sup norm (bound overlays are drawn by
  the plotting scripts from the recorded parameters);
* sim6 - single-trial prediction dumps over a dense test set for rendering.

Each scenario emits :class:`ExperimentRecord` rows (one per method, size,
noise level and trial, plus trial -1 averages) that serialize to the CSV
schema documented in the README. Reruns with the same config are
byte-identical; wall-clock timings are recorded only when enabled because
they would break that.
"""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .estimator import FittedModel, LabeledData, WsfSystem, conditioning
from .filters import FilterSpec
from .geometry import PointSet, load_tdesign, rotated_design, sample_random
from .kernels import get_kernel, kernel_cross, kernel_matrix, target_function
from .model_selection import ParameterGrid, default_grid, select_parameter
from .numerics import solve_spd
from .quadrature import (
    InfeasibleDegreeError,
    compute_weights,
    design_rule,
    max_feasible_degree,
)

FAMILIES = ("tikhonov", "landweber", "cutoff")


# ---------------------------------------------------------------------------
# noise and metrics

@dataclass(frozen=True)
class NoiseSpec:
    """Truncated Gaussian noise: N(0, std_dev^2) clamped to +-truncation."""

    std_dev: float
    truncation: float = 2.5
    seed: int = 0
    kind: str = "truncated_gaussian"

    def __post_init__(self):
        if self.std_dev < 0:
            raise ValueError("noise level must be >= 0")
        if self.kind != "truncated_gaussian":
            raise ValueError(f"unknown noise kind '{self.kind}'")


def gen_noise(spec, n):
    """Draw n noise values; out-of-bound draws are clamped, not resampled."""
    if spec.std_dev == 0.0:
        return np.zeros(n)
    draws = np.random.default_rng(spec.seed).normal(0.0, spec.std_dev, size=n)
    return np.clip(draws, -spec.truncation, spec.truncation)


def rmse(predictions, targets):
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"length mismatch {predictions.shape} vs {targets.shape}")
    gap = predictions - targets
    return float(np.sqrt(np.mean(gap * gap)))


def sup_err(predictions, targets):
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"length mismatch {predictions.shape} vs {targets.shape}")
    return float(np.abs(predictions - targets).max())


def clamp_nonnegative(values):
    """Truncate negative predictions at zero (wind-speed convention)."""
    return np.clip(np.asarray(values, dtype=float), 0.0, None)


def make_testset(n, seed):
    """Test inputs: uniform in the cube [-1,1]^3 pushed onto the sphere.

    This is deliberately not sphere-uniform (corner directions are slightly
    favored); zero vectors are redrawn. Returns (points, target values).
    """
    if n < 1:
        raise ValueError("need n >= 1 test points")
    rng = np.random.default_rng(seed)
    rows = np.empty((n, 3))
    have = 0
    while have < n:
        block = rng.uniform(-1.0, 1.0, size=(n - have, 3))
        norms = np.linalg.norm(block, axis=1)
        block = block[norms > 0.0]
        rows[have : have + len(block)] = block
        have += len(block)
    points = PointSet(rows)
    return points, target_function(points)


# ---------------------------------------------------------------------------
# records and persistence

RESULT_COLUMNS = (
    "scenario", "sampler", "n_train", "delta", "method", "param", "trial",
    "rmse", "sup_err", "cnkm", "stability_err", "fitting_err", "wall_ms",
)


@dataclass(frozen=True)
class ExperimentRecord:
    scenario: str
    sampler: str
    n_train: int
    delta: float
    method: str
    param: float
    trial: int
    rmse: float
    sup_err: float
    cnkm: float | None = None
    stability_err: float | None = None
    fitting_err: float | None = None
    wall_ms: int = 0


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.12g}"
    return str(value)


def write_records(records, path):
    """Write records to CSV under the documented schema."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in RESULT_COLUMNS])


def read_records(path):
    """Read a results CSV back into ExperimentRecord rows."""
    out = []
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"results CSV missing columns: {sorted(missing)}")
        for row in reader:
            out.append(
                ExperimentRecord(
                    scenario=row["scenario"],
                    sampler=row["sampler"],
                    n_train=int(row["n_train"]),
                    delta=float(row["delta"]),
                    method=row["method"],
                    param=float(row["param"]) if row["param"] else math.nan,
                    trial=int(row["trial"]),
                    rmse=float(row["rmse"]) if row["rmse"] else math.nan,
                    sup_err=float(row["sup_err"]) if row["sup_err"] else math.nan,
                    cnkm=float(row["cnkm"]) if row["cnkm"] else None,
                    stability_err=(
                        float(row["stability_err"]) if row["stability_err"] else None
                    ),
                    fitting_err=(
                        float(row["fitting_err"]) if row["fitting_err"] else None
                    ),
                    wall_ms=int(row["wall_ms"]) if row["wall_ms"] else 0,
                )
            )
    return out


# ---------------------------------------------------------------------------
# data files

def data_dir():
    """Directory holding the shipped design files (env override first)."""
    override = os.environ.get("SPHEREFIT_DATA_DIR")
    if override:
        return Path(override)
    return Path(str(resources.files("spherefit") / "data"))


def design_path(t):
    path = data_dir() / f"tdesign_t{t:03d}.txt"
    if not path.exists():
        have = sorted(p.name for p in data_dir().glob("tdesign_t*.txt"))
        raise FileNotFoundError(f"no design file for t={t}; available: {have}")
    return path


def load_design(t, drop_poles=False):
    return load_tdesign(design_path(t), t, drop_poles=drop_poles)


# ---------------------------------------------------------------------------
# scenario configuration

@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs shared by every scenario; per-scenario defaults come from
    :func:`default_config`."""

    samplers: tuple = ("tdesign",)
    tdesign_ts: tuple = (47,)
    random_sizes: tuple = (1130,)
    rotation_copies: tuple = (10,)
    deltas: tuple = (0.5,)
    families: tuple = FAMILIES
    trials: int = 5
    seed: int = 2024
    test_size: int = 4000
    validation_t: int = 45
    quad_degree: int | None = None
    grids: dict = field(default_factory=dict)
    dump_dir: str | None = None
    timing: bool = False
    threads: int = 1


def default_config(scenario, **overrides):
    base = {
        "sim1": ScenarioConfig(
            samplers=("tdesign", "random", "rotation"), deltas=(0.5,)
        ),
        "sim2": ScenarioConfig(
            samplers=("tdesign", "random"), deltas=(0.3, 0.1, 0.01)
        ),
        "sim3": ScenarioConfig(samplers=("tdesign", "random"), deltas=(0.5,)),
        "sim4": ScenarioConfig(
            samplers=("tdesign",), tdesign_ts=(7, 15, 31, 47),
            random_sizes=(34, 122, 506, 1130), rotation_copies=(2, 4, 7, 10),
            deltas=(0.1, 0.3, 0.5),
        ),
        "sim5": ScenarioConfig(
            samplers=("tdesign",), tdesign_ts=(7, 15, 31, 47),
            deltas=(0.1, 0.3, 0.5),
        ),
        "sim6": ScenarioConfig(
            samplers=("tdesign",), deltas=(0.1, 0.3, 0.5), trials=1,
            test_size=6000,
        ),
    }[scenario]
    return replace(base, **overrides) if overrides else base


def _training_cells(config):
    """(sampler_tag, label, builder) per configured sampler and size.

    Builders construct (points, rule) lazily so a cell whose quadrature
    degree is infeasible can be skipped without aborting the run.
    """
    cells = []
    for sampler in config.samplers:
        if sampler == "tdesign":
            for t in config.tdesign_ts:
                def build(t=t):
                    points = load_design(t)
                    return points, design_rule(points, t)
                cells.append(("tdesign", f"t={t}", build))
        elif sampler == "random":
            for n in config.random_sizes:
                def build(n=n):
                    points = sample_random(n, seed=config.seed + 13 * n)
                    return points, _scattered_rule(points, config)
                cells.append(("random", f"n={n}", build))
        elif sampler == "rotation":
            for copies in config.rotation_copies:
                def build(copies=copies):
                    base = load_design(15, drop_poles=True)
                    points = rotated_design(base, copies - 1)
                    return points, _scattered_rule(points, config)
                cells.append(("rotation", f"copies={copies}", build))
        else:
            raise ValueError(f"unknown sampler '{sampler}'")
    return cells


def _scattered_rule(points, config):
    degree = config.quad_degree
    if degree is None:
        degree = max_feasible_degree(points)
    return compute_weights(points, degree)


def _noise_seed(config, delta_index, trial, salt=0):
    return config.seed + 100003 * salt + 7919 * delta_index + trial


def _labeled(points, delta, seed):
    clean = target_function(points)
    noise = gen_noise(NoiseSpec(std_dev=delta, seed=seed), len(points))
    return LabeledData(points=points, values=clean + noise, clean_values=clean)


def _grid_for(config, family, n_train):
    if family in config.grids:
        spec = config.grids[family]
        if isinstance(spec, ParameterGrid):
            return spec
        return ParameterGrid(tuple(sorted((float(x) for x in spec), reverse=True)),
                             family)
    return default_grid(n_train, family)


class _Stopwatch:
    def __init__(self, enabled):
        self.enabled = enabled
        self.start = time.perf_counter() if enabled else 0.0

    def ms(self):
        if not self.enabled:
            return 0
        return int(round(1000.0 * (time.perf_counter() - self.start)))


def _average_records(records):
    """Append trial = -1 mean rows per (sampler, n, delta, method, param-sweep)."""
    groups = {}
    order = []
    for rec in records:
        key = (rec.scenario, rec.sampler, rec.n_train, rec.delta, rec.method)
        if rec.method.startswith("wsf_") and rec.scenario == "sim1":
            key = key + (rec.param,)  # sweeps average per parameter value
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    averaged = []
    for key in order:
        group = groups[key]

        def mean(attr, group=group):
            vals = [getattr(r, attr) for r in group]
            vals = [v for v in vals if v is not None and not math.isnan(v)]
            return float(np.mean(vals)) if vals else None

        rec0 = group[0]
        averaged.append(
            ExperimentRecord(
                scenario=rec0.scenario, sampler=rec0.sampler,
                n_train=rec0.n_train, delta=rec0.delta, method=rec0.method,
                param=mean("param") if mean("param") is not None else math.nan,
                trial=-1,
                rmse=mean("rmse") if mean("rmse") is not None else math.nan,
                sup_err=mean("sup_err") if mean("sup_err") is not None else math.nan,
                cnkm=mean("cnkm"),
                stability_err=mean("stability_err"),
                fitting_err=mean("fitting_err"),
                wall_ms=int(np.mean([r.wall_ms for r in group])),
            )
        )
    return records + averaged


# ---------------------------------------------------------------------------
# scenario runners

def _sweep_grids(config, system):
    """Per-family parameter sweeps for the stability/fitting scenario."""
    grids = {}
    kappa = system.kappa
    for family in config.families:
        if family in config.grids:
            grids[family] = _grid_for(config, family, len(system.data))
        elif family == "tikhonov":
            grids[family] = ParameterGrid(
                tuple(np.logspace(0, -6, 10).tolist()), "tikhonov"
            )
        elif family == "landweber":
            ls = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512)
            grids[family] = ParameterGrid(tuple(1.0 / l for l in ls), "landweber")
        else:
            grids[family] = ParameterGrid(
                tuple((kappa * np.logspace(0, -8, 10)).tolist()), "cutoff"
            )
    return grids


def _run_sim1(config):
    test_points, test_values = make_testset(config.test_size, config.seed + 99991)
    kernel = get_kernel()
    records = []
    for sampler, label, build in _training_cells(config):
        points, rule = build()
        clean = target_function(points)
        base_data = LabeledData(points=points, values=clean, clean_values=clean)
        system = WsfSystem(base_data, kernel, rule)
        test_cross = kernel_cross(kernel, test_points, points)
        grids = _sweep_grids(config, system)
        for di, delta in enumerate(config.deltas):
            noisy = [
                _labeled(points, delta, _noise_seed(config, di, trial))
                for trial in range(config.trials)
            ]
            for family in config.families:
                for lam in grids[family]:
                    spec = FilterSpec(family, lam)
                    clean_model = system.fit(spec)
                    clean_pred = test_cross @ clean_model.coefficients
                    fitting = rmse(clean_pred, test_values)
                    for trial in range(config.trials):
                        watch = _Stopwatch(config.timing)
                        model = system.with_values(noisy[trial].values).fit(spec)
                        pred = test_cross @ model.coefficients
                        records.append(
                            ExperimentRecord(
                                scenario="sim1", sampler=sampler,
                                n_train=len(points), delta=delta,
                                method=f"wsf_{family}", param=lam, trial=trial,
                                rmse=rmse(pred, test_values),
                                sup_err=sup_err(pred, test_values),
                                cnkm=model.diagnostics.cnkm,
                                stability_err=rmse(pred, clean_pred),
                                fitting_err=fitting,
                                wall_ms=watch.ms(),
                            )
                        )
    return _average_records(records)


def _ada_and_ki_records(config, scenario, sampler, points, rule, test_points,
                        test_values, with_oracle=False, dump=None):
    """Shared engine for sims 2-6: interpolation plus CV-tuned filtered fits."""
    kernel = get_kernel()
    records = []
    val_points = load_design(config.validation_t)
    val_rule = design_rule(val_points, config.validation_t)
    val_clean = target_function(val_points)
    clean = target_function(points)
    system = WsfSystem(
        LabeledData(points=points, values=clean, clean_values=clean), kernel, rule
    )
    phi = kernel_matrix(kernel, points)
    ki_diag_base = conditioning(phi)
    test_cross = kernel_cross(kernel, test_points, points)
    for di, delta in enumerate(config.deltas):
        for trial in range(config.trials):
            train = _labeled(points, delta, _noise_seed(config, di, trial))
            val_noise = gen_noise(
                NoiseSpec(std_dev=delta,
                          seed=_noise_seed(config, di, trial, salt=1)),
                len(val_points),
            )
            val = LabeledData(points=val_points, values=val_clean + val_noise)

            watch = _Stopwatch(config.timing)
            coeff, warned = solve_spd(phi, train.values)
            ki_model = FittedModel(
                kernel=kernel, centers=points, coefficients=coeff,
                method_tag="ki",
                diagnostics=replace(ki_diag_base, solver_warning=warned),
            )
            ki_pred = test_cross @ ki_model.coefficients
            records.append(
                ExperimentRecord(
                    scenario=scenario, sampler=sampler, n_train=len(points),
                    delta=delta, method="ki", param=0.0, trial=trial,
                    rmse=rmse(ki_pred, test_values),
                    sup_err=sup_err(ki_pred, test_values),
                    cnkm=ki_model.diagnostics.cnkm,
                    wall_ms=watch.ms(),
                )
            )
            if dump is not None:
                dump(f"ki_delta{delta:g}", ki_pred)

            train_system = system.with_values(train.values, train.clean_values)
            for family in config.families:
                grid = _grid_for(config, family, len(points))
                watch = _Stopwatch(config.timing)
                cv = select_parameter(
                    train, val, val_rule, kernel, family, grid=grid,
                    train_system=train_system, keep_models=with_oracle,
                )
                model = cv.chosen_model
                pred = test_cross @ model.coefficients
                records.append(
                    ExperimentRecord(
                        scenario=scenario, sampler=sampler,
                        n_train=len(points), delta=delta,
                        method=f"wsf_{family}", param=cv.chosen_lambda,
                        trial=trial,
                        rmse=rmse(pred, test_values),
                        sup_err=sup_err(pred, test_values),
                        cnkm=model.diagnostics.cnkm,
                        wall_ms=watch.ms(),
                    )
                )
                if dump is not None:
                    dump(f"wsf_{family}_delta{delta:g}", pred)
                if with_oracle:
                    # Baseline: the grid member minimizing the test RMSE.
                    best = (math.inf, None, None)
                    for lam, m in zip(grid, cv.models):
                        if m is None:
                            continue
                        p = test_cross @ m.coefficients
                        score = rmse(p, test_values)
                        if score < best[0]:
                            best = (score, lam, p)
                    records.append(
                        ExperimentRecord(
                            scenario=scenario, sampler=sampler,
                            n_train=len(points), delta=delta,
                            method=f"wsf_{family}_oracle", param=best[1],
                            trial=trial,
                            rmse=best[0],
                            sup_err=sup_err(best[2], test_values),
                            wall_ms=0,
                        )
                    )
    return records


def _run_generic(config, scenario, with_oracle=False):
    test_points, test_values = make_testset(config.test_size, config.seed + 99991)
    records = []
    for sampler, label, build in _training_cells(config):
        try:
            points, rule = build()
        except InfeasibleDegreeError as exc:
            warnings.warn(f"{sampler} {label} skipped: {exc}", stacklevel=2)
            records.append(
                ExperimentRecord(
                    scenario=scenario, sampler=sampler, n_train=0,
                    delta=math.nan, method=f"skipped:{label}", param=math.nan,
                    trial=0, rmse=math.nan, sup_err=math.nan,
                )
            )
            continue
        records.extend(
            _ada_and_ki_records(
                config, scenario, sampler, points, rule, test_points,
                test_values, with_oracle=with_oracle,
            )
        )
    return _average_records(records)


def _run_sim6(config):
    test_points, test_values = make_testset(config.test_size, config.seed + 99991)
    dump_dir = Path(config.dump_dir or "sim6_dumps")
    dump_dir.mkdir(parents=True, exist_ok=True)

    def dump(tag, predictions):
        path = dump_dir / f"sim6_{tag}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "z", "truth", "prediction"])
            for (x, y, z), t, p in zip(
                test_points.coords, test_values, predictions
            ):
                writer.writerow(
                    [f"{x:.12g}", f"{y:.12g}", f"{z:.12g}",
                     f"{t:.12g}", f"{p:.12g}"]
                )

    records = []
    for sampler, label, build in _training_cells(config):
        points, rule = build()
        records.extend(
            _ada_and_ki_records(
                config, "sim6", sampler, points, rule, test_points,
                test_values, dump=dump,
            )
        )
    return _average_records(records)


SCENARIOS = ("sim1", "sim2", "sim3", "sim4", "sim5", "sim6")


def run_scenario(scenario, config=None):
    """Run one scenario and return its records (averages appended)."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario '{scenario}' (have {SCENARIOS})")
    config = config or default_config(scenario)
    if scenario == "sim1":
        return _run_sim1(config)
    if scenario == "sim6":
        return _run_sim6(config)
    return _run_generic(config, scenario, with_oracle=(scenario == "sim3"))


# ---------------------------------------------------------------------------
# real-data ingestion

def ingest_latlon_csv(path, value_column):
    """Read a lat/lon CSV into labeled sphere data.

    Expects a header with ``lat_deg``, ``lon_deg`` and ``value_column``.
    Coordinates map to unit vectors via
    (cos(lat) cos(lon), cos(lat) sin(lon), sin(lat)). Duplicate coordinates
    and non-numeric cells are rejected with their row numbers.
    """
    path = Path(path)
    lats, lons, values = [], [], []
    seen = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or ()
        for col in ("lat_deg", "lon_deg", value_column):
            if col not in fields:
                raise ValueError(f"{path.name}: missing column '{col}'")
        for rownum, row in enumerate(reader, start=2):
            try:
                lat = float(row["lat_deg"])
                lon = float(row["lon_deg"])
                val = float(row[value_column])
            except (TypeError, ValueError):
                raise ValueError(
                    f"{path.name}:{rownum}: non-numeric cell"
                ) from None
            key = (lat, lon)
            if key in seen:
                raise ValueError(
                    f"{path.name}:{rownum}: duplicate coordinates "
                    f"(first at row {seen[key]})"
                )
            seen[key] = rownum
            lats.append(lat)
            lons.append(lon)
            values.append(val)
    if not lats:
        raise ValueError(f"{path.name}: no data rows")
    lat = np.radians(lats)
    lon = np.radians(lons)
    coords = np.column_stack(
        [np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)]
    )
    return LabeledData(points=PointSet(coords), values=np.array(values))


def kfold_select_parameter(data, kernel, family, grid=None, folds=5, seed=0,
                           quad_degree=None):
    """Plain (unweighted) k-fold selection for real data.

    Scores each candidate by the mean squared validation error averaged over
    seeded shuffle folds; ties go to the largest parameter.
    """
    n = len(data)
    if folds < 2 or folds > n:
        raise ValueError("folds must be in [2, n]")
    if grid is None:
        grid = default_grid(n, family)
    perm = np.random.default_rng(seed).permutation(n)
    fold_ids = np.array_split(perm, folds)
    scores = np.zeros(len(grid))
    counts = np.zeros(len(grid))
    for held in fold_ids:
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        train_idx = np.flatnonzero(mask)
        train = LabeledData(
            points=data.points.subset(train_idx), values=data.values[train_idx]
        )
        degree = quad_degree
        if degree is None:
            degree = max_feasible_degree(train.points)
        rule = compute_weights(train.points, degree)
        system = WsfSystem(train, kernel, rule)
        held_points = data.points.subset(held)
        held_values = data.values[held]
        for i, lam in enumerate(grid):
            try:
                model = system.fit(FilterSpec(family, lam))
            except Exception as exc:  # noqa: BLE001
                warnings.warn(f"fold candidate {lam:g} failed: {exc}", stacklevel=2)
                continue
            gap = model.predict(held_points) - held_values
            scores[i] += float(np.mean(gap * gap))
            counts[i] += 1
    valid = counts > 0
    if not np.any(valid):
        raise RuntimeError("every fold candidate failed")
    mean_scores = np.where(valid, scores / np.maximum(counts, 1), np.inf)
    best = int(np.argmin(mean_scores))
    return grid.candidates[best], mean_scores
