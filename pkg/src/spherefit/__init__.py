"""Noisy scattered-data fitting on the sphere with weighted spectral filters.

The package provides kernel interpolation over spherical basis functions,
its stabilized variant that rescales by positive quadrature weights and
filters the spectrum of the weighted kernel matrix, quadrature-weighted
cross-validation for the filter parameter, and a simulation harness that
reproduces the accompanying experiments at desk scale.
"""

from .estimator import (
    ConditioningReport,
    FittedModel,
    LabeledData,
    WsfSystem,
    conditioning,
    evaluate,
    fit_ki,
    fit_wsf,
    fit_wsf_noise_free,
    load_model,
    save_model,
)
from .filters import (
    FilterConditionReport,
    FilterSpec,
    apply_filter,
    check_filter_conditions,
    cutoff,
    filter_scalar,
    landweber,
    tikhonov,
)
from .geometry import (
    GeometryStats,
    PointSet,
    fibonacci_grid,
    geodesic_distance,
    load_points,
    load_tdesign,
    rotated_design,
    sample_random,
)
from .harmonics import harmonic_basis, harmonic_dim, legendre
from .kernels import (
    KernelSpec,
    get_kernel,
    kernel_cross,
    kernel_eval,
    kernel_matrix,
    target_function,
)
from .model_selection import (
    CvResult,
    ParameterGrid,
    default_grid,
    select_parameter,
    split_data,
)
from .quadrature import (
    InfeasibleDegreeError,
    QuadratureRule,
    compute_weights,
    design_rule,
    load_rule,
    max_feasible_degree,
    save_rule,
    verify_exactness,
)
from .experiments import (
    ExperimentRecord,
    NoiseSpec,
    ScenarioConfig,
    default_config,
    gen_noise,
    ingest_latlon_csv,
    kfold_select_parameter,
    make_testset,
    read_records,
    rmse,
    run_scenario,
    sup_err,
    write_records,
)

__version__ = "0.1.0"
