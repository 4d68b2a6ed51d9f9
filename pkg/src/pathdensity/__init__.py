"""Trajectory-density engine.

Classical mechanics recast as probability densities over discretized
trajectories: a density on path space is built from a family of solutions
to the equations of motion, smoothed by a nascent-delta kernel of
adjustable sharpness.  The package provides the kernel algebra, a catalog
of exactly solvable systems, path-space densities with pointwise
constraints, three samplers, expectation estimation with error bars,
brute-force lattice oracles, and convergence experiments that demonstrate
the sharp-kernel classical limit and the oscillatory node structure of
band-limited kernels.
"""

__version__ = "0.1.0"

from .errors import (
    AnalyticModeOnlyError,
    ConfigError,
    DegenerateWeightsError,
    DivergentObservableError,
    LatticeBudgetError,
    PathDensityError,
    QuadratureError,
    SamplerError,
    SingularConstraintError,
)
from .model import ExpectationResult, TimeGrid, Trajectory, make_grid
from .kernels import (
    EXACT_DELTA,
    FEJER,
    GAUSSIAN,
    TRUNCATED_FEJER,
    KernelSpec,
    exact_delta,
    fejer,
    gaussian,
    kernel_log_eval,
    kernel_mass,
    kernel_sample,
    truncated_fejer,
)
from .systems import (
    CATALOG_IDS,
    SystemSolution,
    constraint_jacobian,
    eval_solution,
    make_system,
    pinned_alpha,
)
from .density import (
    AlphaMeasure,
    MembershipResult,
    PathConstraint,
    PathDensity,
    box_uniform,
    classical_membership,
    gaussian_prior,
    log_weight,
    log_weight_batch,
    marginal_density,
    pinned_normalization,
    point_mass,
    position_pin,
    velocity_pin,
)
from .sampling import (
    SampleBatch,
    SamplerConfig,
    chain_rng,
    read_batch_binary,
    sample,
    write_batch_binary,
    write_batch_csv,
)
from .observables import (
    NodeScanResult,
    Observable,
    SweepResult,
    check_moments,
    config_digest,
    custom,
    energy,
    evaluate,
    evaluate_batch,
    expectation,
    node_scan,
    path_average,
    position_at,
    position_squared_at,
)
from .oracle import (
    LatticeSpec,
    clipped_mass,
    kernel_moment,
    lattice_expectation,
    lattice_for,
    oracle_compare,
    slice_quadrature,
)
from .experiments import (
    BatteryReport,
    GridStudyResult,
    classical_limit_sweep,
    classical_reference,
    grid_refinement_study,
    loglog_slope,
    regression_battery,
    sweep_converged,
)

__all__ = [
    "__version__",
    # errors
    "PathDensityError",
    "AnalyticModeOnlyError",
    "ConfigError",
    "DegenerateWeightsError",
    "DivergentObservableError",
    "LatticeBudgetError",
    "QuadratureError",
    "SamplerError",
    "SingularConstraintError",
    # model
    "TimeGrid",
    "Trajectory",
    "ExpectationResult",
    "make_grid",
    # kernels
    "KernelSpec",
    "EXACT_DELTA",
    "GAUSSIAN",
    "FEJER",
    "TRUNCATED_FEJER",
    "exact_delta",
    "gaussian",
    "fejer",
    "truncated_fejer",
    "kernel_log_eval",
    "kernel_sample",
    "kernel_mass",
    # systems
    "SystemSolution",
    "CATALOG_IDS",
    "make_system",
    "eval_solution",
    "pinned_alpha",
    "constraint_jacobian",
    # density
    "AlphaMeasure",
    "PathConstraint",
    "PathDensity",
    "MembershipResult",
    "point_mass",
    "box_uniform",
    "gaussian_prior",
    "position_pin",
    "velocity_pin",
    "log_weight",
    "log_weight_batch",
    "marginal_density",
    "classical_membership",
    "pinned_normalization",
    # sampling
    "SamplerConfig",
    "SampleBatch",
    "sample",
    "chain_rng",
    "write_batch_csv",
    "write_batch_binary",
    "read_batch_binary",
    # observables
    "Observable",
    "position_at",
    "position_squared_at",
    "energy",
    "path_average",
    "custom",
    "evaluate",
    "evaluate_batch",
    "expectation",
    "check_moments",
    "config_digest",
    "node_scan",
    "NodeScanResult",
    "SweepResult",
    # oracle
    "LatticeSpec",
    "lattice_for",
    "lattice_expectation",
    "slice_quadrature",
    "kernel_moment",
    "clipped_mass",
    "oracle_compare",
    # experiments
    "classical_reference",
    "classical_limit_sweep",
    "sweep_converged",
    "loglog_slope",
    "grid_refinement_study",
    "GridStudyResult",
    "regression_battery",
    "BatteryReport",
]
