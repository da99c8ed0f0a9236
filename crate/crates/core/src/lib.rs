//! Numerical laboratory for the fractional p-obstacle problem in one space
//! dimension.
//!
//! The crate assembles a positive-weight discretization of the fractional
//! p-Laplacian, solves the obstacle problem and its bounded penalization,
//! extracts coincidence sets and free boundaries, and runs the parameter
//! sweeps that compare solutions as `s` and `eps` vary.

// NaN must fail range checks, hence `!(x > 0.0)` style comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod free_boundary;
pub mod grid;
pub mod harness;
mod linalg;
pub mod operator;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use fit::{fit_rate, RateFit};
pub use free_boundary::{
    coincidence_set, free_boundary, growth_check, hausdorff_distance, hausdorff_points, holder_seminorm,
    lebesgue_distance, lewy_stampacchia_residual, recover_quasi_characteristic, CoincidenceSet, FreeBoundary,
    GrowthReport, QuasiCharacteristic,
};
pub use grid::{
    build_grid, catalog_problem, make_params, pos_neg_split, CatalogId, FractionalParams, Grid, GridFunction,
    ProblemSpec,
};
pub use harness::{
    bbm_check, emit_report, run_eps_sweep, run_s_sweep, BbmTable, Format, MetricRow, Report, SweepKind, SweepOptions,
    SweepReport, WindowPolicy,
};
pub use operator::{
    apply_operator, assemble_weights, energy, gagliardo_seminorm, gradient_norm, local_energy, local_p_laplacian,
    seminorm_quadrature, DiscreteOperator, KernelWeights, LocalPLaplacian, QuadratureFn, QuadratureValue,
    SeminormValue,
};
pub use solver::{
    complementarity_residual, solve_penalized, solve_semilinear, solve_vi, PenaltyFn, SemilinearTerm, SolveReport,
    SolverMethod, SolverOptions, ThetaVariant,
};
