//! Homogeneous dilations, implicit Lyapunov function families, the bisection solver and
//! condition samplers.

pub mod candidate;
pub mod conditions;
pub mod dilation;
pub mod solver;

pub use candidate::{quad_form, IlfCandidate, IlfVariant};
pub use conditions::{
    check_c4_c5, check_differential_conditions, check_norm_bounds, shell_samples,
    nested_level_diagnostics, beta_margin, ConditionId, ConditionReport,
    DifferentialRegime, NormRegime,
};
pub use dilation::{dilation_matrix, varrho, Dilation, DilationKind};
pub use solver::{solve_ilf_bisection, IlfSolution, IlfSolver};
