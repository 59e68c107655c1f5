//! Conic linear feasibility through duality.
//!
//! Decides whether `b ∈ A(P)` or `b ∈ cl A(P)` for a cone `P` generated by a
//! bounded convex set `K`, by minimising the dual functional
//! `J_ε(y) = ½ σ_K(A*y)² - <b, y> + ε||y||` and recovering the primal point
//! from the support face at `A*y`. When the dual is unbounded below the
//! diverging direction is a Farkas certificate.

pub mod cones;
pub mod duality;
pub mod error;
pub mod farkas;
pub mod generators;
pub mod operators;
pub mod oracle;
pub mod sampling;
pub mod solvers;

mod linalg;

pub use cones::Cone;
pub use duality::{
    check_saddle, dual_objective, dual_state, dual_subgradient, duality_gap, primal_objective, DualState, Instance,
};
pub use error::{Error, Result};
pub use farkas::{
    certificate_verify, diagnose_attainment, farkas_constant, least_norm_pseudoinverse, relax_and_solve, solve,
    solve_approximate, solve_exact, solve_primal_dual, Attainment, DualAttainment, Outcome, Verdict,
};
pub use generators::{extremality_check, ExtremalityReport, GeneratorKind, GeneratorSet, SupportFace};
pub use operators::{inner, norm, LinearMap, Vector};
pub use solvers::{
    estimate_operator_norm, minimize_dual, pdhg_solve, Schedule, SolveReport, SolveStatus, SolverConfig, TraceRow,
};
