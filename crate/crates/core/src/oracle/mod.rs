//! Independent reference computations.
//!
//! These deliberately use different algorithms from the main solver path so
//! that agreement between the two is evidence rather than tautology. The
//! simplex is also used in production for the polytope gauge.

mod conjugate;
mod eigen;
mod primal;
mod simplex;
mod vertices;

pub use conjugate::{conjugate_grid_check, ConjugateGrid};
pub use eigen::{gram, jacobi_eigen, SymmetricEigen};
pub use primal::{primal_reference, PrimalReference, ReferenceConfig};
pub use simplex::{simplex_solve, LpProblem, LpSolution, MAX_ROWS, MAX_VARS};
pub use vertices::vertex_enumerate;

use crate::operators::LinearMap;

/// Largest singular value of `a` from the Jacobi spectrum of `AᵀA`.
pub fn operator_norm_reference(a: &LinearMap) -> f64 {
    let g = gram(a.rows(), a.cols(), a.row_major());
    jacobi_eigen(&g).values.first().map_or(0.0, |l| l.max(0.0).sqrt())
}
