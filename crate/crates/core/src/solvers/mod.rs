//! First-order solvers: a dual minimiser for `J_ε` and a primal-dual
//! hybrid gradient method on the Lagrangian.

mod dual;
mod pdhg;

pub use dual::minimize_dual;
pub use pdhg::{estimate_operator_norm, pdhg_solve, pdhg_solve_from};

use crate::error::{Error, Result};
use crate::operators::{LinearMap, Vector};

/// Step-size rule for [`minimize_dual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Barzilai-Borwein steps with a nonmonotone line search and the exact
    /// proximal map of `ε||·||`.
    #[default]
    Spectral,
    /// `step0 / sqrt(k + 1)`.
    InvSqrt,
    /// Polyak steps aimed at the running best value minus a shrinking margin.
    PolyakEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub step0: f64,
    pub schedule: Schedule,
    /// Stationarity tolerance on the composite gradient mapping.
    pub grad_tol: f64,
    /// Relative duality gap accepted as convergence when a primal point is
    /// rebuilt from the face of a nonsmooth generator.
    pub gap_tol: f64,
    pub diverge_norm: f64,
    pub diverge_obj: f64,
    pub stall_window: usize,
    pub pdhg_tau: Option<f64>,
    pub pdhg_sigma: Option<f64>,
    /// Strong-convexity modulus used for PDHG step acceleration; 0 gives the
    /// fixed-step method.
    pub pdhg_gamma: f64,
    pub pdhg_max_iter: usize,
    /// Tolerance for accepting a recovered primal point as feasible.
    pub verify_tol: f64,
    /// Relative tolerance of certificate checks.
    pub cert_tol: f64,
    /// Starting dual point; the origin when absent.
    pub y0: Option<Vector>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            step0: 1.0,
            schedule: Schedule::Spectral,
            grad_tol: 1e-9,
            gap_tol: 1e-9,
            diverge_norm: 1e6,
            diverge_obj: -1e9,
            stall_window: 50,
            pdhg_tau: None,
            pdhg_sigma: None,
            pdhg_gamma: 1.0,
            pdhg_max_iter: 4_000_000,
            verify_tol: 1e-6,
            cert_tol: 1e-8,
            y0: None,
        }
    }
}

impl SolverConfig {
    /// Checks positivity of the parameters and the PDHG step condition
    /// `τ σ ||A||² <= 1`.
    pub fn validate(&self, a: &LinearMap) -> Result<()> {
        let positive = [
            ("step0", self.step0),
            ("grad_tol", self.grad_tol),
            ("gap_tol", self.gap_tol),
            ("diverge_norm", self.diverge_norm),
            ("verify_tol", self.verify_tol),
            ("cert_tol", self.cert_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite")));
            }
        }
        if self.max_iter == 0 || self.stall_window == 0 || self.pdhg_max_iter == 0 {
            return Err(Error::InvalidInput("iteration counts must be positive".into()));
        }
        if !self.diverge_obj.is_finite() || !(self.pdhg_gamma >= 0.0) {
            return Err(Error::InvalidInput("invalid divergence threshold or pdhg_gamma".into()));
        }
        if let Some(y0) = &self.y0 {
            if y0.dim() != a.rows() {
                return Err(Error::DimensionMismatch {
                    context: "starting dual point",
                    expected: a.rows(),
                    found: y0.dim(),
                });
            }
        }
        let (tau, sigma) = self.pdhg_steps(a);
        if !(tau > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidInput("pdhg steps must be positive".into()));
        }
        let l = estimate_operator_norm(a);
        if tau * sigma * l * l > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "pdhg steps violate tau*sigma*||A||^2 <= 1 ({:.6e})",
                tau * sigma * l * l
            )));
        }
        Ok(())
    }

    /// PDHG steps, defaulting to `τ = σ = 1 / (1.01 ||A||)`.
    pub fn pdhg_steps(&self, a: &LinearMap) -> (f64, f64) {
        let default = || {
            let l = estimate_operator_norm(a);
            if l > 0.0 {
                1.0 / (1.01 * l)
            } else {
                1.0
            }
        };
        match (self.pdhg_tau, self.pdhg_sigma) {
            (Some(t), Some(s)) => (t, s),
            (Some(t), None) => {
                let l = estimate_operator_norm(a);
                (t, if l > 0.0 { 1.0 / (t * l * l * 1.0201) } else { 1.0 })
            }
            (None, Some(s)) => {
                let l = estimate_operator_norm(a);
                (if l > 0.0 { 1.0 / (s * l * l * 1.0201) } else { 1.0 }, s)
            }
            (None, None) => {
                let d = default();
                (d, d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    UnboundedBelow,
    NonAttainedSuspected,
    MaxIter,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::UnboundedBelow => "UnboundedBelow",
            SolveStatus::NonAttainedSuspected => "NonAttainedSuspected",
            SolveStatus::MaxIter => "MaxIter",
        }
    }
}

/// One logged iterate. For the dual solver `residual` is the norm of the
/// composite gradient mapping; for PDHG it is the primal infeasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub y_norm: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub y_final: Vector,
    /// Smallest dual value over the trace.
    pub best_value: f64,
    /// Unit direction of divergence, set for `UnboundedBelow`.
    pub ray: Option<Vector>,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    /// Primal point rebuilt from the support face, when one was certified.
    pub primal: Option<Vector>,
    /// Duality gap against `primal`.
    pub gap: Option<f64>,
    /// Iterates kept at powers of two, for ratio diagnostics.
    pub samples: Vec<(usize, Vector)>,
}

impl SolveReport {
    pub fn y_norm(&self) -> f64 {
        self.y_final.norm()
    }
}
