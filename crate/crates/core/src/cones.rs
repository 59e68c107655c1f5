//! Closed convex cones with exact Euclidean projection.
//!
//! Projection is the primitive: the Moreau decomposition, membership in the
//! cone and membership in its polar are all read off from it.

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::operators::Vector;

/// A closed convex cone in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    /// `{x : x_i >= 0}`.
    NonnegativeOrthant { dim: usize },
    /// `{x : x_last >= 0, ||x_head|| <= alpha * x_last}`.
    SecondOrder { dim: usize, alpha: f64 },
    /// Linear subspace spanned by an orthonormal basis.
    Subspace { dim: usize, basis: Vec<Vector> },
    /// Conic hull of finitely many rays.
    PolyhedralRays { dim: usize, rays: Vec<Vector> },
    /// Cartesian product, acting on consecutive coordinate blocks.
    Product(Vec<Cone>),
}

impl Cone {
    pub fn orthant(dim: usize) -> Self {
        Cone::NonnegativeOrthant { dim }
    }

    pub fn second_order(dim: usize, alpha: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!(
                "second-order cone needs dimension >= 2, got {dim}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidInput(format!(
                "second-order cone aperture must be positive, got {alpha}"
            )));
        }
        Ok(Cone::SecondOrder { dim, alpha })
    }

    /// Subspace spanned by `vectors`; the basis is orthonormalised and
    /// dependent vectors are dropped.
    pub fn subspace(dim: usize, vectors: &[Vector]) -> Result<Self> {
        let mut basis: Vec<Vector> = Vec::new();
        for v in vectors {
            check_dim("subspace basis", dim, v.dim())?;
            let scale = v.norm();
            let mut w = v.clone();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    w = w.axpy(-w.dot(q), q);
                }
            }
            let n = w.norm();
            if n > 1e-10 * scale.max(1.0) {
                basis.push(w.scale(1.0 / n));
            }
        }
        Ok(Cone::Subspace { dim, basis })
    }

    /// The whole space, as a subspace cone.
    pub fn full_space(dim: usize) -> Self {
        Cone::Subspace {
            dim,
            basis: (0..dim).map(|i| Vector::unit(dim, i)).collect(),
        }
    }

    pub fn rays(dim: usize, rays: Vec<Vector>) -> Result<Self> {
        for r in &rays {
            check_dim("polyhedral ray", dim, r.dim())?;
        }
        Ok(Cone::PolyhedralRays { dim, rays })
    }

    pub fn product(parts: Vec<Cone>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("product cone needs at least one factor".into()));
        }
        Ok(Cone::Product(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::NonnegativeOrthant { dim }
            | Cone::SecondOrder { dim, .. }
            | Cone::Subspace { dim, .. }
            | Cone::PolyhedralRays { dim, .. } => *dim,
            Cone::Product(parts) => parts.iter().map(Cone::dim).sum(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Cone::NonnegativeOrthant { .. } => "orthant",
            Cone::SecondOrder { .. } => "soc",
            Cone::Subspace { .. } => "subspace",
            Cone::PolyhedralRays { .. } => "rays",
            Cone::Product(_) => "product",
        }
    }

    /// Euclidean projection `x_+` of `x` onto the cone.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim("cone projection", self.dim(), x.dim())?;
        self.project_unchecked(x)
    }

    pub(crate) fn project_unchecked(&self, x: &Vector) -> Result<Vector> {
        match self {
            Cone::NonnegativeOrthant { .. } => Ok(Vector::from_vec_unchecked(x.iter().map(|v| v.max(0.0)).collect())),
            Cone::SecondOrder { alpha, .. } => Ok(project_second_order(x, *alpha)),
            Cone::Subspace { dim, basis } => {
                let mut out = Vector::zeros(*dim);
                for q in basis {
                    out = out.axpy(x.dot(q), q);
                }
                Ok(out)
            }
            Cone::PolyhedralRays { dim, rays } => {
                if rays.is_empty() {
                    return Ok(Vector::zeros(*dim));
                }
                let m = linalg::columns_to_matrix(rays, *dim);
                let sol = linalg::nnls(&m, &linalg::to_dvector(x), 1e-11)?;
                Ok(linalg::from_dvector(&(m * sol)))
            }
            Cone::Product(parts) => {
                let mut out = Vec::with_capacity(x.dim());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let block = part.project_unchecked(&x.slice(offset, d))?;
                    out.extend_from_slice(block.as_slice());
                    offset += d;
                }
                Ok(Vector::from_vec_unchecked(out))
            }
        }
    }

    /// Moreau decomposition `x = x_+ + x_-` with `x_+` in the cone and
    /// `x_-` in its polar.
    pub fn moreau_decompose(&self, x: &Vector) -> Result<(Vector, Vector)> {
        let plus = self.project(x)?;
        let minus = x.sub(&plus);
        Ok((plus, minus))
    }

    /// `||x - project(x)|| <= tol`, with an absolute tolerance.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        let p = self.project(x)?;
        Ok(x.distance(&p) <= tol)
    }

    /// Membership in the polar cone, via `z_+ = 0`.
    pub fn polar_contains(&self, z: &Vector, tol: f64) -> Result<bool> {
        Ok(self.project(z)?.norm() <= tol)
    }
}

/// Closed-form projection onto `{(h, t) : ||h|| <= alpha t}`.
fn project_second_order(x: &Vector, alpha: f64) -> Vector {
    let n = x.dim();
    let t = x[n - 1];
    let head = &x.as_slice()[..n - 1];
    let h_norm = head.iter().map(|v| v * v).sum::<f64>().sqrt();
    if h_norm <= alpha * t {
        return x.clone();
    }
    if alpha * h_norm <= -t {
        return Vector::zeros(n);
    }
    // nearest point on the boundary ray through (alpha * h/|h|, 1)
    let s = (alpha * h_norm + t) / (1.0 + alpha * alpha);
    let mut out: Vec<f64> = head.iter().map(|v| alpha * s * v / h_norm).collect();
    out.push(s);
    Vector::from_vec_unchecked(out)
}
