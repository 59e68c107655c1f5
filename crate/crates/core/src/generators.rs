//! Bounded closed convex generator sets `K` with `0 ∈ K`.
//!
//! A generator set describes the cone it spans through its support function
//! `σ_K(z) = sup_{v∈K} <z, v>` and its gauge `j_K(x) = inf{t > 0 : x ∈ tK}`.
//! The solver only ever touches `K` through these two functions and the
//! maximising face of the support function.

use crate::cones::Cone;
use crate::error::{check_dim, Error, Result};
use crate::operators::Vector;
use crate::oracle::{self, LpProblem, LpSolution};

pub const DEFAULT_TIE_TOL: f64 = 1e-9;
pub const DEFAULT_MEMBER_TOL: f64 = 1e-9;

/// Maximum number of free box coordinates enumerated when listing the
/// vertices of a box face.
const MAX_FREE_BOX_COORDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// `K = P ∩ B(0, 1)`.
    BallCap(Cone),
    /// `K = conv(points ∪ {0})`.
    PolytopeHull(Vec<Vector>),
    /// `K = Π [0, u_i]`.
    Box(Vector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    kind: GeneratorKind,
    dim: usize,
    /// Relative threshold for declaring the support maximiser non-unique;
    /// scaled by `1 + ||z||`.
    pub tie_tol: f64,
    /// Relative membership band used by the gauge; scaled by `1 + ||x||`.
    pub member_tol: f64,
}

/// Maximising face of the support function at a direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFace {
    pub value: f64,
    pub witness: Vector,
    pub singular: bool,
}

impl GeneratorSet {
    pub fn ball_cap(cone: Cone) -> Self {
        let dim = cone.dim();
        Self::with_kind(GeneratorKind::BallCap(cone), dim)
    }

    /// Convex hull of `points` and the origin. Exact duplicates are merged.
    pub fn polytope(points: Vec<Vector>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidInput("polytope needs at least one point".into()));
        };
        let dim = first.dim();
        let mut unique: Vec<Vector> = Vec::with_capacity(points.len());
        for p in points {
            check_dim("polytope point", dim, p.dim())?;
            if !unique.iter().any(|q| q.distance(&p) <= 1e-14 * (1.0 + p.norm())) {
                unique.push(p);
            }
        }
        Ok(Self::with_kind(GeneratorKind::PolytopeHull(unique), dim))
    }

    pub fn boxed(upper: Vector) -> Result<Self> {
        if upper.dim() == 0 {
            return Err(Error::InvalidInput("box needs at least one coordinate".into()));
        }
        if upper.iter().any(|u| *u < 0.0) {
            return Err(Error::InvalidInput("box upper bounds must be nonnegative".into()));
        }
        let dim = upper.dim();
        Ok(Self::with_kind(GeneratorKind::Box(upper), dim))
    }

    fn with_kind(kind: GeneratorKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            tie_tol: DEFAULT_TIE_TOL,
            member_tol: DEFAULT_MEMBER_TOL,
        }
    }

    pub fn with_tie_tol(mut self, tie_tol: f64) -> Self {
        self.tie_tol = tie_tol;
        self
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> String {
        match &self.kind {
            GeneratorKind::BallCap(cone) => format!("ball_cap({})", cone.kind()),
            GeneratorKind::PolytopeHull(points) => format!("polytope({} points)", points.len()),
            GeneratorKind::Box(_) => "box".to_string(),
        }
    }

    /// The underlying cone for ball caps.
    pub fn cone(&self) -> Option<&Cone> {
        match &self.kind {
            GeneratorKind::BallCap(cone) => Some(cone),
            _ => None,
        }
    }

    /// `true` when `½σ_K²` is continuously differentiable, which holds for
    /// ball caps (its gradient is the cone projection).
    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, GeneratorKind::BallCap(_))
    }

    fn band(&self, z: &Vector) -> f64 {
        self.tie_tol * (1.0 + z.norm())
    }

    pub fn support_value(&self, z: &Vector) -> Result<f64> {
        check_dim("support value", self.dim, z.dim())?;
        Ok(match &self.kind {
            GeneratorKind::BallCap(cone) => cone.project_unchecked(z)?.norm(),
            GeneratorKind::PolytopeHull(points) => points.iter().map(|p| z.dot(p)).fold(0.0, f64::max),
            GeneratorKind::Box(upper) => upper.iter().zip(z.iter()).map(|(u, zi)| u * zi.max(0.0)).sum(),
        })
    }

    /// A maximiser of `<z, ·>` over `K` together with a flag telling whether
    /// the maximiser is unique (up to `tie_tol`).
    pub fn support_face(&self, z: &Vector) -> Result<SupportFace> {
        check_dim("support face", self.dim, z.dim())?;
        let band = self.band(z);
        Ok(match &self.kind {
            GeneratorKind::BallCap(cone) => {
                let plus = cone.project_unchecked(z)?;
                let value = plus.norm();
                let witness = if value > 0.0 {
                    plus.scale(1.0 / value)
                } else {
                    Vector::zeros(self.dim)
                };
                SupportFace {
                    value,
                    witness,
                    singular: value <= band,
                }
            }
            GeneratorKind::PolytopeHull(points) => {
                let scores: Vec<f64> = points.iter().map(|p| z.dot(p)).collect();
                let (best, top) =
                    scores.iter().enumerate().fold(
                        (None, 0.0),
                        |(bi, bv), (i, s)| {
                            if *s > bv {
                                (Some(i), *s)
                            } else {
                                (bi, bv)
                            }
                        },
                    );
                match best {
                    None => SupportFace {
                        value: 0.0,
                        witness: Vector::zeros(self.dim),
                        singular: true,
                    },
                    Some(i) => {
                        let ties = scores.iter().filter(|s| **s >= top - band).count();
                        SupportFace {
                            value: top,
                            witness: points[i].clone(),
                            singular: ties > 1 || top <= band,
                        }
                    }
                }
            }
            GeneratorKind::Box(upper) => {
                let mut singular = false;
                let mut w = Vec::with_capacity(self.dim);
                let mut value = 0.0;
                for (u, zi) in upper.iter().zip(z.iter()) {
                    if *u > 0.0 && zi.abs() <= band {
                        singular = true;
                    }
                    if *zi > 0.0 {
                        w.push(*u);
                        value += u * zi;
                    } else {
                        w.push(0.0);
                    }
                }
                SupportFace {
                    value,
                    witness: Vector::from_vec_unchecked(w),
                    singular,
                }
            }
        })
    }

    /// Gauge `j_K(x)`; `f64::INFINITY` outside the generated cone.
    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        check_dim("gauge", self.dim, x.dim())?;
        let tol = self.member_tol * (1.0 + x.norm());
        match &self.kind {
            GeneratorKind::BallCap(cone) => {
                if cone.contains(x, tol)? {
                    Ok(x.norm())
                } else {
                    Ok(f64::INFINITY)
                }
            }
            GeneratorKind::Box(upper) => {
                let mut g: f64 = 0.0;
                for (u, xi) in upper.iter().zip(x.iter()) {
                    if *xi < -tol {
                        return Ok(f64::INFINITY);
                    }
                    if *xi <= tol {
                        continue;
                    }
                    if *u == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    g = g.max(xi / u);
                }
                Ok(g)
            }
            GeneratorKind::PolytopeHull(points) => {
                let nx = x.norm();
                if nx == 0.0 {
                    return Ok(0.0);
                }
                // the LP tolerances are absolute; solve for the unit direction
                let rows: Vec<Vec<f64>> = (0..self.dim).map(|i| points.iter().map(|p| p[i]).collect()).collect();
                let rhs = x.iter().map(|v| v / nx).collect();
                let lp = LpProblem::new(vec![1.0; points.len()], rows, rhs)?;
                match oracle::simplex_solve(&lp)? {
                    LpSolution::Optimal { value, .. } => Ok(value * nx),
                    LpSolution::Infeasible => Ok(f64::INFINITY),
                    LpSolution::Unbounded => Err(Error::Numerical {
                        what: "polytope gauge",
                        residual: f64::INFINITY,
                    }),
                }
            }
        }
    }

    /// `σ_K(z) · v` for a support maximiser `v`, plus whether this element of
    /// `σ_K(z) ∂σ_K(z)` is the only one.
    pub fn scaled_subgradient(&self, z: &Vector) -> Result<(Vector, bool)> {
        let face = self.support_face(z)?;
        let unique = face.value <= self.band(z) || !face.singular;
        Ok((face.witness.scale(face.value), unique))
    }

    /// `σ_K(z) <= tol`, i.e. `z` lies in the polar of the generated cone.
    pub fn in_polar(&self, z: &Vector, tol: f64) -> Result<bool> {
        Ok(self.support_value(z)? <= tol)
    }

    /// Generators of the cone spanned by the near-maximising face at `z`:
    /// every `v ∈ K` with `<z, v> >= σ_K(z) - rel_tol (1 + σ_K(z))`.
    ///
    /// Returns `None` when that cone is not finitely generated in a usable
    /// way (curved ball-cap faces at `σ = 0`, or boxes with too many free
    /// coordinates).
    pub(crate) fn face_generators(&self, z: &Vector, rel_tol: f64) -> Result<Option<Vec<Vector>>> {
        let sigma = self.support_value(z)?;
        let slack = rel_tol * (1.0 + sigma);
        Ok(match &self.kind {
            GeneratorKind::BallCap(cone) => {
                if sigma > slack {
                    Some(vec![cone.project_unchecked(z)?.scale(1.0 / sigma)])
                } else {
                    None
                }
            }
            GeneratorKind::PolytopeHull(points) => {
                Some(points.iter().filter(|p| z.dot(p) >= sigma - slack).cloned().collect())
            }
            GeneratorKind::Box(upper) => {
                let mut base = vec![0.0; self.dim];
                let mut free = Vec::new();
                for (i, (u, zi)) in upper.iter().zip(z.iter()).enumerate() {
                    if *u == 0.0 {
                        continue;
                    }
                    // coordinate i contributes u*max(0, z_i); it is free when
                    // moving it changes the value by less than the slack
                    if zi.abs() * u <= slack {
                        free.push(i);
                    } else if *zi > 0.0 {
                        base[i] = *u;
                    }
                }
                if free.len() > MAX_FREE_BOX_COORDS {
                    None
                } else {
                    let mut out = Vec::with_capacity(1 << free.len());
                    for mask in 0u32..(1 << free.len()) {
                        let mut v = base.clone();
                        for (k, &i) in free.iter().enumerate() {
                            if mask & (1 << k) != 0 {
                                v[i] = upper[i];
                            }
                        }
                        if v.iter().any(|c| *c != 0.0) {
                            out.push(Vector::from_vec_unchecked(v));
                        }
                    }
                    Some(out)
                }
            }
        })
    }
}

/// Result of checking that every extreme point of the relaxed generator is
/// one of the raw generators (or the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityReport {
    pub holds: bool,
    /// Extreme points of the relaxed set missing from the raw list.
    pub violating: Vec<Vector>,
    /// Raw points that are not extreme in the relaxed set.
    pub non_extreme: Vec<Vector>,
}

/// Checks `ext(conv(hull ∪ {0})) ⊂ points ∪ {0}`.
///
/// `hull` defaults to `points`, in which case the inclusion always holds and
/// the report only flags redundant raw points.
pub fn extremality_check(points: &[Vector], hull: Option<&[Vector]>) -> Result<ExtremalityReport> {
    if points.is_empty() {
        return Err(Error::InvalidInput("extremality check needs at least one point".into()));
    }
    let dim = points[0].dim();
    let hull = hull.unwrap_or(points);
    let vertices = oracle::vertex_enumerate(hull)?;
    let close = |a: &Vector, b: &Vector| a.distance(b) <= 1e-12 * (1.0 + a.norm());
    let zero = Vector::zeros(dim);
    let violating: Vec<Vector> = vertices
        .iter()
        .filter(|v| !close(v, &zero) && !points.iter().any(|p| close(p, v)))
        .cloned()
        .collect();
    let non_extreme: Vec<Vector> = points
        .iter()
        .filter(|p| !vertices.iter().any(|v| close(p, v)))
        .cloned()
        .collect();
    Ok(ExtremalityReport {
        holds: violating.is_empty(),
        violating,
        non_extreme,
    })
}
