//! Seeded random instances in three regimes: strictly feasible targets,
//! targets on the boundary of `A(P)`, and targets separated from `A(P)` by a
//! known certificate.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cones::Cone;
use crate::duality::Instance;
use crate::error::Result;
use crate::generators::GeneratorSet;
use crate::operators::{LinearMap, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Feasible,
    Boundary,
    Infeasible,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Feasible, Regime::Boundary, Regime::Infeasible];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Feasible => "feasible",
            Regime::Boundary => "boundary",
            Regime::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub regime: Regime,
    pub instance: Instance,
    /// Planted preimage `x0 ∈ P` of the feasible part of `b`.
    pub x0: Vector,
    /// Planted certificate for boundary and infeasible samples.
    pub certificate: Option<Vector>,
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    let data: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    Vector::from_vec_unchecked(data)
}

/// Uniform on the unit sphere.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    loop {
        if let Some(u) = random_vector(rng, dim).normalized() {
            return u;
        }
    }
}

/// Gaussian entries scaled by `1/√n`.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> LinearMap {
    let s = 1.0 / (cols as f64).sqrt();
    let entries = (0..rows * cols)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect();
    LinearMap::from_row_major(rows, cols, entries).expect("finite entries")
}

/// Projection of a Gaussian vector onto the cone, resampled until nonzero.
pub fn random_in_cone<R: Rng + ?Sized>(rng: &mut R, cone: &Cone) -> Result<Vector> {
    loop {
        let x = cone.project(&random_vector(rng, cone.dim()))?;
        if x.norm() > 1e-3 {
            return Ok(x);
        }
    }
}

/// Orthant or second-order cone with aperture in `[0.5, 2]`.
pub fn random_cone<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Cone> {
    if dim < 2 || rng.gen_bool(0.5) {
        Ok(Cone::orthant(dim))
    } else {
        Cone::second_order(dim, rng.gen_range(0.5..2.0))
    }
}

/// `b = A x0` with `x0 ∈ P`.
pub fn feasible<R: Rng + ?Sized>(rng: &mut R, cone: &Cone, rows: usize, epsilon: f64) -> Result<Sample> {
    let a = random_map(rng, rows, cone.dim());
    let x0 = random_in_cone(rng, cone)?;
    let b = a.apply(&x0)?;
    Ok(Sample {
        regime: Regime::Feasible,
        instance: Instance::new(a, b, GeneratorSet::ball_cap(cone.clone()), epsilon)?,
        x0,
        certificate: None,
    })
}

/// Bends a random map so that a random unit `y` satisfies `A*y ∈ P°`, then
/// sets `b = κ y + A x0` with `x0 ∈ P ∩ (A*y)⊥`. Every `x ∈ P` has
/// `<b - Ax, y> >= κ`, so `κ > ε` is infeasible and `κ = 0` puts `b` on the
/// boundary of `A(P)`.
pub fn separated<R: Rng + ?Sized>(rng: &mut R, cone: &Cone, rows: usize, kappa: f64, epsilon: f64) -> Result<Sample> {
    let a = random_map(rng, rows, cone.dim());
    let y = random_unit(rng, rows);
    let (plus, _) = cone.moreau_decompose(&a.adjoint_apply(&y)?)?;
    let mut entries = a.row_major().to_vec();
    let cols = cone.dim();
    for i in 0..rows {
        for j in 0..cols {
            entries[i * cols + j] -= y[i] * plus[j];
        }
    }
    let a = LinearMap::from_row_major(rows, cols, entries)?;
    // A*y is now the polar part; plus is orthogonal to it
    let x0 = plus.scale(rng.gen_range(0.5..2.0));
    let b = a.apply(&x0)?.axpy(kappa, &y);
    let regime = if kappa > 0.0 {
        Regime::Infeasible
    } else {
        Regime::Boundary
    };
    Ok(Sample {
        regime,
        instance: Instance::new(a, b, GeneratorSet::ball_cap(cone.clone()), epsilon)?,
        x0,
        certificate: Some(y),
    })
}

/// Targets shorter than this are redrawn by [`sample`]: a boundary target
/// built in one row is zero up to rounding, and rounding then decides the
/// alternative.
pub const MIN_TARGET_NORM: f64 = 1e-2;

/// One sample of the requested regime with random sizes `rows <= max_rows`,
/// `dim <= max_dim`. Infeasible samples use `κ = ε + U(0.5, 1.5)`.
pub fn sample<R: Rng + ?Sized>(
    rng: &mut R,
    regime: Regime,
    max_rows: usize,
    max_dim: usize,
    epsilon: f64,
) -> Result<Sample> {
    loop {
        let rows = rng.gen_range(1..=max_rows.max(1));
        let dim = rng.gen_range(2..=max_dim.max(2));
        let cone = random_cone(rng, dim)?;
        let s = match regime {
            Regime::Feasible => feasible(rng, &cone, rows, epsilon)?,
            Regime::Boundary => separated(rng, &cone, rows, 0.0, epsilon)?,
            Regime::Infeasible => {
                let kappa = epsilon + rng.gen_range(0.5..1.5);
                separated(rng, &cone, rows, kappa, epsilon)?
            }
        };
        if s.instance.b().norm() >= MIN_TARGET_NORM {
            return Ok(s);
        }
    }
}
