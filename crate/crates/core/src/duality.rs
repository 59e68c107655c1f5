//! The primal problem `min ½ j_K(x)²  s.t. ||Ax - b|| <= ε` and its dual
//! `min J_ε(y) = ½ σ_K(A*y)² - <b, y> + ε||y||`.

use crate::error::{check_dim, Error, Result};
use crate::generators::GeneratorSet;
use crate::linalg;
use crate::operators::{LinearMap, Vector};

/// Absolute band on `||Ax - b|| - ε` used by the primal indicator.
pub const FEAS_TOL: f64 = 1e-8;

/// Relative tie levels tried, in order, when rebuilding a primal point from
/// the near-maximising face of the support function.
const FACE_LADDER: [f64; 6] = [1e-9, 1e-7, 1e-5, 1e-3, 1e-2, 1e-1];

/// Problem data: find `x` in the cone generated by `K` with `||Ax - b|| <= ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    a: LinearMap,
    b: Vector,
    generator: GeneratorSet,
    epsilon: f64,
}

impl Instance {
    pub fn new(a: LinearMap, b: Vector, generator: GeneratorSet, epsilon: f64) -> Result<Self> {
        check_dim("instance right-hand side", a.rows(), b.dim())?;
        check_dim("instance generator", a.cols(), generator.dim())?;
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon must be finite and nonnegative, got {epsilon}"
            )));
        }
        Ok(Self {
            a,
            b,
            generator,
            epsilon,
        })
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn generator(&self) -> &GeneratorSet {
        &self.generator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same data with `b` and `ε` replaced.
    pub fn with_target(&self, b: Vector, epsilon: f64) -> Result<Self> {
        Self::new(self.a.clone(), b, self.generator.clone(), epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        self.with_target(self.b.clone(), epsilon)
    }

    /// `||Ax - b||`.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        Ok(self.a.apply(x)?.distance(&self.b))
    }
}

/// Dual iterate together with the quantities the solvers need at it.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub y: Vector,
    pub value: f64,
    pub subgrad: Vector,
    pub sigma: f64,
    pub unique_face: bool,
}

/// `½ j_K(x)²` when `x` is feasible, `+∞` otherwise.
pub fn primal_objective(inst: &Instance, x: &Vector) -> Result<f64> {
    primal_objective_with_tol(inst, x, FEAS_TOL)
}

pub(crate) fn primal_objective_with_tol(inst: &Instance, x: &Vector, feas_tol: f64) -> Result<f64> {
    check_dim("primal objective", inst.a.cols(), x.dim())?;
    if inst.residual(x)? > inst.epsilon + feas_tol {
        return Ok(f64::INFINITY);
    }
    let g = inst.generator.gauge(x)?;
    Ok(0.5 * g * g)
}

pub fn dual_objective(inst: &Instance, y: &Vector) -> Result<f64> {
    check_dim("dual objective", inst.a.rows(), y.dim())?;
    let s = inst.generator.support_value(&inst.a.adjoint_apply_unchecked(y))?;
    Ok(0.5 * s * s - inst.b.dot(y) + inst.epsilon * y.norm())
}

/// An element of `∂J_ε(y)`; the `ε||·||` part contributes 0 at `y = 0`.
pub fn dual_subgradient(inst: &Instance, y: &Vector) -> Result<Vector> {
    Ok(dual_state(inst, y)?.subgrad)
}

pub fn dual_state(inst: &Instance, y: &Vector) -> Result<DualState> {
    check_dim("dual state", inst.a.rows(), y.dim())?;
    let (smooth, grad, sigma, unique_face) = smooth_part(inst, y)?;
    let ny = y.norm();
    let mut subgrad = grad;
    if ny > 0.0 && inst.epsilon > 0.0 {
        subgrad = subgrad.axpy(inst.epsilon / ny, y);
    }
    Ok(DualState {
        y: y.clone(),
        value: smooth + inst.epsilon * ny,
        subgrad,
        sigma,
        unique_face,
    })
}

/// `f(y) = ½ σ(A*y)² - <b, y>` with a (sub)gradient, `σ(A*y)` and whether
/// the support maximiser is unique.
pub(crate) fn smooth_part(inst: &Instance, y: &Vector) -> Result<(f64, Vector, f64, bool)> {
    let z = inst.a.adjoint_apply_unchecked(y);
    let (scaled, unique) = inst.generator.scaled_subgradient(&z)?;
    let sigma = inst.generator.support_value(&z)?;
    let value = 0.5 * sigma * sigma - inst.b.dot(y);
    let grad = inst.a.apply_unchecked(&scaled).sub(&inst.b);
    Ok((value, grad, sigma, unique))
}

/// `F(x) + J(y)`, nonnegative up to rounding by weak duality.
pub fn duality_gap(inst: &Instance, x: &Vector, y: &Vector) -> Result<f64> {
    Ok(primal_objective(inst, x)? + dual_objective(inst, y)?)
}

/// First-order optimality system of the primal-dual pair up to `tol`.
///
/// The recovery relation `x ∈ σ(A*y) ∂σ(A*y)` is accepted either against the
/// computed support maximiser or through the face conditions
/// `j(x) = σ(A*y)` and `<A*y, x> = σ(A*y) j(x)`.
pub fn check_saddle(inst: &Instance, x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
    check_dim("saddle check primal", inst.a.cols(), x.dim())?;
    check_dim("saddle check dual", inst.a.rows(), y.dim())?;
    let z = inst.a.adjoint_apply_unchecked(y);
    let face = inst.generator.support_face(&z)?;
    let sigma = face.value;
    let recovered = x.distance(&face.witness.scale(sigma)) <= tol || {
        let g = inst.generator.gauge(x)?;
        g.is_finite() && (g - sigma).abs() <= tol && (z.dot(x) - sigma * g).abs() <= tol * (1.0 + sigma)
    };
    if !recovered {
        return Ok(false);
    }
    let r = inst.b.sub(&inst.a.apply_unchecked(x));
    let rn = r.norm();
    if inst.epsilon == 0.0 {
        return Ok(rn <= tol);
    }
    let yn = y.norm();
    if yn <= tol {
        return Ok(rn <= inst.epsilon + tol);
    }
    if (rn - inst.epsilon).abs() > tol || rn == 0.0 {
        return Ok(false);
    }
    Ok(y.scale(1.0 / yn).distance(&r.scale(1.0 / rn)) <= tol)
}

/// A primal candidate rebuilt from a dual point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Reconstruction {
    pub x: Vector,
    /// `½ j(x)²`, finite.
    pub value: f64,
    /// Face generators carrying positive weight.
    pub support: Vec<Vector>,
}

/// Rebuilds a feasible primal point from the near-maximising face at `A*y`.
///
/// At a dual minimiser the primal solution is a nonnegative combination of
/// face generators that hits `b` (or `b - ε ŷ` when `ε > 0`), so it is found
/// by nonnegative least squares over the face. Several tie levels are tried
/// and the feasible candidate with the smallest objective is kept.
pub(crate) fn reconstruct(inst: &Instance, y: &Vector) -> Result<Option<Reconstruction>> {
    let z = inst.a.adjoint_apply_unchecked(y);
    let ny = y.norm();
    let target = if inst.epsilon > 0.0 && ny > 0.0 {
        inst.b.axpy(-inst.epsilon / ny, y)
    } else {
        inst.b.clone()
    };
    let rhs = linalg::to_dvector(&target);
    let mut best: Option<Reconstruction> = None;
    let mut seen = 0usize;
    for tol in FACE_LADDER {
        let Some(gens) = inst.generator.face_generators(&z, tol)? else {
            continue;
        };
        if gens.len() == seen && best.is_some() {
            continue;
        }
        seen = gens.len();
        let (x, support) = if gens.is_empty() {
            (Vector::zeros(inst.a.cols()), Vec::new())
        } else {
            let images: Vec<Vector> = gens.iter().map(|g| inst.a.apply_unchecked(g)).collect();
            let m = linalg::columns_to_matrix(&images, inst.a.rows());
            let Ok(sol) = linalg::nnls(&m, &rhs, 1e-12) else {
                continue;
            };
            let mut x = Vector::zeros(inst.a.cols());
            let mut support = Vec::new();
            for (g, mu) in gens.iter().zip(sol.iter()) {
                if *mu > 0.0 {
                    x = x.axpy(*mu, g);
                    support.push(g.clone());
                }
            }
            (x, support)
        };
        let value = primal_objective(inst, &x)?;
        if value.is_finite() && best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(Reconstruction { x, value, support });
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Cone;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn uniqueness_example() -> Instance {
        Instance::new(
            LinearMap::identity(2),
            v(&[1.0, 0.0]),
            GeneratorSet::ball_cap(Cone::orthant(2)),
            0.0,
        )
        .unwrap()
    }

    fn random_orthant(rng: &mut ChaCha8Rng, eps: f64) -> (Instance, Vector) {
        let m = rng.gen_range(1..5);
        let n = rng.gen_range(1..6);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let a = LinearMap::from_rows(&rows).unwrap();
        let x0 = v(&(0..n).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<_>>());
        let b = a.apply(&x0).unwrap();
        let inst = Instance::new(a, b, GeneratorSet::ball_cap(Cone::orthant(n)), eps).unwrap();
        (inst, x0)
    }

    #[test]
    fn primal_objective_examples() {
        let inst = uniqueness_example();
        assert_eq!(primal_objective(&inst, &v(&[1.0, 0.0])).unwrap(), 0.5);
        assert_eq!(primal_objective(&inst, &v(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        let wide = inst.with_epsilon(1.0).unwrap();
        assert_eq!(primal_objective(&wide, &v(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn dual_objective_examples() {
        let inst = uniqueness_example();
        assert_eq!(dual_objective(&inst, &v(&[1.0, -3.0])).unwrap(), -0.5);
        for a in [0.0, -1.0, -5.0] {
            assert_eq!(dual_objective(&inst, &v(&[1.0, a])).unwrap(), -0.5);
        }
        assert_eq!(dual_objective(&inst, &v(&[0.0, 0.0])).unwrap(), 0.0);
        let unb = inst.with_target(v(&[-1.0, 0.0]), 0.5).unwrap();
        for t in [0.5, 1.0, 10.0, 1e4] {
            let j = dual_objective(&unb, &v(&[-t, 0.0])).unwrap();
            assert!((j + 0.5 * t).abs() <= 1e-12 * t);
        }
    }

    #[test]
    fn subgradient_examples() {
        let inst = uniqueness_example();
        assert_eq!(dual_subgradient(&inst, &v(&[-1.0, -1.0])).unwrap(), v(&[-1.0, 0.0]));
        assert_eq!(dual_subgradient(&inst, &v(&[1.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn subgradient_inequality_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for eps in [0.0, 0.3] {
            for _ in 0..20 {
                let (inst, _) = random_orthant(&mut rng, eps);
                let m = inst.b().dim();
                let y = v(&(0..m).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
                let st = dual_state(&inst, &y).unwrap();
                for _ in 0..100 {
                    let z = v(&(0..m).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
                    let jz = dual_objective(&inst, &z).unwrap();
                    assert!(jz >= st.value + st.subgrad.dot(&z.sub(&y)) - 1e-8);
                }
            }
        }
    }

    #[test]
    fn gap_examples() {
        let inst = uniqueness_example();
        assert_eq!(duality_gap(&inst, &v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(duality_gap(&inst, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap() >= 0.0);
    }

    #[test]
    fn weak_duality_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for eps in [0.0, 0.1] {
            for _ in 0..50 {
                let (inst, x0) = random_orthant(&mut rng, eps);
                let m = inst.b().dim();
                for _ in 0..20 {
                    let y = v(&(0..m).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
                    assert!(duality_gap(&inst, &x0, &y).unwrap() >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn dual_convexity_midpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (inst, _) = random_orthant(&mut rng, 0.2);
        let m = inst.b().dim();
        for _ in 0..500 {
            let y = v(&(0..m).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
            let z = v(&(0..m).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
            let mid = y.add(&z).scale(0.5);
            let lhs = dual_objective(&inst, &mid).unwrap();
            let rhs = 0.5 * (dual_objective(&inst, &y).unwrap() + dual_objective(&inst, &z).unwrap());
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn large_epsilon_makes_origin_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (inst, _) = random_orthant(&mut rng, 0.0);
            let inst = inst.with_epsilon(inst.b().norm()).unwrap();
            let m = inst.b().dim();
            assert_eq!(dual_objective(&inst, &Vector::zeros(m)).unwrap(), 0.0);
            for _ in 0..100 {
                let y = v(&(0..m).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>());
                assert!(dual_objective(&inst, &y).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn saddle_examples() {
        let inst = uniqueness_example();
        assert!(check_saddle(&inst, &v(&[1.0, 0.0]), &v(&[1.0, -2.0]), 1e-9).unwrap());
        assert!(!check_saddle(&inst, &v(&[0.0, 1.0]), &v(&[1.0, 0.0]), 1e-9).unwrap());
        let wide = inst.with_epsilon(1.0).unwrap();
        assert!(check_saddle(&wide, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn saddle_with_active_ball() {
        // A = Id, orthant, b = (1,0), ε = 0.25: x = (0.75,0), y = (0.75,0)
        let inst = uniqueness_example().with_epsilon(0.25).unwrap();
        assert!(check_saddle(&inst, &v(&[0.75, 0.0]), &v(&[0.75, 0.0]), 1e-12).unwrap());
        assert!(!check_saddle(&inst, &v(&[0.75, 0.0]), &v(&[0.75, 0.5]), 1e-9).unwrap());
    }

    #[test]
    fn reconstruction_on_two_ray_tie() {
        let gen = GeneratorSet::polytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let inst = Instance::new(LinearMap::identity(2), v(&[1.0, 1.0]), gen, 0.0).unwrap();
        let r = reconstruct(&inst, &v(&[2.0, 2.0])).unwrap().unwrap();
        assert!(r.x.distance(&v(&[1.0, 1.0])) < 1e-12);
        assert!((r.value - 2.0).abs() < 1e-12);
        assert_eq!(r.support.len(), 2);
    }

    #[test]
    fn instance_validation() {
        let g = GeneratorSet::ball_cap(Cone::orthant(2));
        assert!(Instance::new(LinearMap::identity(2), v(&[1.0]), g.clone(), 0.0).is_err());
        assert!(Instance::new(LinearMap::identity(2), v(&[1.0, 0.0]), g, -1.0).is_err());
    }
}
