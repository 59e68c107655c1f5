use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolveReport, SolveStatus, SolverConfig, TraceRow};
use crate::duality::{self, Instance};
use crate::error::{Error, Result};
use crate::operators::{LinearMap, Vector};

const CHECK_EVERY: usize = 500;

/// Largest singular value of `a` by power iteration on `AᵀA`.
pub fn estimate_operator_norm(a: &LinearMap) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = Vector::from_vec_unchecked((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mut est = 0.0;
    for _ in 0..200 {
        let Some(u) = x.normalized() else {
            return 0.0;
        };
        let w = a.adjoint_apply_unchecked(&a.apply_unchecked(&u));
        let next = w.norm().sqrt();
        x = w;
        if (next - est).abs() <= 1e-15 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Chambolle-Pock iteration from the origin; see [`pdhg_solve_from`].
pub fn pdhg_solve(inst: &Instance, cfg: &SolverConfig) -> Result<(Vector, Vector, SolveReport)> {
    let x0 = Vector::zeros(inst.a().cols());
    let z0 = Vector::zeros(inst.a().rows());
    pdhg_solve_from(inst, cfg, x0, z0)
}

/// Primal-dual hybrid gradient on the saddle function
/// `<z, Ax> + ½ j(x)² - <b, z> - ε||z||` for ball-cap generators.
///
/// The `x` update is `P(w) / (1 + τ)`; the `z` update shifts by `-σ b` and
/// shrinks radially by `σ ε`. With `pdhg_gamma > 0` the steps are rescaled
/// each iteration using the strong convexity of `½||x||²`. Returns the last
/// primal iterate and the dual point `y = -z`.
pub fn pdhg_solve_from(
    inst: &Instance,
    cfg: &SolverConfig,
    x0: Vector,
    z0: Vector,
) -> Result<(Vector, Vector, SolveReport)> {
    let Some(cone) = inst.generator().cone() else {
        return Err(Error::UnsupportedGenerator("pdhg"));
    };
    cfg.validate(inst.a())?;
    let a = inst.a();
    let b = inst.b();
    let eps = inst.epsilon();
    let (mut tau, mut sigma) = cfg.pdhg_steps(a);
    let mut x = x0;
    let mut z = z0;
    let mut x_bar = x.clone();
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = cfg.pdhg_max_iter;
    let mut gap = None;

    for k in 0..cfg.pdhg_max_iter {
        let v = z.add(&a.apply_unchecked(&x_bar).sub(b).scale(sigma));
        let vn = v.norm();
        z = if vn <= sigma * eps {
            Vector::zeros(v.dim())
        } else {
            v.scale(1.0 - sigma * eps / vn)
        };
        let w = x.axpy(-tau, &a.adjoint_apply_unchecked(&z));
        let x_new = cone.project_unchecked(&w)?.scale(1.0 / (1.0 + tau));
        let theta = 1.0 / (1.0 + 2.0 * cfg.pdhg_gamma * tau).sqrt();
        x_bar = x_new.axpy(theta, &x_new.sub(&x));
        x = x_new;
        tau *= theta;
        sigma /= theta;

        if (k + 1) % CHECK_EVERY == 0 || k + 1 == cfg.pdhg_max_iter {
            let y = z.scale(-1.0);
            let j = duality::dual_objective(inst, &y)?;
            let infeas = (inst.residual(&x)? - eps).max(0.0);
            trace.push(TraceRow {
                iter: k + 1,
                value: j,
                y_norm: y.norm(),
                residual: infeas,
            });
            best = best.min(j);
            let pi = 0.5 * x.dot(&x);
            let g = pi + j;
            if infeas <= cfg.grad_tol * (1.0 + b.norm()) && g.abs() <= cfg.grad_tol * (1.0 + pi) {
                status = SolveStatus::Converged;
                iterations = k + 1;
                gap = Some(g);
                break;
            }
            if y.norm() > cfg.diverge_norm {
                status = SolveStatus::UnboundedBelow;
                iterations = k + 1;
                break;
            }
        }
    }
    let y = z.scale(-1.0);
    let report = SolveReport {
        status,
        y_final: y.clone(),
        best_value: best,
        ray: None,
        trace,
        iterations,
        primal: Some(x.clone()),
        gap,
        samples: Vec::new(),
    };
    Ok((x, y, report))
}
