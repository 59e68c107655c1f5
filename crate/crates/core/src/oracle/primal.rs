//! Direct primal reference: the minimum-norm point of `P ∩ {||Ax - b|| <= ε}`.
//!
//! Dykstra's alternating projections between the cone and the tube, started
//! from the origin, converge to the projection of the origin onto the
//! intersection, which is the primal solution for ball-cap generators. When
//! the affine set only touches the cone tangentially Dykstra slows to a
//! crawl; for `ε = 0` a central-cut ellipsoid method over the affine
//! parametrisation `x = x_p + N s` takes over.

use crate::cones::Cone;
use crate::duality::Instance;
use crate::error::{Error, Result};
use crate::operators::Vector;

use super::eigen::{gram, jacobi_eigen, SymmetricEigen};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceConfig {
    pub max_iter: usize,
    /// Stop when successive iterates move less than this.
    pub step_tol: f64,
    /// Admissible violation of the tube constraint at termination.
    pub feas_tol: f64,
    /// Distance-to-cone band accepted by the ellipsoid fallback.
    pub cone_band: f64,
    pub ellipsoid_iter: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            step_tol: 1e-14,
            feas_tol: 1e-10,
            cone_band: 1e-10,
            ellipsoid_iter: 40_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalReference {
    pub x: Vector,
    /// `½ ||x||²`.
    pub pi: f64,
    pub iterations: usize,
    pub method: &'static str,
}

/// Projection onto `{x : ||Ax - b|| <= ε}` through the spectrum of `AᵀA`.
struct Tube {
    a_rows: usize,
    a_cols: usize,
    entries: Vec<f64>,
    b: Vector,
    eps: f64,
    eig: SymmetricEigen,
    rank_tol: f64,
}

impl Tube {
    fn new(inst: &Instance) -> Self {
        let a = inst.a();
        let eig = jacobi_eigen(&gram(a.rows(), a.cols(), a.row_major()));
        let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        Self {
            a_rows: a.rows(),
            a_cols: a.cols(),
            entries: a.row_major().to_vec(),
            b: inst.b().clone(),
            eps: inst.epsilon(),
            rank_tol: top * 1e-12 * (a.rows().max(a.cols()) as f64),
            eig,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.a_rows)
            .map(|i| {
                let row = &self.entries[i * self.a_cols..(i + 1) * self.a_cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.a_cols];
        for (i, yi) in y.iter().enumerate() {
            let row = &self.entries[i * self.a_cols..(i + 1) * self.a_cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    fn residual(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(self.b.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `(I + μ AᵀA)⁻¹ rhs` in the eigenbasis; `μ = ∞` means the pseudo-inverse
    /// limit on the range and identity on the kernel.
    fn solve_shifted(&self, rhs: &[f64], mu: f64, kernel_part: &[f64]) -> Vec<f64> {
        let n = self.a_cols;
        let mut out = vec![0.0; n];
        for k in 0..n {
            let lambda = self.eig.values[k];
            let coef: f64 = (0..n).map(|i| self.eig.vectors[i][k] * rhs[i]).sum();
            let kc: f64 = (0..n).map(|i| self.eig.vectors[i][k] * kernel_part[i]).sum();
            let c = if lambda > self.rank_tol {
                if mu.is_infinite() {
                    coef / lambda
                } else {
                    coef / (1.0 + mu * lambda)
                }
            } else {
                kc
            };
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * self.eig.vectors[i][k];
            }
        }
        out
    }

    /// `A⁺ b`, the minimum-norm least-squares solution.
    fn pinv_b(&self) -> Vec<f64> {
        let atb = self.adjoint(self.b.as_slice());
        self.solve_shifted(&atb, f64::INFINITY, &vec![0.0; self.a_cols])
    }

    fn project(&self, w: &[f64]) -> Result<Vec<f64>> {
        if self.residual(w) <= self.eps {
            return Ok(w.to_vec());
        }
        let atb = self.adjoint(self.b.as_slice());
        if self.eps == 0.0 {
            // w - A⁺(Aw - b): range part from A⁺b, kernel part from w
            let x = self.solve_shifted(&atb, f64::INFINITY, w);
            return Ok(x);
        }
        let at_x = |mu: f64| -> Vec<f64> {
            let rhs: Vec<f64> = w.iter().zip(&atb).map(|(a, b)| a + mu * b).collect();
            self.solve_shifted(&rhs, mu, w)
        };
        let mut hi = 1.0;
        while self.residual(&at_x(hi)) > self.eps {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Infeasible);
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.residual(&at_x(mid)) > self.eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(at_x(hi))
    }

    /// Orthonormal kernel basis of `A` (columns of the eigenbasis).
    fn kernel(&self) -> Vec<Vec<f64>> {
        (0..self.a_cols)
            .filter(|&k| self.eig.values[k] <= self.rank_tol)
            .map(|k| self.eig.vector(k))
            .collect()
    }
}

/// Minimum-norm feasible point for a ball-cap instance.
pub fn primal_reference(inst: &Instance, cfg: &ReferenceConfig) -> Result<PrimalReference> {
    let Some(cone) = inst.generator().cone() else {
        return Err(Error::UnsupportedGenerator("primal reference"));
    };
    let n = inst.a().cols();
    if inst.b().norm() <= inst.epsilon() {
        return Ok(PrimalReference {
            x: Vector::zeros(n),
            pi: 0.0,
            iterations: 0,
            method: "trivial",
        });
    }
    let tube = Tube::new(inst);
    // b must be reachable by A at all
    let lsq = tube.residual(&tube.pinv_b());
    if lsq > inst.epsilon() + cfg.feas_tol * (1.0 + inst.b().norm()) {
        return Err(Error::Infeasible);
    }

    let mut x = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let feas = cfg.feas_tol * (1.0 + inst.b().norm());
    for k in 0..cfg.max_iter {
        let u: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let t = tube.project(&u)?;
        p = u.iter().zip(&t).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = t.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next = cone.project_unchecked(&Vector::from_vec_unchecked(w.clone()))?;
        let next = next.into_vec();
        q = w.iter().zip(&next).map(|(a, b)| a - b).collect();
        let step = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        x = next;
        if step <= cfg.step_tol * (1.0 + norm(&x)) && tube.residual(&x) <= inst.epsilon() + feas {
            let v = Vector::from_vec_unchecked(x);
            let pi = 0.5 * v.dot(&v);
            return Ok(PrimalReference {
                x: v,
                pi,
                iterations: k + 1,
                method: "dykstra",
            });
        }
    }
    if inst.epsilon() > 0.0 {
        return Err(Error::NonConvergence(format!(
            "dykstra reference after {} iterations",
            cfg.max_iter
        )));
    }
    ellipsoid(cone, &tube, &x, cfg)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `min ||s||` subject to `dist(x_p + N s, P) <= band`, with `x_p ⊥ N` so the
/// objective equals `||x||² - ||x_p||²`.
fn ellipsoid(cone: &Cone, tube: &Tube, start: &[f64], cfg: &ReferenceConfig) -> Result<PrimalReference> {
    let xp = tube.pinv_b();
    let basis = tube.kernel();
    let d = basis.len();
    let lift = |s: &[f64]| -> Vec<f64> {
        let mut x = xp.clone();
        for (col, sk) in basis.iter().zip(s) {
            for (xi, c) in x.iter_mut().zip(col) {
                *xi += sk * c;
            }
        }
        x
    };
    let distance = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let xv = Vector::from_vec_unchecked(x.to_vec());
        let proj = cone.project_unchecked(&xv)?;
        let diff = xv.sub(&proj).into_vec();
        Ok((norm(&diff), diff))
    };
    let finish = |s: Vec<f64>, iterations: usize| {
        let x = Vector::from_vec_unchecked(lift(&s));
        let pi = 0.5 * x.dot(&x);
        PrimalReference {
            x,
            pi,
            iterations,
            method: "ellipsoid",
        }
    };
    if d == 0 {
        let (dist, _) = distance(&xp)?;
        return if dist <= cfg.cone_band {
            Ok(finish(Vec::new(), 0))
        } else {
            Err(Error::Infeasible)
        };
    }
    let s0: Vec<f64> = basis
        .iter()
        .map(|col| col.iter().zip(start).map(|(a, b)| a * b).sum())
        .collect();
    let radius = 2.0 * norm(&s0) + 1.0;
    let mut best: Option<(f64, Vec<f64>)> = None;

    if d == 1 {
        let (mut lo, mut hi) = (-radius, radius);
        for it in 0..cfg.ellipsoid_iter {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-15 * radius {
                return best.map(|(_, s)| finish(s, it)).ok_or(Error::Infeasible);
            }
            let (dist, normal) = distance(&lift(&[mid]))?;
            let g = if dist > cfg.cone_band {
                basis[0].iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>()
            } else {
                if best.as_ref().is_none_or(|(v, _)| mid.abs() < *v) {
                    best = Some((mid.abs(), vec![mid]));
                }
                mid
            };
            if g > 0.0 {
                hi = mid;
            } else if g < 0.0 {
                lo = mid;
            } else {
                return best.map(|(_, s)| finish(s, it)).ok_or(Error::Infeasible);
            }
        }
        return best
            .map(|(_, s)| finish(s, cfg.ellipsoid_iter))
            .ok_or(Error::Infeasible);
    }

    let df = d as f64;
    let mut c = vec![0.0; d];
    let mut e: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { radius * radius } else { 0.0 }).collect())
        .collect();
    for it in 0..cfg.ellipsoid_iter {
        let (dist, normal) = distance(&lift(&c))?;
        let g: Vec<f64> = if dist > cfg.cone_band {
            basis
                .iter()
                .map(|col| col.iter().zip(&normal).map(|(a, b)| a * b).sum())
                .collect()
        } else {
            let obj = norm(&c);
            if best.as_ref().is_none_or(|(v, _)| obj < *v) {
                best = Some((obj, c.clone()));
            }
            c.clone()
        };
        let eg: Vec<f64> = (0..d).map(|i| (0..d).map(|j| e[i][j] * g[j]).sum()).collect();
        let geg: f64 = g.iter().zip(&eg).map(|(a, b)| a * b).sum();
        if !(geg > 1e-300) || geg.sqrt() <= 1e-14 * (1.0 + norm(&c)) {
            return best.map(|(_, s)| finish(s, it)).ok_or(Error::Infeasible);
        }
        let root = geg.sqrt();
        for i in 0..d {
            c[i] -= eg[i] / (root * (df + 1.0));
        }
        let factor = df * df / (df * df - 1.0);
        for i in 0..d {
            for j in 0..d {
                e[i][j] = factor * (e[i][j] - 2.0 / (df + 1.0) * eg[i] * eg[j] / geg);
            }
        }
    }
    best.map(|(_, s)| finish(s, cfg.ellipsoid_iter))
        .ok_or(Error::Infeasible)
}
