use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::{Schedule, SolveReport, SolveStatus, SolverConfig, TraceRow};
use crate::duality::{self, Instance, Reconstruction};
use crate::error::Result;
use crate::linalg;
use crate::operators::Vector;

const NONMONOTONE_MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 200;
const RECONSTRUCT_EVERY: usize = 10;
/// Past `diverge_norm * RUNAWAY` the iterate is classified unconditionally.
const RUNAWAY: f64 = 1e6;
/// Relative change of `J` over the stall window that counts as stable.
const STALL_REL: f64 = 1e-8;
/// Relative decrease of `J` an extrapolation probe must beat.
const PROBE_NOISE: f64 = 1e-12;
/// A single probe may multiply `||y||` by at most this factor.
const PROBE_GROWTH: f64 = 100.0;
const SETTLE_STEPS: usize = 30;
/// Past `||y|| = PROBE_FLOOR`, probes also run whenever
/// `-J >= UNBOUNDED_SLOPE ||b|| ||y||`, i.e. `J` falls linearly. A bounded
/// non-attained valley fails the test; probing it would overshoot into
/// rounding noise.
const UNBOUNDED_SLOPE: f64 = 1e-3;
const PROBE_FLOOR: f64 = 1e3;

#[derive(Debug, Clone)]
struct Point {
    y: Vector,
    /// (Sub)gradient of `f(y) = ½ σ(A*y)² - <b, y>`.
    g: Vector,
    /// `J_ε(y)`.
    j: f64,
}

fn evaluate(inst: &Instance, y: Vector) -> Result<Point> {
    let (f, g, _, _) = duality::smooth_part(inst, &y)?;
    let j = f + inst.epsilon() * y.norm();
    Ok(Point { y, g, j })
}

/// Proximal map of `t ||·||`.
fn shrink(u: &Vector, t: f64) -> Vector {
    let n = u.norm();
    if n <= t {
        Vector::zeros(u.dim())
    } else {
        u.scale(1.0 - t / n)
    }
}

struct Run<'a> {
    inst: &'a Instance,
    cfg: &'a SolverConfig,
    trace: Vec<TraceRow>,
    samples: Vec<(usize, Vector)>,
    best: f64,
}

impl Run<'_> {
    fn record(&mut self, k: usize, p: &Point, residual: f64) {
        self.trace.push(TraceRow {
            iter: k,
            value: p.j,
            y_norm: p.y.norm(),
            residual,
        });
        self.best = self.best.min(p.j);
        if k.is_power_of_two() {
            self.samples.push((k, p.y.clone()));
        }
    }

    fn finish(
        self,
        status: SolveStatus,
        p: Point,
        iterations: usize,
        ray: Option<Vector>,
        primal: Option<(Vector, f64)>,
    ) -> SolveReport {
        let mut samples = self.samples;
        if samples.last().is_none_or(|(k, _)| *k != iterations) {
            samples.push((iterations, p.y.clone()));
        }
        let (primal, gap) = match primal {
            Some((x, gap)) => (Some(x), Some(gap)),
            None => (None, None),
        };
        SolveReport {
            status,
            y_final: p.y,
            best_value: self.best,
            ray,
            trace: self.trace,
            iterations,
            primal,
            gap,
            samples,
        }
    }

    /// `J` flat to `STALL_REL` over the stall window while `||y||` grew.
    fn stalled_and_growing(&self) -> bool {
        let n = self.trace.len();
        let w = self.cfg.stall_window;
        if n <= w {
            return false;
        }
        let now = self.trace[n - 1];
        let then = self.trace[n - 1 - w];
        (now.value - then.value).abs() <= STALL_REL * (1.0 + now.value.abs()) && now.y_norm > then.y_norm
    }

    /// `Some` once the divergence is understood, `None` to keep iterating.
    /// With `force` a verdict is always returned.
    fn classify(&self, p: &Point, force: bool) -> Result<Option<(SolveStatus, Option<Vector>)>> {
        let n = self.trace.len();
        let w = self.cfg.stall_window;
        if self.inst.epsilon() == 0.0 && n > w {
            let now = self.trace[n - 1];
            let then = self.trace[n - 1 - w];
            if (now.value - then.value).abs() <= STALL_REL * (1.0 + now.value.abs()) && now.y_norm > then.y_norm {
                return Ok(Some((SolveStatus::NonAttainedSuspected, None)));
            }
        }
        let ray = p.y.normalized();
        let verified = match &ray {
            Some(r) => {
                let sigma = self
                    .inst
                    .generator()
                    .support_value(&self.inst.a().adjoint_apply_unchecked(r))?;
                sigma <= 10.0 * self.cfg.grad_tol && self.inst.b().dot(r) > self.cfg.cert_tol * self.inst.b().norm()
            }
            None => false,
        };
        let decreasing = n > 1 && self.trace[n - 1].value < self.trace[n - 2].value;
        if verified && (p.j < self.cfg.diverge_obj || (force && decreasing)) {
            return Ok(Some((SolveStatus::UnboundedBelow, ray)));
        }
        Ok(force.then_some((SolveStatus::MaxIter, None)))
    }
}

/// Minimises `J_ε` from `cfg.y0` (or the origin).
///
/// Ball-cap generators make `½ σ²` smooth and the spectral schedule then
/// uses a nonmonotone line search. For polytope and box generators the
/// search is monotone and, every few iterations, a primal point is rebuilt
/// from the support face; a small duality gap against it certifies
/// convergence at kinks where the subgradient never vanishes.
pub fn minimize_dual(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate(inst.a())?;
    let eps = inst.epsilon();
    let smooth = inst.generator().is_smooth();
    let memory = if smooth { NONMONOTONE_MEMORY } else { 1 };
    let y0 = cfg.y0.clone().unwrap_or_else(|| Vector::zeros(inst.a().rows()));
    let mut p = evaluate(inst, y0)?;
    let mut run = Run {
        inst,
        cfg,
        trace: Vec::new(),
        samples: Vec::new(),
        best: f64::INFINITY,
    };
    let mut alpha = 1.0 / cfg.step0;
    let mut hist: VecDeque<f64> = VecDeque::with_capacity(memory + 1);
    hist.push_back(p.j);
    // iterates at which ||y|| first doubled; long baselines for probes
    let mut anchors: Vec<Vector> = Vec::new();
    let mut diverging = false;
    let mut ls_failed = false;
    // lower bound on inf J from the best rebuilt primal point
    let mut level: Option<f64> = None;

    for k in 0..cfg.max_iter {
        let residual = p.y.distance(&shrink(&p.y.sub(&p.g), eps));
        run.record(k, &p, residual);
        let ny = p.y.norm();
        if ny > 0.0 && anchors.last().is_none_or(|a| ny >= 2.0 * a.norm()) {
            anchors.push(p.y.clone());
        }

        if residual <= cfg.grad_tol
            && ny <= cfg.diverge_norm
            && (!smooth || recovery_gap(inst, &p)? <= cfg.gap_tol * (1.0 + p.j.abs()))
        {
            let primal = if smooth { None } else { certified_primal(inst, &p)? };
            return Ok(run.finish(SolveStatus::Converged, p, k, None, primal));
        }

        if !smooth && !diverging && (k % RECONSTRUCT_EVERY == 0 || ls_failed) {
            if let Some(rec) = duality::reconstruct(inst, &p.y)? {
                if let Some(q) = polish(inst, &p, &rec)? {
                    p = q;
                    hist.clear();
                    hist.push_back(p.j);
                    let r = p.y.distance(&shrink(&p.y.sub(&p.g), eps));
                    run.record(k, &p, r);
                }
                level = Some(level.map_or(-rec.value, |l: f64| l.max(-rec.value)));
                let gap = rec.value + p.j;
                if gap <= cfg.gap_tol * (1.0 + p.j.abs()) {
                    return Ok(run.finish(SolveStatus::Converged, p, k, None, Some((rec.x, gap))));
                }
            }
        }

        if ny > cfg.diverge_norm || p.j < cfg.diverge_obj || !p.j.is_finite() {
            diverging = true;
        }
        if diverging {
            let force = ny > cfg.diverge_norm * RUNAWAY || !p.j.is_finite();
            if let Some((status, ray)) = run.classify(&p, force)? {
                return Ok(run.finish(status, p, k, ray, None));
            }
        }
        if k % RECONSTRUCT_EVERY == 0 && ny > PROBE_FLOOR && -p.j > UNBOUNDED_SLOPE * inst.b().norm() * ny {
            if let Some(q) = probe(inst, &p, &anchors)? {
                p = q;
                hist.clear();
                hist.push_back(p.j);
                continue;
            }
        }

        if eps == 0.0 && !diverging && run.stalled_and_growing() {
            if let Some(q) = probe(inst, &p, &anchors)? {
                p = q;
                hist.clear();
                hist.push_back(p.j);
                continue;
            }
        }

        ls_failed = false;
        let next = match cfg.schedule {
            Schedule::Spectral => {
                let reference = hist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                line_search(inst, &p, alpha, reference)?
            }
            Schedule::InvSqrt => {
                let t = cfg.step0 / ((k + 1) as f64).sqrt();
                Some((prox_step(inst, &p, t)?, 1.0 / t))
            }
            Schedule::PolyakEstimate => {
                let margin = cfg.step0 / ((k + 1) as f64).sqrt() * (1.0 + run.best.abs());
                let target = level.map_or(run.best - margin, |l| l.max(run.best - margin));
                polyak_step(inst, &p, target)?.map(|q| (q, alpha))
            }
        };
        let q = match next {
            Some((q, a)) => {
                alpha = a;
                q
            }
            None => {
                ls_failed = true;
                let fallback = match level {
                    Some(l) if !smooth => polyak_step(inst, &p, l)?,
                    _ if !smooth => Some(prox_step(inst, &p, cfg.step0 / ((k + 1) as f64).sqrt())?),
                    _ => None,
                };
                match fallback {
                    Some(q) => q,
                    None if eps == 0.0 && probe(inst, &p, &anchors)?.is_some() => {
                        probe(inst, &p, &anchors)?.expect("probe is deterministic")
                    }
                    None => {
                        // no descent possible at working precision
                        let status = if diverging {
                            run.classify(&p, true)?.unwrap_or((SolveStatus::MaxIter, None))
                        } else {
                            (SolveStatus::MaxIter, None)
                        };
                        return Ok(run.finish(status.0, p, k, status.1, None));
                    }
                }
            }
        };
        let s = q.y.sub(&p.y);
        let ss = s.dot(&s);
        if ss > 0.0 {
            let sr = s.dot(&q.g.sub(&p.g));
            alpha = if sr > 0.0 { (sr / ss).clamp(1e-30, 1e30) } else { 1e-30 };
        }
        p = q;
        hist.push_back(p.j);
        while hist.len() > memory {
            hist.pop_front();
        }
    }
    let iterations = cfg.max_iter;
    let residual = p.y.distance(&shrink(&p.y.sub(&p.g), eps));
    run.record(iterations, &p, residual);
    let (status, ray) = if diverging {
        run.classify(&p, true)?.unwrap_or((SolveStatus::MaxIter, None))
    } else {
        (SolveStatus::MaxIter, None)
    };
    Ok(run.finish(status, p, iterations, ray, None))
}

/// `½ σ(A*y)² + J(y)`: the gap against the recovered `x = σ ∂σ(A*y)`
/// ignoring its feasibility, which the stationarity test already controls.
/// Small stationarity alone is not enough far out along a non-attained
/// minimising sequence, where the gradient decays faster than the gap.
fn recovery_gap(inst: &Instance, p: &Point) -> Result<f64> {
    let sigma = inst
        .generator()
        .support_value(&inst.a().adjoint_apply_unchecked(&p.y))?;
    Ok((0.5 * sigma * sigma + p.j).abs())
}

fn prox_step(inst: &Instance, p: &Point, t: f64) -> Result<Point> {
    let w = p.y.axpy(-t, &p.g);
    evaluate(inst, shrink(&w, t * inst.epsilon()))
}

/// Extrapolates along the growth direction `y - y_old`, where `y_old` is an
/// earlier iterate of at most half the norm, doubling the step while `J`
/// (after settling) keeps strictly decreasing. Along a non-attained minimising
/// sequence the first-order steps stall at rounding level long before the
/// iterate has travelled far; this lets the stall test see the growth.
fn probe(inst: &Instance, p: &Point, anchors: &[Vector]) -> Result<Option<Point>> {
    let half = 0.5 * p.y.norm();
    let Some(anchor) = anchors.iter().rev().find(|a| a.norm() <= half) else {
        return Ok(None);
    };
    let u = p.y.sub(anchor);
    let limit = PROBE_GROWTH * p.y.norm().max(1.0);
    let mut best: Option<Point> = None;
    let mut t = 1.0;
    loop {
        let cand = p.y.axpy(t, &u);
        if cand.norm() > limit {
            break;
        }
        let q = settle(inst, evaluate(inst, cand)?)?;
        let reference = best.as_ref().map_or(p.j, |b| b.j);
        if !(q.j < reference - PROBE_NOISE * (1.0 + reference.abs())) {
            break;
        }
        best = Some(q);
        t *= 2.0;
    }
    Ok(best)
}

/// A few monotone spectral steps, used to pull an extrapolated point back
/// into the valley it was pushed out of.
fn settle(inst: &Instance, mut p: Point) -> Result<Point> {
    let mut alpha = 1.0;
    for _ in 0..SETTLE_STEPS {
        let Some((q, _)) = line_search(inst, &p, alpha, p.j)? else {
            break;
        };
        let s = q.y.sub(&p.y);
        let ss = s.dot(&s);
        let sr = s.dot(&q.g.sub(&p.g));
        alpha = if sr > 0.0 { (sr / ss).clamp(1e-30, 1e30) } else { 1.0 };
        p = q;
    }
    Ok(p)
}

/// Forward-backward step with backtracking from `1 / alpha`; accepts against
/// the nonmonotone reference value.
fn line_search(inst: &Instance, p: &Point, alpha: f64, reference: f64) -> Result<Option<(Point, f64)>> {
    let mut a = alpha;
    for _ in 0..MAX_BACKTRACKS {
        let q = prox_step(inst, p, 1.0 / a)?;
        let d = q.y.sub(&p.y);
        let dd = d.dot(&d);
        if dd == 0.0 {
            return Ok(None);
        }
        if q.j.is_finite() && q.j <= reference - 0.5 * ARMIJO * a * dd {
            return Ok(Some((q, a)));
        }
        a *= 2.0;
    }
    Ok(None)
}

/// Subgradient step of Polyak length towards `target`.
fn polyak_step(inst: &Instance, p: &Point, target: f64) -> Result<Option<Point>> {
    let ny = p.y.norm();
    let g = if ny > 0.0 {
        p.g.axpy(inst.epsilon() / ny, &p.y)
    } else {
        p.g.clone()
    };
    let gg = g.dot(&g);
    if gg == 0.0 || p.j <= target {
        return Ok(None);
    }
    let t = (p.j - target) / gg;
    Ok(Some(evaluate(inst, p.y.axpy(-t, &g))?))
}

/// Rebuilds and checks a primal point at a stationary dual iterate.
fn certified_primal(inst: &Instance, p: &Point) -> Result<Option<(Vector, f64)>> {
    Ok(duality::reconstruct(inst, &p.y)?.map(|rec| {
        let gap = rec.value + p.j;
        (rec.x, gap)
    }))
}

/// Moves `y` minimally so that the support face at `A*y` is exactly the one
/// carrying the rebuilt primal point, with `σ(A*y) = j(x)`. Returns the new
/// point only when it lowers `J`.
fn polish(inst: &Instance, p: &Point, rec: &Reconstruction) -> Result<Option<Point>> {
    if rec.support.is_empty() {
        return Ok(None);
    }
    let s = (2.0 * rec.value).sqrt();
    let images: Vec<Vector> = rec.support.iter().map(|v| inst.a().apply_unchecked(v)).collect();
    let candidate = if inst.epsilon() == 0.0 {
        let m = inst.a().rows();
        let mat = DMatrix::from_fn(images.len(), m, |j, i| images[j][i]);
        let rhs = nalgebra::DVector::from_iterator(images.len(), images.iter().map(|im| s - im.dot(&p.y)));
        let delta = linalg::lstsq(&mat, &rhs);
        p.y.add(&linalg::from_dvector(&delta))
    } else {
        let r = inst.b().sub(&inst.a().apply_unchecked(&rec.x));
        let u = r.scale(1.0 / inst.epsilon());
        let c = images.iter().map(|im| u.dot(im)).sum::<f64>() / images.len() as f64;
        if !(c > 0.0) {
            return Ok(None);
        }
        u.scale(s / c)
    };
    let q = evaluate(inst, candidate)?;
    Ok((q.j < p.j).then_some(q))
}
