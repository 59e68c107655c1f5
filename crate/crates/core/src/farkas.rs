//! Top-level decisions: approximate and exact feasibility, certificates, the
//! Farkas constant `C(b)`, the conic pseudoinverse, dual-attainment
//! diagnosis and the convex relaxation of finite generator lists.

use crate::cones::Cone;
use crate::duality::{self, Instance};
use crate::error::{Error, Result};
use crate::generators::{extremality_check, GeneratorKind, GeneratorSet};
use crate::linalg;
use crate::operators::{LinearMap, Vector};
use crate::oracle::{self, LpProblem, LpSolution, ReferenceConfig};
use crate::solvers::{self, SolveStatus, SolverConfig, TraceRow};

/// Relative tolerance of the shared-normal search run after a suspected
/// non-attainment. Primal points from the fallback methods are accurate to
/// roughly `1e-6`, so tighter values would mistake their error for a normal.
pub const ATTAINMENT_TOL: f64 = 1e-4;

/// Angle below which a recovered point counts as lying on a raw generator.
pub const COLLINEARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    InfeasibleClosure,
    ExactInfeasibleEvidence,
    Unresolved,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "Feasible",
            Verdict::InfeasibleClosure => "InfeasibleClosure",
            Verdict::ExactInfeasibleEvidence => "ExactInfeasibleEvidence",
            Verdict::Unresolved => "Unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualAttainment {
    Yes,
    No,
    Suspected,
    Unknown,
}

impl DualAttainment {
    pub fn as_str(self) -> &'static str {
        match self {
            DualAttainment::Yes => "Yes",
            DualAttainment::No => "No",
            DualAttainment::Suspected => "Suspected",
            DualAttainment::Unknown => "Unknown",
        }
    }
}

/// Whether `A⁻¹(b)` and `λ⋆K` share a normal at `x⋆` that pairs positively
/// with `x⋆`.
#[derive(Debug, Clone, PartialEq)]
pub enum Attainment {
    /// A shared unit normal `v` with `<v, x⋆> > 0`.
    AttainedPossible(Vector),
    /// Shared normals exist, all orthogonal to `x⋆`.
    AllNormalsOrthogonal,
    NoSharedNormal,
}

impl Attainment {
    pub fn name(&self) -> &'static str {
        match self {
            Attainment::AttainedPossible(_) => "AttainedPossible",
            Attainment::AllNormalsOrthogonal => "AllNormalsOrthogonal",
            Attainment::NoSharedNormal => "NoSharedNormal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub x: Option<Vector>,
    /// Final dual iterate.
    pub y: Option<Vector>,
    pub certificate: Option<Vector>,
    pub gap: Option<f64>,
    /// `½ j(x)²`.
    pub pi: Option<f64>,
    /// `j(x)`.
    pub lambda_star: Option<f64>,
    /// `√(2π₀)`, exact problems only; infinite on infeasibility evidence.
    pub c_of_b: Option<f64>,
    pub dual_attained: DualAttainment,
    /// The support maximiser at `A*y` is unique, so `x` is the only
    /// candidate the recovery map offers.
    pub unique_recovery: bool,
    pub in_original_cone: Option<bool>,
    pub attainment: Option<Attainment>,
    pub status: Option<SolveStatus>,
    pub best_value: Option<f64>,
    pub iterations: usize,
    pub generator: String,
    pub diagnostics: Vec<String>,
    /// `(iteration, <b, y> / σ(A*y))` along the dual samples.
    pub ratio_trace: Vec<(usize, f64)>,
    pub trace: Vec<TraceRow>,
}

impl Outcome {
    fn new(inst: &Instance, verdict: Verdict) -> Self {
        Self {
            verdict,
            x: None,
            y: None,
            certificate: None,
            gap: None,
            pi: None,
            lambda_star: None,
            c_of_b: None,
            dual_attained: DualAttainment::Unknown,
            unique_recovery: false,
            in_original_cone: None,
            attainment: None,
            status: None,
            best_value: None,
            iterations: 0,
            generator: inst.generator().label(),
            diagnostics: Vec::new(),
            ratio_trace: Vec::new(),
            trace: Vec::new(),
        }
    }

    fn trivial(inst: &Instance) -> Self {
        let mut out = Self::new(inst, Verdict::Feasible);
        out.x = Some(Vector::zeros(inst.a().cols()));
        out.y = Some(Vector::zeros(inst.a().rows()));
        out.gap = Some(0.0);
        out.pi = Some(0.0);
        out.lambda_star = Some(0.0);
        if inst.epsilon() == 0.0 {
            out.c_of_b = Some(0.0);
        }
        out.dual_attained = DualAttainment::Yes;
        out.unique_recovery = true;
        out
    }

    fn set_primal(&mut self, inst: &Instance, x: Vector) -> Result<()> {
        let j = inst.generator().gauge(&x)?;
        self.pi = Some(0.5 * j * j);
        self.lambda_star = Some(j);
        if inst.epsilon() == 0.0 {
            self.c_of_b = Some(j);
        }
        self.x = Some(x);
        Ok(())
    }
}

/// Dispatches on `ε`.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    if inst.epsilon() > 0.0 {
        solve_approximate(inst, cfg)
    } else {
        solve_exact(inst, cfg)
    }
}

/// Decides `b ∈ cl A(P)` through `(𝒫_ε)` and its dual for `ε > 0`.
pub fn solve_approximate(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    if !(inst.epsilon() > 0.0) {
        return Err(Error::InvalidInput("solve_approximate needs epsilon > 0".into()));
    }
    if inst.b().norm() <= inst.epsilon() {
        return Ok(Outcome::trivial(inst));
    }
    let report = solvers::minimize_dual(inst, cfg)?;
    let mut out = Outcome::new(inst, Verdict::Unresolved);
    out.status = Some(report.status);
    out.best_value = Some(report.best_value);
    out.iterations = report.iterations;
    out.y = Some(report.y_final.clone());
    match report.status {
        SolveStatus::Converged => {
            let y = &report.y_final;
            let (x, unique) = recover(inst, y, report.primal.clone())?;
            if verified_primal(inst, &x, cfg.verify_tol)? {
                out.verdict = Verdict::Feasible;
                out.gap = Some(duality::duality_gap(inst, &x, y)?);
                out.dual_attained = DualAttainment::Yes;
                out.unique_recovery = unique;
                out.set_primal(inst, x)?;
            } else {
                out.diagnostics
                    .push("recovered primal point failed verification".into());
            }
        }
        SolveStatus::UnboundedBelow => attach_certificate(inst, cfg, &report.ray, &mut out)?,
        SolveStatus::NonAttainedSuspected | SolveStatus::MaxIter => {
            out.diagnostics
                .push(format!("dual solver stopped with {}", report.status.as_str()));
        }
    }
    out.trace = report.trace;
    Ok(out)
}

/// Decides `b ∈ A(P)` for `ε = 0`.
///
/// When the dual minimiser is attained the primal point comes from the
/// recovery map. When it is not, a primal method supplies `x` and the
/// shared-normal test corroborates the non-attainment.
pub fn solve_exact(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    if inst.epsilon() != 0.0 {
        return Err(Error::InvalidInput("solve_exact needs epsilon = 0".into()));
    }
    if inst.b().is_zero() {
        return Ok(Outcome::trivial(inst));
    }
    let report = solvers::minimize_dual(inst, cfg)?;
    let mut out = Outcome::new(inst, Verdict::Unresolved);
    out.status = Some(report.status);
    out.best_value = Some(report.best_value);
    out.iterations = report.iterations;
    out.y = Some(report.y_final.clone());
    let y = report.y_final.clone();

    let diverged = report.status == SolveStatus::UnboundedBelow || report.best_value < cfg.diverge_obj;
    if diverged {
        out.verdict = Verdict::ExactInfeasibleEvidence;
        out.c_of_b = Some(f64::INFINITY);
        out.ratio_trace = ratio_trace(inst, &report.samples)?;
        if let Some(ray) = &report.ray {
            if certificate_verify(inst, ray, cfg.cert_tol)? {
                out.certificate = Some(ray.clone());
            }
        }
        out.trace = report.trace;
        return Ok(out);
    }

    match report.status {
        SolveStatus::Converged => {
            let (x, unique) = recover(inst, &y, report.primal.clone())?;
            if verified_primal(inst, &x, cfg.verify_tol)? {
                out.verdict = Verdict::Feasible;
                out.gap = Some(duality::duality_gap(inst, &x, &y)?);
                out.dual_attained = DualAttainment::Yes;
                out.unique_recovery = unique;
                out.set_primal(inst, x)?;
            } else if let Some(x) = primal_fallback(inst, cfg, &y, &mut out.diagnostics)? {
                out.diagnostics.push("recovery map failed; primal fallback used".into());
                out.verdict = Verdict::Feasible;
                out.set_primal(inst, x)?;
            }
        }
        SolveStatus::NonAttainedSuspected => {
            out.dual_attained = DualAttainment::Suspected;
            if let Some(x) = primal_fallback(inst, cfg, &y, &mut out.diagnostics)? {
                out.verdict = Verdict::Feasible;
                if let Some(cone) = inst.generator().cone() {
                    match diagnose_attainment(inst.a(), cone, &x, ATTAINMENT_TOL) {
                        Ok(att) => {
                            if !matches!(att, Attainment::AttainedPossible(_)) {
                                out.dual_attained = DualAttainment::No;
                            } else {
                                out.diagnostics
                                    .push("shared normal found despite suspected non-attainment".into());
                            }
                            out.attainment = Some(att);
                        }
                        Err(e) => out.diagnostics.push(format!("attainment diagnosis skipped: {e}")),
                    }
                }
                out.set_primal(inst, x)?;
            }
        }
        SolveStatus::UnboundedBelow | SolveStatus::MaxIter => {
            out.diagnostics
                .push(format!("dual solver stopped with {}", report.status.as_str()));
        }
    }
    out.trace = report.trace;
    Ok(out)
}

/// Same decision as [`solve`] driven by the primal-dual iteration instead of
/// the dual descent; ball-cap generators only. `x` is accepted when it
/// verifies, otherwise the normalised dual iterate is tested as a
/// certificate. Dual attainment is left `Unknown`.
pub fn solve_primal_dual(inst: &Instance, cfg: &SolverConfig) -> Result<Outcome> {
    if inst.b().norm() <= inst.epsilon() {
        return Ok(Outcome::trivial(inst));
    }
    let (x, y, report) = solvers::pdhg_solve(inst, cfg)?;
    let mut out = Outcome::new(inst, Verdict::Unresolved);
    out.status = Some(report.status);
    out.best_value = Some(report.best_value);
    out.iterations = report.iterations;
    out.trace = report.trace;
    if verified_primal(inst, &x, cfg.verify_tol)? {
        out.verdict = Verdict::Feasible;
        out.gap = Some(duality::duality_gap(inst, &x, &y)?);
        out.set_primal(inst, x)?;
    } else if let Some(ray) = y
        .normalized()
        .filter(|r| certificate_verify(inst, r, cfg.cert_tol).unwrap_or(false))
    {
        if inst.epsilon() > 0.0 {
            out.verdict = Verdict::InfeasibleClosure;
            out.dual_attained = DualAttainment::No;
        } else {
            out.verdict = Verdict::ExactInfeasibleEvidence;
            out.c_of_b = Some(f64::INFINITY);
        }
        out.certificate = Some(ray);
    } else {
        out.diagnostics
            .push(format!("primal-dual iteration stopped with {}", report.status.as_str()));
    }
    out.y = Some(y);
    Ok(out)
}

/// A Farkas certificate: `σ(A*y) <= tol ||y||` and `<b, y> > tol ||y|| ||b||`.
pub fn certificate_verify(inst: &Instance, y: &Vector, tol: f64) -> Result<bool> {
    if y.dim() != inst.a().rows() {
        return Err(Error::DimensionMismatch {
            context: "certificate",
            expected: inst.a().rows(),
            found: y.dim(),
        });
    }
    let ny = y.norm();
    if ny == 0.0 {
        return Err(Error::InvalidInput("certificate must be nonzero".into()));
    }
    let sigma = inst.generator().support_value(&inst.a().adjoint_apply_unchecked(y))?;
    Ok(sigma <= tol * ny && inst.b().dot(y) > tol * ny * inst.b().norm())
}

/// Best constant in `<b, y> <= C σ(A*y)`, i.e. `√(2π₀)`; infinite when
/// `b ∉ A(P)`.
pub fn farkas_constant(inst: &Instance, cfg: &SolverConfig) -> Result<f64> {
    let out = solve_exact(inst, cfg)?;
    match out.verdict {
        Verdict::Feasible => out
            .c_of_b
            .ok_or_else(|| Error::Unresolved("feasible outcome without a primal value".into())),
        Verdict::ExactInfeasibleEvidence | Verdict::InfeasibleClosure => Ok(f64::INFINITY),
        Verdict::Unresolved => Err(Error::Unresolved(unresolved_reason(&out))),
    }
}

/// The minimum-norm `x ∈ P` with `Ax = b`.
pub fn least_norm_pseudoinverse(a: &LinearMap, b: &Vector, cone: &Cone, cfg: &SolverConfig) -> Result<Vector> {
    let inst = Instance::new(a.clone(), b.clone(), GeneratorSet::ball_cap(cone.clone()), 0.0)?;
    let out = solve_exact(&inst, cfg)?;
    match out.verdict {
        Verdict::Feasible => out
            .x
            .ok_or_else(|| Error::Unresolved("feasible outcome without a primal point".into())),
        Verdict::ExactInfeasibleEvidence | Verdict::InfeasibleClosure => Err(Error::Infeasible),
        Verdict::Unresolved => Err(Error::Unresolved(unresolved_reason(&out))),
    }
}

/// Looks for `v ∈ Ran(A*)` in the normal cone `cone{x⋆} + (P° ∩ x⋆⊥)` of
/// `λ⋆K` at `x⋆`.
///
/// `tol` is relative: residuals are compared against `tol (1 + ||x⋆||)` and
/// pairings against `tol` for unit vectors.
pub fn diagnose_attainment(a: &LinearMap, cone: &Cone, x_star: &Vector, tol: f64) -> Result<Attainment> {
    if x_star.dim() != a.cols() || cone.dim() != a.cols() {
        return Err(Error::DimensionMismatch {
            context: "diagnose_attainment",
            expected: a.cols(),
            found: x_star.dim(),
        });
    }
    let nx = x_star.norm();
    if nx <= tol {
        // y = 0 attains the dual
        return Ok(Attainment::AttainedPossible(Vector::zeros(a.cols())));
    }
    let scale = tol * (1.0 + nx);
    let adjoint = adjoint_columns(a);
    if range_residual(&adjoint, &[], x_star).0 <= scale {
        return Ok(Attainment::AttainedPossible(x_star.scale(1.0 / nx)));
    }
    match cone {
        Cone::NonnegativeOrthant { .. } => diagnose_orthant(a, x_star, tol),
        Cone::SecondOrder { alpha, .. } => Ok(diagnose_second_order(&adjoint, *alpha, x_star, tol)),
        _ => Err(Error::UnsupportedCone("diagnose_attainment")),
    }
}

/// Convexifies a finite generator list and solves over the generated cone.
///
/// When the recovery is unique and every extreme point of the hull is a raw
/// point, `x⋆` lies on a raw generator ray and therefore in the original
/// nonconvex cone.
pub fn relax_and_solve(
    a: &LinearMap,
    b: &Vector,
    raw_points: &[Vector],
    epsilon: f64,
    cfg: &SolverConfig,
) -> Result<Outcome> {
    let generator = GeneratorSet::polytope(raw_points.to_vec())?;
    let inst = Instance::new(a.clone(), b.clone(), generator, epsilon)?;
    let mut out = solve(&inst, cfg)?;
    if out.verdict != Verdict::Feasible {
        return Ok(out);
    }
    let Some(x) = out.x.clone() else {
        return Ok(out);
    };
    let report = extremality_check(raw_points, None)?;
    if !report.holds {
        out.diagnostics.push(format!(
            "{} extreme points are not raw generators",
            report.violating.len()
        ));
        return Ok(out);
    }
    if !out.unique_recovery {
        out.diagnostics
            .push("support face at A*y is singular; membership in the original cone not asserted".into());
        return Ok(out);
    }
    if x.is_zero() {
        out.in_original_cone = Some(true);
        return Ok(out);
    }
    let angle = raw_points
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| angle_between(&x, p))
        .fold(f64::INFINITY, f64::min);
    if angle <= COLLINEARITY_TOL {
        out.in_original_cone = Some(true);
    } else {
        out.diagnostics.push(format!(
            "recovered point is {angle:.3e} rad away from every raw generator"
        ));
    }
    Ok(out)
}

fn angle_between(u: &Vector, v: &Vector) -> f64 {
    let dot = u.dot(v);
    let cross = (u.dot(u) * v.dot(v) - dot * dot).max(0.0).sqrt();
    cross.atan2(dot)
}

fn unresolved_reason(out: &Outcome) -> String {
    let status = out.status.map_or("none", |s| s.as_str());
    match out.diagnostics.last() {
        Some(d) => format!("dual status {status}: {d}"),
        None => format!("dual status {status}"),
    }
}

/// The primal point offered by the solver or, failing that, by the recovery
/// map at `A*y`, with the uniqueness flag of the support face.
fn recover(inst: &Instance, y: &Vector, primal: Option<Vector>) -> Result<(Vector, bool)> {
    let z = inst.a().adjoint_apply_unchecked(y);
    let (x, unique) = inst.generator().scaled_subgradient(&z)?;
    Ok((primal.unwrap_or(x), unique))
}

fn verified_primal(inst: &Instance, x: &Vector, tol: f64) -> Result<bool> {
    if inst.residual(x)? > inst.epsilon() + tol {
        return Ok(false);
    }
    Ok(match inst.generator().kind() {
        GeneratorKind::BallCap(cone) => cone.contains(x, tol)?,
        _ => inst.generator().gauge(x)?.is_finite(),
    })
}

/// Primal point from methods that do not need a dual minimiser: PDHG warm
/// started at `y`, then the Dykstra/ellipsoid reference for ball caps; face
/// reconstruction for other generators. The first verified point is kept.
/// Near tangential contact the reference trades a cone violation inside its
/// band for a visibly smaller norm, so it is not compared against PDHG.
fn primal_fallback(inst: &Instance, cfg: &SolverConfig, y: &Vector, notes: &mut Vec<String>) -> Result<Option<Vector>> {
    if inst.generator().cone().is_none() {
        let x = duality::reconstruct(inst, y)?.map(|rec| rec.x);
        return match x {
            Some(x) if verified_primal(inst, &x, cfg.verify_tol)? => Ok(Some(x)),
            _ => {
                notes.push("face reconstruction gave no verified primal point".into());
                Ok(None)
            }
        };
    }
    let z = inst.a().adjoint_apply_unchecked(y);
    let (x0, _) = inst.generator().scaled_subgradient(&z)?;
    match solvers::pdhg_solve_from(inst, cfg, x0, y.scale(-1.0)) {
        Ok((x, _, report)) => {
            notes.push(format!(
                "pdhg: {} after {} iterations",
                report.status.as_str(),
                report.iterations
            ));
            if verified_primal(inst, &x, cfg.verify_tol)? {
                return Ok(Some(x));
            }
            notes.push("pdhg point failed verification".into());
        }
        Err(e) => notes.push(format!("pdhg failed: {e}")),
    }
    match oracle::primal_reference(inst, &ReferenceConfig::default()) {
        Ok(r) => {
            notes.push(format!(
                "primal reference: {} after {} iterations",
                r.method, r.iterations
            ));
            if verified_primal(inst, &r.x, cfg.verify_tol)? {
                return Ok(Some(r.x));
            }
            notes.push("primal reference point failed verification".into());
        }
        Err(e) => notes.push(format!("primal reference failed: {e}")),
    }
    Ok(None)
}

fn attach_certificate(inst: &Instance, cfg: &SolverConfig, ray: &Option<Vector>, out: &mut Outcome) -> Result<()> {
    match ray {
        Some(r) if certificate_verify(inst, r, cfg.cert_tol)? => {
            out.verdict = Verdict::InfeasibleClosure;
            out.certificate = Some(r.clone());
            out.dual_attained = DualAttainment::No;
        }
        _ => out
            .diagnostics
            .push("divergent direction failed certificate verification".into()),
    }
    Ok(())
}

fn ratio_trace(inst: &Instance, samples: &[(usize, Vector)]) -> Result<Vec<(usize, f64)>> {
    samples
        .iter()
        .filter(|(_, y)| !y.is_zero())
        .map(|(k, y)| {
            let sigma = inst.generator().support_value(&inst.a().adjoint_apply_unchecked(y))?;
            let by = inst.b().dot(y);
            let ratio = if sigma > 0.0 {
                by / sigma
            } else if by > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            Ok((*k, ratio))
        })
        .collect()
}

/// Columns of `Aᵀ`, i.e. the rows of `A` as vectors in `X`.
fn adjoint_columns(a: &LinearMap) -> Vec<Vector> {
    (0..a.rows())
        .map(|i| Vector::from_vec_unchecked(a.row(i).to_vec()))
        .collect()
}

/// Least-squares residual of `target` against the span of `cols ∪ extra`,
/// with the coefficients of `extra`.
fn range_residual(cols: &[Vector], extra: &[Vector], target: &Vector) -> (f64, Vec<f64>) {
    let all: Vec<Vector> = cols.iter().chain(extra).cloned().collect();
    if all.is_empty() {
        return (target.norm(), Vec::new());
    }
    let m = linalg::columns_to_matrix(&all, target.dim());
    let coeffs = linalg::lstsq(&m, &linalg::to_dvector(target));
    let fit = &m * &coeffs;
    let residual = (fit - linalg::to_dvector(target)).norm();
    (residual, coeffs.iter().skip(cols.len()).copied().collect())
}

/// Boundary points of the second-order cone have the one-ray normal part
/// `n = (ĥ, -α)`; the normal cone is `{c x⋆ + d n : c, d >= 0}`.
fn diagnose_second_order(adjoint: &[Vector], alpha: f64, x_star: &Vector, tol: f64) -> Attainment {
    let d = x_star.dim();
    let head = x_star.slice(0, d - 1);
    let t = x_star[d - 1];
    let nh = head.norm();
    let nx = x_star.norm();
    let scale = tol * (1.0 + nx);
    if nh < alpha * t - scale || nh == 0.0 {
        // interior: the only normals are multiples of x⋆, already ruled out
        return Attainment::NoSharedNormal;
    }
    let mut n = head.scale(1.0 / nh).into_vec();
    n.push(-alpha);
    let n = Vector::from_vec_unchecked(n).scale(1.0 / (1.0 + alpha * alpha).sqrt());

    if range_residual(adjoint, &[], &n).0 <= tol {
        // v = c x⋆ + d n in Ran(A*) forces c x⋆ in Ran(A*), so c = 0
        return Attainment::AllNormalsOrthogonal;
    }
    // x⋆ + d n ∈ Ran(A*) for some d >= 0
    let (res, coef) = range_residual(adjoint, std::slice::from_ref(&n), x_star);
    let d_coef = -coef.first().copied().unwrap_or(0.0);
    if res > scale || d_coef < -scale {
        return Attainment::NoSharedNormal;
    }
    match x_star.axpy(d_coef.max(0.0), &n).normalized() {
        Some(u) if u.dot(x_star) > tol * nx => Attainment::AttainedPossible(u),
        _ => Attainment::AllNormalsOrthogonal,
    }
}

/// Normal part `P° ∩ x⋆⊥` of the orthant is `{n <= 0, n_i = 0 on supp x⋆}`.
/// Two linear programs over `v = Aᵀ(w⁺ - w⁻)`: the first asks for
/// `v = x⋆ + n` up to an `ℓ₁` residual, the second for a nonzero `v = n`.
fn diagnose_orthant(a: &LinearMap, x_star: &Vector, tol: f64) -> Result<Attainment> {
    let (m, n) = (a.rows(), a.cols());
    let nx = x_star.norm();
    let scale = tol * (1.0 + nx);
    let off: Vec<usize> = (0..n).filter(|&i| x_star[i] <= scale).collect();
    let slack_of = |i: usize| off.iter().position(|&j| j == i);

    // variables: w⁺ (m), w⁻ (m), s (off), r⁺ (n), r⁻ (n)
    let vars = 2 * m + off.len() + 2 * n;
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; vars];
        for k in 0..m {
            row[k] = a.get(k, i);
            row[m + k] = -a.get(k, i);
        }
        if let Some(p) = slack_of(i) {
            row[2 * m + p] = 1.0;
        }
        row[2 * m + off.len() + i] = 1.0;
        row[2 * m + off.len() + n + i] = -1.0;
        rows.push(row);
        rhs.push(if slack_of(i).is_some() { 0.0 } else { x_star[i] });
    }
    let mut cost = vec![0.0; vars];
    for c in cost.iter_mut().skip(2 * m + off.len()) {
        *c = 1.0;
    }
    if let LpSolution::Optimal { x: sol, value } = oracle::simplex_solve(&LpProblem::new(cost, rows, rhs)?)? {
        if value <= scale {
            let w: Vec<f64> = (0..m).map(|k| sol[k] - sol[m + k]).collect();
            let v = a.adjoint_apply_unchecked(&Vector::from_vec_unchecked(w));
            if let Some(u) = v.normalized() {
                if u.dot(x_star) > tol * nx {
                    return Ok(Attainment::AttainedPossible(u));
                }
            }
        }
    }
    if off.is_empty() {
        return Ok(Attainment::NoSharedNormal);
    }

    // variables: w⁺ (m), w⁻ (m), s (off); Aᵀw = -s on off, 0 on supp, Σ s = 1
    let vars = 2 * m + off.len();
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut row = vec![0.0; vars];
        for k in 0..m {
            row[k] = a.get(k, i);
            row[m + k] = -a.get(k, i);
        }
        if let Some(p) = slack_of(i) {
            row[2 * m + p] = 1.0;
        }
        rows.push(row);
    }
    let mut total = vec![0.0; vars];
    for c in total.iter_mut().skip(2 * m) {
        *c = 1.0;
    }
    rows.push(total);
    let mut rhs = vec![0.0; n];
    rhs.push(1.0);
    let lp = LpProblem::new(vec![0.0; vars], rows, rhs)?;
    Ok(match oracle::simplex_solve(&lp)? {
        LpSolution::Optimal { .. } => Attainment::AllNormalsOrthogonal,
        _ => Attainment::NoSharedNormal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn orthant_id(b: &[f64], eps: f64) -> Instance {
        Instance::new(
            LinearMap::identity(2),
            v(b),
            GeneratorSet::ball_cap(Cone::orthant(2)),
            eps,
        )
        .unwrap()
    }

    fn soc_map() -> LinearMap {
        LinearMap::from_rows(&[vec![1.0, 0.0, -1.0], vec![1.0, 2.0, 1.0]]).unwrap()
    }

    fn soc_example() -> Instance {
        Instance::new(
            soc_map(),
            v(&[0.0, 1.0]),
            GeneratorSet::ball_cap(Cone::second_order(3, 1.0).unwrap()),
            0.0,
        )
        .unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn approximate_orthant_shrinks_towards_the_cone() {
        let out = solve_approximate(&orthant_id(&[1.0, 0.0], 0.25), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!(out.x.unwrap().distance(&v(&[0.75, 0.0])) <= 1e-4);
        assert!(out.gap.unwrap().abs() <= 1e-6);
        assert!(out.unique_recovery);
    }

    #[test]
    fn approximate_infeasible_carries_a_certificate() {
        let inst = orthant_id(&[-1.0, 0.0], 0.5);
        let out = solve_approximate(&inst, &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::InfeasibleClosure);
        let c = out.certificate.unwrap();
        assert!(c.distance(&v(&[-1.0, 0.0])) <= 1e-4);
        assert!(certificate_verify(&inst, &c, 1e-8).unwrap());
        assert!(out.x.is_none());
    }

    #[test]
    fn primal_dual_agrees_with_the_dual_descent() {
        let out = solve_primal_dual(&orthant_id(&[1.0, 0.0], 0.0), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!(out.x.unwrap().distance(&v(&[1.0, 0.0])) <= 1e-6);

        let out = solve_primal_dual(&soc_example(), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!(out.x.unwrap().distance(&v(&[0.5, 0.0, 0.5])) <= 1e-4);

        let inst = orthant_id(&[-1.0, 0.0], 0.5);
        let out = solve_primal_dual(&inst, &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::InfeasibleClosure);
        assert!(certificate_verify(&inst, &out.certificate.unwrap(), 1e-8).unwrap());
    }

    #[test]
    fn large_epsilon_gives_the_origin() {
        let out = solve_approximate(&orthant_id(&[0.3, -0.4], 0.5), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!(out.x.unwrap().is_zero());
        assert!(out.y.unwrap().is_zero());
    }

    #[test]
    fn exact_uniqueness_example() {
        let out = solve_exact(&orthant_id(&[1.0, 0.0], 0.0), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert_eq!(out.dual_attained, DualAttainment::Yes);
        assert!(out.x.unwrap().distance(&v(&[1.0, 0.0])) <= 1e-6);
        assert!((out.c_of_b.unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn exact_second_order_example_is_weakly_constructive() {
        let out = solve_exact(&soc_example(), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible, "{:?}", out.diagnostics);
        assert_eq!(out.status, Some(SolveStatus::NonAttainedSuspected));
        assert_eq!(out.dual_attained, DualAttainment::No);
        assert_eq!(out.attainment, Some(Attainment::AllNormalsOrthogonal));
        assert!(out.x.unwrap().distance(&v(&[0.5, 0.0, 0.5])) <= 1e-4);
        assert!((out.c_of_b.unwrap() - 0.5f64.sqrt()).abs() <= 1e-4);
    }

    #[test]
    fn exact_negative_target_is_infeasible() {
        let out = solve_exact(&orthant_id(&[-1.0, 0.0], 0.0), &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::ExactInfeasibleEvidence);
        assert_eq!(out.c_of_b, Some(f64::INFINITY));
        assert!(out.ratio_trace.last().unwrap().1.is_infinite());
    }

    #[test]
    fn certificate_checks() {
        let inst = orthant_id(&[-1.0, 0.0], 0.0);
        assert!(certificate_verify(&inst, &v(&[-1.0, 0.0]), 1e-8).unwrap());
        let feasible = orthant_id(&[1.0, 0.0], 0.0);
        assert!(!certificate_verify(&feasible, &v(&[-1.0, 0.0]), 1e-8).unwrap());
        assert!(certificate_verify(&inst, &v(&[0.0, 0.0]), 1e-8).is_err());
    }

    #[test]
    fn feasible_instance_admits_no_sampled_certificate() {
        let inst = orthant_id(&[1.0, 0.5], 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let y = crate::sampling::random_unit(&mut rng, 2);
            assert!(!certificate_verify(&inst, &y, 1e-8).unwrap());
        }
    }

    #[test]
    fn farkas_constants() {
        let c = farkas_constant(&orthant_id(&[1.0, 0.0], 0.0), &cfg()).unwrap();
        assert!((c - 1.0).abs() <= 1e-6);
        let c = farkas_constant(&soc_example(), &cfg()).unwrap();
        assert!((c - 0.5f64.sqrt()).abs() <= 1e-4);
        assert_eq!(farkas_constant(&orthant_id(&[0.0, 0.0], 0.0), &cfg()).unwrap(), 0.0);
        assert!(farkas_constant(&orthant_id(&[-1.0, 0.0], 0.0), &cfg())
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn pseudoinverse_examples() {
        let a = LinearMap::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let x = least_norm_pseudoinverse(&a, &v(&[1.0, 2.0]), &Cone::orthant(2), &cfg()).unwrap();
        // direct solve of the invertible system
        assert!(x.distance(&v(&[1.0, 1.0])) <= 1e-6);

        let b = v(&[0.3, -1.7, 2.0]);
        let x = least_norm_pseudoinverse(&LinearMap::identity(3), &b, &Cone::full_space(3), &cfg()).unwrap();
        assert!(x.distance(&b) <= 1e-6);

        let x = least_norm_pseudoinverse(&LinearMap::identity(2), &v(&[1.0, 0.0]), &Cone::orthant(2), &cfg()).unwrap();
        assert!(x.distance(&v(&[1.0, 0.0])) <= 1e-6);

        let err = least_norm_pseudoinverse(&LinearMap::identity(2), &v(&[-1.0, 0.0]), &Cone::orthant(2), &cfg());
        assert_eq!(err, Err(Error::Infeasible));
    }

    #[test]
    fn diagnose_uniqueness_example() {
        let a = LinearMap::identity(2);
        let att = diagnose_attainment(&a, &Cone::orthant(2), &v(&[1.0, 0.0]), 1e-8).unwrap();
        let Attainment::AttainedPossible(w) = att else {
            panic!("expected a witness, got {att:?}");
        };
        assert!(w.distance(&v(&[1.0, 0.0])) <= 1e-8);
    }

    #[test]
    fn diagnose_second_order_example() {
        let cone = Cone::second_order(3, 1.0).unwrap();
        let att = diagnose_attainment(&soc_map(), &cone, &v(&[0.5, 0.0, 0.5]), 1e-8).unwrap();
        assert_eq!(att, Attainment::AllNormalsOrthogonal);
        // the error of a primal estimate should not be mistaken for a normal
        let att = diagnose_attainment(&soc_map(), &cone, &v(&[0.50001, 0.0, 0.49999]), ATTAINMENT_TOL).unwrap();
        assert_eq!(att, Attainment::AllNormalsOrthogonal);
    }

    #[test]
    fn diagnose_with_surjective_adjoint() {
        let a = LinearMap::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 3.0]]).unwrap();
        let x = v(&[0.2, 0.0, 1.0]);
        for cone in [
            Cone::orthant(3),
            Cone::second_order(3, 0.5).unwrap(),
            Cone::full_space(3),
        ] {
            let att = diagnose_attainment(&a, &cone, &x, 1e-8).unwrap();
            assert!(matches!(att, Attainment::AttainedPossible(w) if w.dot(&x) > 0.0));
        }
    }

    #[test]
    fn diagnose_orthant_without_shared_normal() {
        // Ran(A*) = span{(1,1)}, x⋆ = (1,0): x⋆ + n with n <= 0, n_1 = 0 never
        // lies on the line, and neither does a nonzero n
        let a = LinearMap::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let att = diagnose_attainment(&a, &Cone::orthant(2), &v(&[1.0, 0.0]), 1e-8).unwrap();
        assert_eq!(att, Attainment::NoSharedNormal);
        // Ran(A*) = span{(1,-1)} does contain (1,0) + (0,-1)
        let a = LinearMap::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let att = diagnose_attainment(&a, &Cone::orthant(2), &v(&[1.0, 0.0]), 1e-8).unwrap();
        assert!(matches!(att, Attainment::AttainedPossible(_)));
    }

    #[test]
    fn diagnose_rejects_other_cones() {
        let a = LinearMap::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let rays = Cone::rays(2, vec![v(&[1.0, 0.0]), v(&[1.0, 1.0])]).unwrap();
        assert_eq!(
            diagnose_attainment(&a, &rays, &v(&[1.0, 0.0]), 1e-8),
            Err(Error::UnsupportedCone("diagnose_attainment"))
        );
    }

    #[test]
    fn relaxation_on_a_generator_ray() {
        let raw = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let out = relax_and_solve(&LinearMap::identity(2), &v(&[2.0, 0.0]), &raw, 0.0, &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert_eq!(out.in_original_cone, Some(true));
        let x = out.x.unwrap();
        assert!(x.distance(&v(&[2.0, 0.0])) <= 1e-6);
        assert!(angle_between(&x, &raw[0]) <= COLLINEARITY_TOL);
    }

    #[test]
    fn relaxation_reports_the_tie() {
        let raw = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let out = relax_and_solve(&LinearMap::identity(2), &v(&[1.0, 1.0]), &raw, 0.0, &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::Feasible);
        assert!(out.x.unwrap().distance(&v(&[1.0, 1.0])) <= 1e-6);
        assert!(!out.unique_recovery);
        assert_eq!(out.in_original_cone, None);
        assert!(!out.diagnostics.is_empty());
    }

    #[test]
    fn relaxation_infeasible() {
        let raw = [v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let out = relax_and_solve(&LinearMap::identity(2), &v(&[-1.0, 0.0]), &raw, 0.1, &cfg()).unwrap();
        assert_eq!(out.verdict, Verdict::InfeasibleClosure);
        assert!(out.certificate.is_some());
    }

    #[test]
    fn scaling_covariance() {
        let base = solve_exact(&orthant_id(&[1.0, 0.5], 0.0), &cfg()).unwrap();
        for t in [0.1, 3.0, 40.0] {
            let out = solve_exact(&orthant_id(&[t, 0.5 * t], 0.0), &cfg()).unwrap();
            let want = base.x.as_ref().unwrap().scale(t);
            assert!(out.x.unwrap().distance(&want) <= 1e-6 * want.norm());
            assert!((out.c_of_b.unwrap() - t * base.c_of_b.unwrap()).abs() <= 1e-6 * t);
        }
    }
}
