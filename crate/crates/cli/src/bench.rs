//! Seeded sweeps over the three sampling regimes.

use std::path::Path;

use farkas_core::sampling::{self, Regime, Sample};
use farkas_core::{certificate_verify, solve, Cone, Instance, Outcome, SolverConfig, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{to_json, OutcomeDoc};

pub const EPSILONS: [f64; 2] = [0.0, 0.1];
const MAX_ROWS: usize = 4;
const MAX_DIM: usize = 5;

#[derive(Debug, Clone)]
pub struct Record {
    pub id: usize,
    pub regime: Regime,
    pub epsilon: f64,
    pub verdict: Verdict,
    pub gap: Option<f64>,
    /// Some certificate, emitted or planted, verifies.
    pub certified: bool,
    pub x_verified: bool,
}

impl Record {
    pub fn violation(&self) -> bool {
        self.certified && self.x_verified
    }
}

/// Instance `id` depends only on `(seed, id)`: each id draws from its own
/// stream of the seeded generator.
pub fn draw(seed: u64, id: usize) -> farkas_core::Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    let regime = Regime::ALL[id % 3];
    let eps = EPSILONS[(id / 3) % 2];
    sampling::sample(&mut rng, regime, MAX_ROWS, MAX_DIM, eps)
}

fn check(s: &Sample, out: &Outcome, cfg: &SolverConfig) -> farkas_core::Result<(bool, bool)> {
    let inst = &s.instance;
    let x_verified = match (&out.x, inst.generator().cone()) {
        (Some(x), Some(cone)) => {
            inst.residual(x)? <= inst.epsilon() + cfg.verify_tol && cone.contains(x, cfg.verify_tol)?
        }
        _ => false,
    };
    let mut certified = false;
    for c in out.certificate.iter().chain(s.certificate.iter()) {
        certified |= certificate_verify(inst, c, cfg.cert_tol)?;
    }
    Ok((x_verified, certified))
}

pub fn run(seed: u64, count: usize, cfg: &SolverConfig, dir: Option<&Path>) -> Result<Vec<Record>, String> {
    let mut records: Vec<Record> = (0..count)
        .into_par_iter()
        .map(|id| -> Result<Record, String> {
            let s = draw(seed, id).map_err(|e| format!("instance {id}: {e}"))?;
            let out = solve(&s.instance, cfg).map_err(|e| format!("instance {id}: {e}"))?;
            let (x_verified, certified) = check(&s, &out, cfg).map_err(|e| format!("instance {id}: {e}"))?;
            if let Some(dir) = dir {
                save(dir, id, &s.instance, &out)?;
            }
            Ok(Record {
                id,
                regime: s.regime,
                epsilon: s.instance.epsilon(),
                verdict: out.verdict,
                gap: out.gap,
                certified,
                x_verified,
            })
        })
        .collect::<Result<_, _>>()?;
    records.sort_by_key(|r| r.id);
    Ok(records)
}

fn cone_json(cone: &Cone) -> serde_json::Value {
    match cone {
        Cone::SecondOrder { alpha, .. } => json!({"type": "soc", "alpha": alpha}),
        other => json!({"type": other.kind()}),
    }
}

fn save(dir: &Path, id: usize, inst: &Instance, out: &Outcome) -> Result<(), String> {
    let a: Vec<&[f64]> = (0..inst.a().rows()).map(|i| inst.a().row(i)).collect();
    let cone = inst
        .generator()
        .cone()
        .map(cone_json)
        .unwrap_or(serde_json::Value::Null);
    let doc = json!({"A": a, "b": inst.b().as_slice(), "epsilon": inst.epsilon(), "cone": cone});
    let text = serde_json::to_string_pretty(&doc).expect("documents serialise");
    let write = |name: String, body: String| {
        std::fs::write(dir.join(&name), body + "\n").map_err(|e| format!("cannot write {name}: {e}"))
    };
    write(format!("instance_{id:04}.json"), text)?;
    write(format!("outcome_{id:04}.json"), to_json(&OutcomeDoc::new(out, 1.0)))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

pub fn summary(records: &[Record]) -> String {
    let mut lines = vec![format!(
        "{:<11} {:>5} {:>5} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "regime", "eps", "n", "feasible", "closure", "exact", "unresolved", "cert_rate", "max_gap"
    )];
    for regime in Regime::ALL {
        for eps in EPSILONS {
            let rs: Vec<&Record> = records
                .iter()
                .filter(|r| r.regime == regime && r.epsilon == eps)
                .collect();
            if rs.is_empty() {
                continue;
            }
            let count = |v: Verdict| rs.iter().filter(|r| r.verdict == v).count();
            let infeasible: Vec<&&Record> = rs
                .iter()
                .filter(|r| matches!(r.verdict, Verdict::InfeasibleClosure | Verdict::ExactInfeasibleEvidence))
                .collect();
            let cert_rate = if infeasible.is_empty() {
                "-".to_string()
            } else {
                let n = infeasible.iter().filter(|r| r.certified).count();
                format!("{:.3}", n as f64 / infeasible.len() as f64)
            };
            let gaps: Vec<f64> = rs.iter().filter_map(|r| r.gap.map(f64::abs)).collect();
            let max_gap = gaps
                .iter()
                .copied()
                .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
            lines.push(format!(
                "{:<11} {:>5} {:>5} {:>8} {:>8} {:>8} {:>10} {:>10} {:>10}",
                regime.as_str(),
                eps,
                rs.len(),
                count(Verdict::Feasible),
                count(Verdict::InfeasibleClosure),
                count(Verdict::ExactInfeasibleEvidence),
                count(Verdict::Unresolved),
                cert_rate,
                max_gap.map_or("-".to_string(), |g| format!("{g:.2e}")),
            ));
        }
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.gap.map(f64::abs)).collect();
    if let Some(m) = median(gaps) {
        lines.push(format!("median |gap| over feasible outcomes: {m:.2e}"));
    }
    let violations: Vec<String> = records
        .iter()
        .filter(|r| r.violation())
        .map(|r| r.id.to_string())
        .collect();
    lines.push(format!("exclusivity violations: {}", violations.len()));
    if !violations.is_empty() {
        lines.push(format!("violating instances: {}", violations.join(", ")));
    }
    lines.join("\n")
}
