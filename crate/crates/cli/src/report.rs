//! Output documents. Numbers are written with 17 significant digits; an
//! infinite value is written as the string `"Infinity"` and NaN as `null`.

use std::io::Write;

use farkas_core::{Outcome, TraceRow, Vector};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// An `f64` serialised verbatim in `%.16e` form.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_nan() {
            s.serialize_none()
        } else if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "Infinity" } else { "-Infinity" })
        } else {
            let raw = RawValue::from_string(fmt_num(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        }
    }
}

pub fn nums(v: &Vector) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[derive(Debug, Serialize)]
pub struct OutcomeDoc {
    pub verdict: &'static str,
    pub x: Option<Vec<Num>>,
    pub y: Option<Vec<Num>>,
    pub certificate: Option<Vec<Num>>,
    pub gap: Option<Num>,
    pub pi: Option<Num>,
    pub lambda_star: Option<Num>,
    #[serde(rename = "C_of_b")]
    pub c_of_b: Option<Num>,
    pub dual_attained: &'static str,
    pub unique_recovery: bool,
    pub in_original_cone: Option<bool>,
    pub iterations: usize,
    pub normalisation: Num,
    pub status: Option<&'static str>,
    pub diagnostics: Vec<String>,
}

impl OutcomeDoc {
    /// Undoes a rescaling of `b` by `s`: points and `λ⋆`, `C(b)` scale like `b`,
    /// `π` and the gap like `b²`.
    pub fn new(out: &Outcome, s: f64) -> Self {
        let point = |v: &Option<Vector>| v.as_ref().map(|v| nums(&v.scale(1.0 / s)));
        let linear = |v: Option<f64>| v.map(|v| Num(v / s));
        let quadratic = |v: Option<f64>| v.map(|v| Num(v / (s * s)));
        Self {
            verdict: out.verdict.as_str(),
            x: point(&out.x),
            y: point(&out.y),
            certificate: point(&out.certificate),
            gap: quadratic(out.gap),
            pi: quadratic(out.pi),
            lambda_star: linear(out.lambda_star),
            c_of_b: linear(out.c_of_b),
            dual_attained: out.dual_attained.as_str(),
            unique_recovery: out.unique_recovery,
            in_original_cone: out.in_original_cone,
            iterations: out.iterations,
            normalisation: Num(s),
            status: out.status.map(|st| st.as_str()),
            diagnostics: out.diagnostics.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialise")
}

/// CSV with header `iter,J_value,y_norm,subgrad_norm`, in original units.
pub fn write_trace<W: Write>(mut w: W, trace: &[TraceRow], scale: f64) -> std::io::Result<()> {
    writeln!(w, "iter,J_value,y_norm,subgrad_norm")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{}",
            r.iter,
            fmt_num(r.value / (scale * scale)),
            fmt_num(r.y_norm / scale),
            fmt_num(r.residual / scale)
        )?;
    }
    Ok(())
}
