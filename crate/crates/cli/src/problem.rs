//! Problem files: JSON parsing with field paths, and the rescaling of `b`
//! into `[0.5, 2]`.

use std::fmt;
use std::path::Path;

use farkas_core::{Cone, GeneratorSet, Instance, LinearMap, Vector};
use serde_json::{Map, Value};

#[derive(Debug)]
pub enum InputError {
    Io(String),
    Syntax(String),
    Field { path: String, message: String },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(m) => write!(f, "{m}"),
            InputError::Syntax(m) => write!(f, "invalid JSON: {m}"),
            InputError::Field { path, message } => write!(f, "field `{path}`: {message}"),
        }
    }
}

fn bad(path: &str, message: impl Into<String>) -> InputError {
    InputError::Field {
        path: path.to_string(),
        message: message.into(),
    }
}

type Parsed<T> = Result<T, InputError>;

/// A parsed problem with `b` and `ε` multiplied by `scale`.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub instance: Instance,
    /// Factor applied to `b` and `ε`; a power of two, so the rescaling is exact.
    pub scale: f64,
}

impl ProblemFile {
    pub fn read(path: &Path) -> Parsed<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Parsed<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| InputError::Syntax(e.to_string()))?;
        let root = object(&doc, "$")?;
        let rows = matrix(field(root, "A", "")?, "A")?;
        let cols = rows[0].len();
        let a = LinearMap::from_rows(&rows).map_err(|e| bad("A", e.to_string()))?;
        let b = vector(field(root, "b", "")?, "b")?;
        if b.len() != a.rows() {
            return Err(bad(
                "b",
                format!(
                    "expected {} entries to match the rows of A, found {}",
                    a.rows(),
                    b.len()
                ),
            ));
        }
        let epsilon = match root.get("epsilon") {
            None => 0.0,
            Some(v) => {
                let e = number(v, "epsilon")?;
                if e < 0.0 {
                    return Err(bad("epsilon", "must be nonnegative"));
                }
                e
            }
        };
        let generator = match (root.get("cone"), root.get("generator")) {
            (Some(c), None) => GeneratorSet::ball_cap(cone(c, "cone", cols)?),
            (None, Some(g)) => generator(g, "generator", cols)?,
            (Some(_), Some(_)) => return Err(bad("generator", "give either `cone` or `generator`, not both")),
            (None, None) => return Err(bad("cone", "missing; a `cone` or `generator` is required")),
        };
        let b = Vector::new(b).map_err(|e| bad("b", e.to_string()))?;
        let scale = normalising_scale(b.norm());
        let instance =
            Instance::new(a, b.scale(scale), generator, scale * epsilon).map_err(|e| bad("$", e.to_string()))?;
        Ok(Self { instance, scale })
    }
}

/// Power of two `s` with `s ||b|| ∈ [0.5, 2]`; 1 when already there or `b = 0`.
pub fn normalising_scale(norm: f64) -> f64 {
    if norm == 0.0 || (0.5..=2.0).contains(&norm) {
        1.0
    } else {
        (-norm.log2().round()).exp2()
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Parsed<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn join(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, parent: &str) -> Parsed<&'a Value> {
    obj.get(key).ok_or_else(|| bad(&join(parent, key), "missing"))
}

fn number(v: &Value, path: &str) -> Parsed<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(bad(path, "expected a finite number")),
    }
}

fn vector(v: &Value, path: &str) -> Parsed<Vec<f64>> {
    let items = v.as_array().ok_or_else(|| bad(path, "expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn matrix(v: &Value, path: &str) -> Parsed<Vec<Vec<f64>>> {
    let items = v.as_array().ok_or_else(|| bad(path, "expected an array of rows"))?;
    if items.is_empty() {
        return Err(bad(path, "needs at least one row"));
    }
    let rows: Vec<Vec<f64>> = items
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{path}[{i}]")))
        .collect::<Parsed<_>>()?;
    let n = rows[0].len();
    if n == 0 {
        return Err(bad(&format!("{path}[0]"), "rows must be nonempty"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(bad(
                &format!("{path}[{i}]"),
                format!("expected {n} entries, found {}", r.len()),
            ));
        }
    }
    Ok(rows)
}

fn vectors(v: &Value, path: &str, dim: usize) -> Parsed<Vec<Vector>> {
    let rows = matrix(v, path)?;
    if rows[0].len() != dim {
        return Err(bad(
            &format!("{path}[0]"),
            format!("expected {dim} entries to match the columns of A"),
        ));
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| Vector::new(r).map_err(|e| bad(&format!("{path}[{i}]"), e.to_string())))
        .collect()
}

fn kind<'a>(obj: &'a Map<String, Value>, path: &str) -> Parsed<&'a str> {
    field(obj, "type", path)?
        .as_str()
        .ok_or_else(|| bad(&join(path, "type"), "expected a string"))
}

fn cone(v: &Value, path: &str, dim: usize) -> Parsed<Cone> {
    let obj = object(v, path)?;
    let built = match kind(obj, path)? {
        "orthant" => Ok(Cone::orthant(dim)),
        "soc" => {
            let p = join(path, "alpha");
            let alpha = match obj.get("alpha") {
                Some(a) => number(a, &p)?,
                None => 1.0,
            };
            Cone::second_order(dim, alpha).map_err(|e| bad(&p, e.to_string()))
        }
        "subspace" => {
            let p = join(path, "basis");
            let basis = vectors(field(obj, "basis", path)?, &p, dim)?;
            Cone::subspace(dim, &basis).map_err(|e| bad(&p, e.to_string()))
        }
        "rays" => {
            let p = join(path, "rays");
            let rays = vectors(field(obj, "rays", path)?, &p, dim)?;
            Cone::rays(dim, rays).map_err(|e| bad(&p, e.to_string()))
        }
        other => Err(bad(
            &join(path, "type"),
            format!("unknown cone `{other}` (expected orthant, soc, subspace or rays)"),
        )),
    }?;
    Ok(built)
}

fn generator(v: &Value, path: &str, dim: usize) -> Parsed<GeneratorSet> {
    let obj = object(v, path)?;
    match kind(obj, path)? {
        "ball_cap" => {
            let p = join(path, "cone");
            Ok(GeneratorSet::ball_cap(cone(field(obj, "cone", path)?, &p, dim)?))
        }
        "polytope" => {
            let p = join(path, "points");
            let points = vectors(field(obj, "points", path)?, &p, dim)?;
            GeneratorSet::polytope(points).map_err(|e| bad(&p, e.to_string()))
        }
        "box" => {
            let p = join(path, "upper");
            let upper = vector(field(obj, "upper", path)?, &p)?;
            if upper.len() != dim {
                return Err(bad(&p, format!("expected {dim} entries to match the columns of A")));
            }
            let upper = Vector::new(upper).map_err(|e| bad(&p, e.to_string()))?;
            GeneratorSet::boxed(upper).map_err(|e| bad(&p, e.to_string()))
        }
        other => Err(bad(
            &join(path, "type"),
            format!("unknown generator `{other}` (expected ball_cap, polytope or box)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> String {
        match ProblemFile::parse(text).unwrap_err() {
            InputError::Field { path, .. } => path,
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bare_cone_means_ball_cap() {
        let p =
            ProblemFile::parse(r#"{"A": [[1, 0], [0, 1]], "b": [1, 0], "epsilon": 0, "cone": {"type": "orthant"}}"#)
                .unwrap();
        assert_eq!(p.instance.generator().label(), "ball_cap(orthant)");
        assert_eq!(p.scale, 1.0);
    }

    #[test]
    fn large_targets_are_rescaled_exactly() {
        let p =
            ProblemFile::parse(r#"{"A": [[1, 0]], "b": [1000], "epsilon": 10, "cone": {"type": "orthant"}}"#).unwrap();
        let nb = p.instance.b().norm();
        assert!((0.5..=2.0).contains(&nb));
        assert_eq!(p.instance.epsilon() / p.scale, 10.0);
        assert_eq!(p.instance.b()[0] / p.scale, 1000.0);
    }

    #[test]
    fn scale_is_a_power_of_two() {
        for norm in [1e-9, 0.3, 0.5, 1.0, 2.0, 3.0, 7e12] {
            let s = normalising_scale(norm);
            assert_eq!(s.log2().fract(), 0.0);
            assert!((0.5..=2.0).contains(&(s * norm)), "{norm}");
        }
        assert_eq!(normalising_scale(0.0), 1.0);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(err(r#"{"b": [1], "cone": {"type": "orthant"}}"#), "A");
        assert_eq!(
            err(r#"{"A": [[1, "x"]], "b": [1], "cone": {"type": "orthant"}}"#),
            "A[0][1]"
        );
        assert_eq!(
            err(r#"{"A": [[1, 0], [1]], "b": [1, 1], "cone": {"type": "orthant"}}"#),
            "A[1]"
        );
        assert_eq!(err(r#"{"A": [[1, 0]], "b": [1, 2], "cone": {"type": "orthant"}}"#), "b");
        assert_eq!(
            err(r#"{"A": [[1, 0]], "b": [1], "epsilon": -1, "cone": {"type": "orthant"}}"#),
            "epsilon"
        );
        assert_eq!(
            err(r#"{"A": [[1, 0]], "b": [1], "cone": {"type": "cube"}}"#),
            "cone.type"
        );
        assert_eq!(
            err(r#"{"A": [[1, 0]], "b": [1], "cone": {"type": "soc", "alpha": -1}}"#),
            "cone.alpha"
        );
        assert_eq!(
            err(
                r#"{"A": [[1, 0]], "b": [1], "generator": {"type": "ball_cap", "cone": {"type": "rays", "rays": [[1]]}}}"#
            ),
            "generator.cone.rays[0]"
        );
        assert_eq!(
            err(r#"{"A": [[1, 0]], "b": [1], "generator": {"type": "box"}}"#),
            "generator.upper"
        );
        assert_eq!(err(r#"{"A": [[1, 0]], "b": [1]}"#), "cone");
    }

    #[test]
    fn generator_forms_parse() {
        let p = ProblemFile::parse(
            r#"{"A": [[1, 0]], "b": [1], "generator": {"type": "polytope", "points": [[1, 0], [0, 1]]}}"#,
        )
        .unwrap();
        assert!(!p.instance.generator().is_smooth());
        let p =
            ProblemFile::parse(r#"{"A": [[1, 0]], "b": [1], "generator": {"type": "box", "upper": [1, 2]}}"#).unwrap();
        assert_eq!(p.instance.epsilon(), 0.0);
    }
}
