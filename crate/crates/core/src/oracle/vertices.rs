//! Extreme points of `conv(points ∪ {0})` by per-point LP separation.

use crate::error::{check_dim, Error, Result};
use crate::operators::Vector;

use super::simplex::{simplex_solve, LpProblem, LpSolution};

pub const MAX_POINTS: usize = 20;
pub const MAX_DIM: usize = 4;

/// `true` when `c` is a convex combination of `others`.
fn in_hull(c: &Vector, others: &[Vector]) -> Result<bool> {
    if others.is_empty() {
        return Ok(false);
    }
    let dim = c.dim();
    let mut rows: Vec<Vec<f64>> = (0..dim).map(|i| others.iter().map(|q| q[i]).collect()).collect();
    rows.push(vec![1.0; others.len()]);
    let mut rhs = c.as_slice().to_vec();
    rhs.push(1.0);
    let lp = LpProblem::new(vec![0.0; others.len()], rows, rhs)?;
    Ok(matches!(simplex_solve(&lp)?, LpSolution::Optimal { .. }))
}

/// Returns the extreme points of `conv(points ∪ {0})`, the origin included
/// when it is extreme. Duplicate points are reported once.
pub fn vertex_enumerate(points: &[Vector]) -> Result<Vec<Vector>> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput(
            "vertex enumeration needs at least one point".into(),
        ));
    };
    let dim = first.dim();
    if points.len() > MAX_POINTS || dim > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "vertex enumeration limited to {MAX_POINTS} points in dimension {MAX_DIM}"
        )));
    }
    let zero = Vector::zeros(dim);
    let mut candidates: Vec<Vector> = vec![zero];
    for p in points {
        check_dim("vertex enumeration", dim, p.dim())?;
        if !candidates.iter().any(|q| q.distance(p) <= 1e-14 * (1.0 + p.norm())) {
            candidates.push(p.clone());
        }
    }
    let mut out = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let others: Vec<Vector> = candidates
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        if !in_hull(c, &others)? {
            out.push(c.clone());
        }
    }
    // origin last, matching the usual listing of the hull vertices
    if out.first().is_some_and(|v| v.is_zero()) {
        out.rotate_left(1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    #[test]
    fn triangle() {
        let out = vertex_enumerate(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(out, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 0.0])]);
    }

    #[test]
    fn midpoint_dropped() {
        let out = vertex_enumerate(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.5, 0.5])]).unwrap();
        assert_eq!(out, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, 0.0])]);
    }

    #[test]
    fn single_point() {
        let out = vertex_enumerate(&[v(&[2.0, 0.0])]).unwrap();
        assert_eq!(out, vec![v(&[2.0, 0.0]), v(&[0.0, 0.0])]);
    }

    #[test]
    fn origin_inside() {
        let out = vertex_enumerate(&[v(&[1.0, 0.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])]).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|p| !p.is_zero()));
    }

    #[test]
    fn size_limits() {
        let many: Vec<Vector> = (0..21).map(|i| v(&[i as f64, 1.0])).collect();
        assert!(vertex_enumerate(&many).is_err());
        assert!(vertex_enumerate(&[v(&[1.0; 5])]).is_err());
    }
}
