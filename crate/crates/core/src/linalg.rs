//! Small dense solves backed by nalgebra: least squares and nonnegative
//! least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::Vector;

/// Column-major matrix assembled from column vectors.
pub(crate) fn columns_to_matrix(cols: &[Vector], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Minimum-norm least-squares solution of `m x = rhs`.
pub(crate) fn lstsq(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-13 * m.nrows().max(m.ncols()) as f64).max(f64::MIN_POSITIVE);
    svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Lawson-Hanson active-set solver for `min ||m c - rhs||` subject to `c >= 0`.
///
/// Fails with a numerical error when the KKT residual is above `kkt_tol`
/// after `50 * ncols` outer iterations.
pub(crate) fn nnls(m: &DMatrix<f64>, rhs: &DVector<f64>, kkt_tol: f64) -> Result<DVector<f64>> {
    let k = m.ncols();
    let mut coeffs = DVector::zeros(k);
    if k == 0 {
        return Ok(coeffs);
    }
    let col_scale = (0..k).map(|j| m.column(j).norm()).fold(0.0, f64::max).max(1e-300);
    let scale = col_scale * (1.0 + rhs.norm());
    let tol = kkt_tol * scale;
    let mut passive = vec![false; k];
    let cap = 50 * k;
    let mut iter = 0;

    let gradient = |c: &DVector<f64>| m.transpose() * (rhs - m * c);
    let mut w = gradient(&coeffs);
    loop {
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        if iter >= cap {
            break;
        }
        passive[j] = true;
        loop {
            iter += 1;
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub = m.select_columns(&idx);
            let s_p = lstsq(&sub, rhs);
            let mut s = DVector::zeros(k);
            for (pos, &i) in idx.iter().enumerate() {
                s[i] = s_p[pos];
            }
            if idx.iter().all(|&i| s[i] > 0.0) {
                coeffs = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &i in &idx {
                if s[i] <= 0.0 {
                    let denom = coeffs[i] - s[i];
                    if denom > 0.0 {
                        alpha = alpha.min(coeffs[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            coeffs += (s - &coeffs) * alpha;
            for &i in &idx {
                if coeffs[i] <= 1e-15 * (1.0 + coeffs.amax()) {
                    coeffs[i] = 0.0;
                    passive[i] = false;
                }
            }
            if iter >= cap || !passive.iter().any(|p| *p) {
                break;
            }
        }
        w = gradient(&coeffs);
    }
    for c in coeffs.iter_mut() {
        if *c < 0.0 {
            *c = 0.0;
        }
    }
    w = gradient(&coeffs);
    let kkt = (0..k)
        .map(|j| if coeffs[j] > 0.0 { w[j].abs() } else { w[j].max(0.0) })
        .fold(0.0, f64::max);
    if kkt > tol.max(1e-300) * 10.0 {
        return Err(Error::Numerical {
            what: "nonnegative least squares",
            residual: kkt / scale,
        });
    }
    Ok(coeffs)
}

pub(crate) fn to_dvector(v: &Vector) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

pub(crate) fn from_dvector(v: &DVector<f64>) -> Vector {
    Vector::from_vec_unchecked(v.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_projects_onto_orthant_columns() {
        let m = DMatrix::identity(3, 3);
        let rhs = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let out = nnls(&m, &rhs, 1e-12).unwrap();
        for (c, want) in out.iter().zip([1.0, 0.0, 0.5]) {
            assert!((c - want).abs() <= 1e-14);
        }
        assert!(((&rhs - &m * &out).norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nnls_kkt_on_redundant_columns() {
        // columns (1,0), (0,1), (1,1): target (1,1) is reachable exactly
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let rhs = DVector::from_vec(vec![1.0, 1.0]);
        let out = nnls(&m, &rhs, 1e-12).unwrap();
        assert!((&rhs - &m * &out).norm() < 1e-12);
        assert!(out.iter().all(|c| *c >= 0.0));
    }
}
