//! Cyclic Jacobi eigen-decomposition for small symmetric matrices.

/// Eigenvalues in descending order with matching eigenvectors (as columns,
/// stored row-major in `vectors[i][k]` = component `i` of eigenvector `k`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.iter().map(|row| row[k]).collect()
    }
}

pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> SymmetricEigen {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    SymmetricEigen {
        values: order.iter().map(|&i| a[i][i]).collect(),
        vectors: (0..n).map(|r| order.iter().map(|&k| v[r][k]).collect()).collect(),
    }
}

/// Gram matrix `A^T A` of a row-major `rows x cols` matrix.
pub fn gram(rows: usize, cols: usize, entries: &[f64]) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; cols]; cols];
    for r in 0..rows {
        let row = &entries[r * cols..(r + 1) * cols];
        for i in 0..cols {
            for j in 0..cols {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalises_known_matrix() {
        let e = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vector(0);
        assert!((v0[0].abs() - v0[1].abs()).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 5;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 13) % 11) as f64 - 5.0;
                m[i][j] = x;
                m[j][i] = x;
            }
        }
        let e = jacobi_eigen(&m);
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.vectors[i][k] * e.values[k] * e.vectors[j][k]).sum();
                assert!((r - m[i][j]).abs() < 1e-12);
            }
        }
    }
}
