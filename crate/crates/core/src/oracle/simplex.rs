//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Solves `min c.x  s.t.  E x = r, x >= 0` for at most [`MAX_VARS`]
//! variables and [`MAX_ROWS`] equality rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::operators::Vector;

pub const MAX_VARS: usize = 50;
pub const MAX_ROWS: usize = 50;

const PIVOT_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 20_000;

/// Equality-form linear program over the nonnegative orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        check_dim("lp rhs", rows.len(), rhs.len())?;
        for row in &rows {
            check_dim("lp row", objective.len(), row.len())?;
        }
        let finite = objective
            .iter()
            .chain(rhs.iter())
            .chain(rows.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("linear program"));
        }
        Ok(Self { objective, rows, rhs })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, r)| {
                let lhs: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                (lhs - r) * (lhs - r)
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: Vector, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpSolution::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

struct Tableau {
    // rows 0..m are constraints, each of width `width` with the rhs last
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64]) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = cost[col];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Runs Bland pivots on `cost` (reduced costs, rhs entry holds -value).
    /// Returns `Ok(false)` when the program is unbounded.
    fn optimise(&mut self, cost: &mut [f64], allowed: usize, pivots: &mut usize) -> Result<bool> {
        let rhs = self.rhs_col();
        loop {
            let entering = (0..allowed).find(|&j| cost[j] < -PIVOT_TOL);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_TOL {
                    let ratio = row[rhs] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 * (1.0 + lr.abs())
                                || (ratio <= lr + 1e-12 * (1.0 + lr.abs()) && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(row, col, cost);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::LpNonConvergence(*pivots));
            }
        }
    }
}

/// Solves the program; see module docs for the form.
pub fn simplex_solve(lp: &LpProblem) -> Result<LpSolution> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    if n > MAX_VARS || m > MAX_ROWS {
        return Err(Error::LpTooLarge { vars: n, rows: m });
    }
    if m == 0 {
        if lp.objective.iter().any(|c| *c < 0.0) {
            return Ok(LpSolution::Unbounded);
        }
        return Ok(LpSolution::Optimal {
            x: Vector::zeros(n),
            value: 0.0,
        });
    }

    let width = n + m + 1;
    let mut t = Vec::with_capacity(m);
    for (i, (row, r)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
        let sign = if *r < 0.0 { -1.0 } else { 1.0 };
        let mut line = vec![0.0; width];
        for (j, a) in row.iter().enumerate() {
            line[j] = sign * a;
        }
        line[n + i] = 1.0;
        line[width - 1] = sign * r;
        t.push(line);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        width,
    };

    // phase 1: minimise the sum of artificials
    let mut cost = vec![0.0; width];
    for row in &tab.t {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }
    let mut pivots = 0;
    tab.optimise(&mut cost, n, &mut pivots)?;
    let scale = 1.0 + lp.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let infeasibility = -cost[width - 1];
    if infeasibility > 1e-9 * scale {
        return Ok(LpSolution::Infeasible);
    }

    // drive remaining artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            let col = (0..n)
                .filter(|&j| tab.t[i][j].abs() > PIVOT_TOL)
                .max_by(|&a, &b| tab.t[i][a].abs().total_cmp(&tab.t[i][b].abs()));
            match col {
                Some(col) => tab.pivot(i, col, &mut cost),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // phase 2 on the original objective
    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&lp.objective);
    for (row, &b) in tab.t.clone().iter().zip(&tab.basis) {
        let cb = if b < n { lp.objective[b] } else { 0.0 };
        if cb != 0.0 {
            for (v, a) in cost.iter_mut().zip(row) {
                *v -= cb * a;
            }
        }
    }
    if !tab.optimise(&mut cost, n, &mut pivots)? {
        return Ok(LpSolution::Unbounded);
    }

    let basic: Vec<usize> = tab.basis.iter().copied().filter(|&b| b < n).collect();
    let mut x = vec![0.0; n];
    for (row, &b) in tab.t.iter().zip(&tab.basis) {
        if b < n {
            x[b] = row[width - 1].max(0.0);
        }
    }
    // refine the basic values against the original rows
    let mut clipped = false;
    if !basic.is_empty() {
        let e = DMatrix::from_fn(m, basic.len(), |i, k| lp.rows[i][basic[k]]);
        let refined = linalg::lstsq(&e, &DVector::from_column_slice(&lp.rhs));
        clipped = refined.iter().any(|v| *v < -1e-12 * scale);
        let mut candidate = x.clone();
        for (k, &b) in basic.iter().enumerate() {
            candidate[b] = refined[k].max(0.0);
        }
        if lp.residual(&candidate) <= lp.residual(&x) {
            x = candidate;
        }
    }
    let residual = lp.residual(&x);
    if residual > 1e-9 * scale {
        if clipped {
            // the final basis needs a slightly negative weight: the rhs sits
            // just outside the feasible set, inside the phase 1 tolerance
            return Ok(LpSolution::Infeasible);
        }
        return Err(Error::Numerical {
            what: "simplex basic solution",
            residual,
        });
    }
    let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution::Optimal {
        x: Vector::from_vec_unchecked(x),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_representation() {
        let lp = LpProblem::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 2.0]).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.value().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_rhs() {
        let lp = LpProblem::new(vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![-1.0, 2.0]).unwrap();
        assert_eq!(simplex_solve(&lp).unwrap(), LpSolution::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let lp = LpProblem::new(vec![-1.0, 0.0], vec![vec![1.0, -1.0]], vec![0.0]).unwrap();
        assert_eq!(simplex_solve(&lp).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance in equality form (slacks s1..s3)
        let lp = LpProblem::new(
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.value().unwrap() + 0.05).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let lp = LpProblem::new(vec![1.0, 2.0], vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0]).unwrap();
        let sol = simplex_solve(&lp).unwrap();
        assert!((sol.value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_limits() {
        let lp = LpProblem::new(vec![0.0; 51], vec![vec![0.0; 51]], vec![0.0]).unwrap();
        assert!(matches!(simplex_solve(&lp), Err(Error::LpTooLarge { .. })));
    }

    /// Brute force: every basic solution from a choice of `m` columns.
    fn enumerate_basic(lp: &LpProblem) -> Option<f64> {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let e = DMatrix::from_fn(m, m, |i, k| lp.rows[i][cols[k]]);
            let Some(inv) = e.clone().try_inverse() else {
                continue;
            };
            let xb = inv * DVector::from_column_slice(&lp.rhs);
            if xb.iter().any(|v| *v < -1e-10) {
                continue;
            }
            let mut x = vec![0.0; n];
            for (k, &j) in cols.iter().enumerate() {
                x[j] = xb[k];
            }
            if lp.residual(&x) > 1e-8 {
                continue;
            }
            let value: f64 = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(value, |b: f64| b.min(value)));
        }
        best
    }

    #[test]
    fn agrees_with_basic_solution_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 200 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(1..n);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            // feasible by construction, bounded with positive costs
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let rhs: Vec<f64> = rows
                .iter()
                .map(|r| r.iter().zip(&x0).map(|(a, b)| a * b).sum())
                .collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
            let lp = LpProblem::new(c, rows, rhs).unwrap();
            let expected = enumerate_basic(&lp).expect("feasible instance");
            let got = simplex_solve(&lp).unwrap().value().unwrap();
            assert!(
                (got - expected).abs() <= 1e-9 * (1.0 + expected.abs()),
                "{got} vs {expected}"
            );
            checked += 1;
        }
    }
}
