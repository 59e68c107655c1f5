//! Brute-force Fenchel conjugate of `½ j_K²` on a Cartesian grid.
//!
//! The grid maximum approaches `½ σ_K(z)²` from below. A single grid is
//! limited by its spacing; [`ConjugateGrid`] zooms in on the best cell, which
//! converges because the objective `<z, x> - ½ j_K(x)²` is concave, and
//! maximises exactly along each lattice ray so that optima on extreme rays
//! of the cone are not lost between lattice directions.

use crate::error::{check_dim, Error, Result};
use crate::generators::GeneratorSet;
use crate::operators::Vector;

pub const MAX_GRID_DIM: usize = 3;

/// `max over grid x of <z, x> - ½ j_K(x)²` on `[-radius, radius]^d` with
/// `grid_n` points per axis.
pub fn conjugate_grid_check(k: &GeneratorSet, z: &Vector, grid_radius: f64, grid_n: usize) -> Result<f64> {
    let center = Vector::zeros(k.dim());
    Ok(grid_max(k, z, &center, grid_radius, grid_n, false)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateGrid {
    pub radius: f64,
    pub points_per_axis: usize,
    /// Number of zoom passes; each halves the window around the incumbent.
    pub levels: usize,
}

impl Default for ConjugateGrid {
    fn default() -> Self {
        Self {
            radius: 3.0,
            points_per_axis: 21,
            levels: 40,
        }
    }
}

impl ConjugateGrid {
    /// Grid estimate of `(½ j_K²)*(z)` and the maximising grid point.
    pub fn evaluate(&self, k: &GeneratorSet, z: &Vector) -> Result<(Vector, f64)> {
        let mut center = Vector::zeros(k.dim());
        let mut radius = self.radius;
        let mut best = grid_max(k, z, &center, radius, self.points_per_axis, true)?;
        let h = |r: f64| 2.0 * r / (self.points_per_axis.max(2) - 1) as f64;
        for level in 1..self.levels {
            radius *= 0.5;
            center = best.0.clone();
            // Every window centred at the origin is a scaled copy of the first
            // one, so thin cones would never be sampled; a shifted copy of the
            // lattice sees new directions while the centred one keeps faces
            // through the incumbent.
            let shifted = center.axpy(h(radius), &lattice_shift(level, k.dim()));
            for c in [&center, &shifted] {
                let next = grid_max(k, z, c, radius, self.points_per_axis, true)?;
                if next.1 > best.1 {
                    best = next;
                }
            }
        }
        Ok(best)
    }
}

/// Additive recurrence on the generalised golden ratio, coordinates in
/// `[-0.5, 0.5)`.
fn lattice_shift(level: usize, dim: usize) -> Vector {
    // root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..50 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let data = (1..=dim)
        .map(|i| (level as f64 * phi.powi(-(i as i32))).fract() - 0.5)
        .collect();
    Vector::from_vec_unchecked(data)
}

/// With `radial`, each lattice point is replaced by the best point on its
/// ray, `t x` with `t = <z, x> / j(x)²`, which `j(tx) = t j(x)` makes exact.
fn grid_max(
    k: &GeneratorSet,
    z: &Vector,
    center: &Vector,
    radius: f64,
    n: usize,
    radial: bool,
) -> Result<(Vector, f64)> {
    let d = k.dim();
    check_dim("conjugate grid", d, z.dim())?;
    if d == 0 || d > MAX_GRID_DIM {
        return Err(Error::InvalidInput(format!(
            "grid conjugate supports dimensions 1..={MAX_GRID_DIM}"
        )));
    }
    if n < 2 || !(radius > 0.0) {
        return Err(Error::InvalidInput(
            "grid needs at least two points and a positive radius".into(),
        ));
    }
    let h = 2.0 * radius / (n - 1) as f64;
    let total = n.pow(d as u32);
    // the origin is always admissible with value 0
    let mut best = (Vector::zeros(d), 0.0);
    let mut coords = vec![0.0; d];
    for idx in 0..total {
        let mut rest = idx;
        for (c, coord) in coords.iter_mut().enumerate() {
            *coord = center[c] - radius + (rest % n) as f64 * h;
            rest /= n;
        }
        let x = Vector::from_vec_unchecked(coords.clone());
        let g = k.gauge(&x)?;
        if !g.is_finite() {
            continue;
        }
        let s = z.dot(&x);
        if radial {
            if s > 0.0 && g > 0.0 {
                let val = 0.5 * (s / g) * (s / g);
                if val > best.1 {
                    best = (x.scale(s / (g * g)), val);
                }
            }
            continue;
        }
        let val = s - 0.5 * g * g;
        if val > best.1 {
            best = (x, val);
        }
    }
    Ok(best)
}
