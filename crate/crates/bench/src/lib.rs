//! Shared fixtures for the solver benchmarks.

use farkas_core::sampling::{self, Regime};
use farkas_core::{Cone, GeneratorSet, Instance, LinearMap, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> Vector {
    Vector::from_slice(x).expect("finite")
}

/// `A = I₂`, `b = (1, 0)` over the orthant.
pub fn uniqueness() -> Instance {
    let generator = GeneratorSet::ball_cap(Cone::orthant(2));
    Instance::new(LinearMap::identity(2), v(&[1.0, 0.0]), generator, 0.0).expect("valid")
}

/// Second-order cone instance whose dual infimum is not attained.
pub fn second_order() -> Instance {
    let a = LinearMap::from_rows(&[vec![1.0, 0.0, -1.0], vec![1.0, 2.0, 1.0]]).expect("valid");
    let generator = GeneratorSet::ball_cap(Cone::second_order(3, 1.0).expect("valid"));
    Instance::new(a, v(&[0.0, 1.0]), generator, 0.0).expect("valid")
}

/// Seeded random instances of one regime with at most `rows x dim` maps.
pub fn sampled(regime: Regime, count: usize, rows: usize, dim: usize, epsilon: f64, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            sampling::sample(&mut rng, regime, rows, dim, epsilon)
                .expect("sampling succeeds")
                .instance
        })
        .collect()
}

/// Random points for projection benchmarks.
pub fn points(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampling::random_vector(&mut rng, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        let a = sampled(Regime::Feasible, 3, 4, 5, 0.1, 1);
        let b = sampled(Regime::Feasible, 3, 4, 5, 0.1, 1);
        assert_eq!(a.len(), 3);
        assert!(a.iter().zip(&b).all(|(p, q)| p.b() == q.b()));
        assert_eq!(points(4, 2, 9), points(4, 2, 9));
        assert_eq!(uniqueness().a().rows(), 2);
        assert_eq!(second_order().a().cols(), 3);
    }
}
