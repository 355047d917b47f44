//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

use incompat::linalg::{random_unitary, Hermitian, Matrix};
use incompat::povm::{effect_from_bloch, DeformationMatrix, Effect};

/// `U diag(x) U^†` with eigenvalues close to 0 or 1, so that random pairs
/// are usually incompatible.
pub fn sharp_effect<R: Rng>(dim: usize, rng: &mut R) -> Effect {
    let values: Vec<f64> = (0..dim)
        .map(|i| {
            let high = if i == 0 { true } else if i == 1 { false } else { rng.random_bool(0.5) };
            let jitter = rng.random_range(0.0..0.08);
            if high { 1.0 - jitter } else { jitter }
        })
        .collect();
    let u = random_unitary(dim, rng);
    Effect::new(Hermitian::diag(&values)).unwrap().conjugate_by(&u)
}

/// Random projection of the given rank.
pub fn random_projection<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> Effect {
    let values: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let u = random_unitary(dim, rng);
    Effect::new(Hermitian::diag(&values)).unwrap().conjugate_by(&u)
}

/// Qubit effect from a random Bloch vector of length close to its maximum.
pub fn sharp_qubit_effect<R: Rng>(rng: &mut R) -> Effect {
    let alpha: f64 = rng.random_range(0.9..1.1);
    let len = alpha.min(2.0 - alpha) * rng.random_range(0.85..1.0);
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    effect_from_bloch(alpha, [len * r * phi.cos(), len * r * phi.sin(), len * z]).unwrap()
}

pub fn random_a<R: Rng>(rng: &mut R) -> DeformationMatrix {
    DeformationMatrix::new(rng.random_range(0.0..1.0), rng.random_range(0.0..0.5), rng.random_range(0.0..1.0)).unwrap()
}

/// Kraus operators of a random mixture of `terms` unitaries.
pub fn random_unital_channel<R: Rng>(dim: usize, terms: usize, rng: &mut R) -> Vec<Matrix> {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .map(|w| random_unitary(dim, rng).scale((w / total).sqrt()))
        .collect()
}

/// `V M V^†` for a random isometry `V: C^d -> C^(d + extra)`.
pub fn embed<R: Rng>(m: &Effect, n: &Effect, extra: usize, rng: &mut R) -> (Effect, Effect) {
    let u = random_unitary(m.dim() + extra, rng);
    let zero = Effect::zero(extra);
    (m.direct_sum(&zero).conjugate_by(&u), n.direct_sum(&zero).conjugate_by(&u))
}
