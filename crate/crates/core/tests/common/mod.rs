#![allow(dead_code)]

use jamcraft_core::{ComplexMatrix, Hermitian, JammingScenario, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly symmetric complex Gaussian matrix with unit-variance entries.
pub fn cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(r, c, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Hermitian {
    Hermitian::gram(&cmat(rng, n, rank))
}

/// Random link with waterfilled signal covariance, as in the reference
/// single-link experiment.
pub fn waterfilled_scenario(
    rng: &mut ChaCha8Rng,
    n_t: usize,
    n_r: usize,
    n_z: usize,
    p_z: f64,
) -> JammingScenario {
    let h_r = cmat(rng, n_r, n_t);
    let h_z = cmat(rng, n_r, n_z);
    let q_s = jamcraft_core::waterfilling(&h_r, 3.0, 1.0).unwrap();
    JammingScenario::new(h_r, q_s, h_z, 1.0, p_z).unwrap()
}

/// Random link with full-rank signal covariance.
pub fn pd_scenario(rng: &mut ChaCha8Rng, n_t: usize, n_r: usize, n_z: usize, p_z: f64) -> JammingScenario {
    let h_r = cmat(rng, n_r, n_t);
    let h_z = cmat(rng, n_r, n_z);
    JammingScenario::new(h_r, Hermitian::identity(n_t), h_z, 1.0, p_z).unwrap()
}
