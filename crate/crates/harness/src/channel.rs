//! Seeded channel draws.
//!
//! Every trial owns a ChaCha stream selected by its trial index, so a trial
//! sees the same channels at every grid point and the result does not depend
//! on which worker ran it.

use jamcraft_core::{ComplexMatrix, Hermitian, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Circularly-symmetric complex Gaussian matrix with entry variance
/// `variance` (real and imaginary parts each `N(0, variance/2)`).
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> ComplexMatrix {
    assert!(variance > 0.0, "channel variance must be positive");
    let s = (variance / 2.0).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

/// Row-major `[re, im]` pairs, the matrix layout used in configs and
/// error reports.
pub fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> ComplexMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    ComplexMatrix::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
}

pub fn hermitian_to_pairs(h: &Hermitian) -> Vec<Vec<[f64; 2]>> {
    matrix_to_pairs(h.matrix())
}
