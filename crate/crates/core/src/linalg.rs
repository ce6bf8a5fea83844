//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here operates on [`Hermitian`], a thin wrapper that keeps a
//! square complex matrix exactly conjugate-symmetric. Eigenvalues are always
//! reported in descending order so that "the first r eigenpairs" means the
//! same thing in every module.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{invalid, JamError, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative cutoff below which singular values and eigenvalues count as zero.
pub const RANK_TOL: f64 = 1e-10;

const MAX_DECOMPOSITION_SWEEPS: usize = 10_000;

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if all_finite(m) {
        Ok(())
    } else {
        Err(invalid(format!("{what} has non-finite entries")))
    }
}

/// A square complex matrix equal to its own conjugate transpose.
///
/// Construction averages the input with its adjoint, so the stored matrix is
/// exactly Hermitian even when the input carries rounding asymmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(ComplexMatrix);

impl Hermitian {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        require_finite(&m, "Hermitian matrix")?;
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation; for results of arithmetic on values
    /// that were already validated.
    pub(crate) fn symmetrized(m: ComplexMatrix) -> Self {
        let adj = m.adjoint();
        Self((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self(ComplexMatrix::identity(n, n) * C64::new(s, 0.0))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0)));
        Self(ComplexMatrix::from_diagonal(&v))
    }

    /// `m · mᴴ`, e.g. a Gram matrix or `H Q Hᴴ` with `Q = I`.
    pub fn gram(m: &ComplexMatrix) -> Self {
        Self::symmetrized(m * m.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    /// `self + s·I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += C64::new(s, 0.0);
        }
        Self(m)
    }

    /// `m · self · mᴴ`.
    pub fn congruence(&self, m: &ComplexMatrix) -> Self {
        Self::symmetrized(m * &self.0 * m.adjoint())
    }

    /// `mᴴ · self · m`.
    pub fn adjoint_congruence(&self, m: &ComplexMatrix) -> Self {
        Self::symmetrized(m.adjoint() * &self.0 * m)
    }

    /// Real inner product `Re Tr(self · other)`.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        self.0.dotc(&other.0).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Principal submatrix of rows and columns `start..start + len`.
    pub fn principal_block(&self, start: usize, len: usize) -> Self {
        Self(self.0.view((start, start), (len, len)).into_owned())
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.0)
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

impl Neg for &Hermitian {
    type Output = Hermitian;
    fn neg(self) -> Hermitian {
        Hermitian(-&self.0)
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scale(rhs)
    }
}

/// Eigendecomposition `vectors · diag(values) · vectorsᴴ` with descending values.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub vectors: ComplexMatrix,
    pub values: Vec<f64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Number of eigenvalues above `RANK_TOL` times the largest magnitude.
    pub fn numerical_rank(&self) -> usize {
        let cutoff = RANK_TOL * self.max_abs_value();
        if self.max_abs_value() == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > cutoff).count()
    }

    /// Applies `f` to every eigenvalue and rebuilds the matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let w: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        spectral_sum(&self.vectors, &w)
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map(|v| v)
    }
}

/// `Σ_i w_i · v_i v_iᴴ` over the leading `w.len()` columns of `vectors`.
pub fn spectral_sum(vectors: &ComplexMatrix, weights: &[f64]) -> Hermitian {
    let n = vectors.nrows();
    let k = weights.len();
    let mut scaled = vectors.columns(0, k).into_owned();
    for (j, &w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w);
    }
    if k == 0 {
        return Hermitian::zeros(n);
    }
    Hermitian::symmetrized(scaled * vectors.columns(0, k).adjoint())
}

pub fn evd(h: &Hermitian) -> Result<Eigensystem> {
    require_finite(h.matrix(), "matrix passed to evd")?;
    let n = h.dim();
    if n == 0 {
        return Ok(Eigensystem {
            vectors: ComplexMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, MAX_DECOMPOSITION_SWEEPS)
        .ok_or_else(|| JamError::Domain("eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { vectors, values })
}

/// Full singular value decomposition `m = u · Σ · vᴴ` with square unitary factors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// Count of singular values above `RANK_TOL · σ_max`.
    pub fn numerical_rank(&self) -> usize {
        let max = self.sigma.first().copied().unwrap_or(0.0);
        if max == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > RANK_TOL * max).count()
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    require_finite(m, "matrix passed to svd")?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: ComplexMatrix::identity(rows, rows),
            sigma: Vec::new(),
            v: ComplexMatrix::identity(cols, cols),
        });
    }
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, MAX_DECOMPOSITION_SWEEPS)
        .ok_or_else(|| JamError::Domain("singular value decomposition did not converge".into()))?;
    let (u_thin, v_t) = match (dec.u, dec.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(JamError::Domain("singular vectors unavailable".into())),
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sigma = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u_sorted = ComplexMatrix::from_fn(rows, k, |r, c| u_thin[(r, order[c])]);
    let v_sorted = ComplexMatrix::from_fn(cols, k, |r, c| v_t[(order[c], r)].conj());
    Ok(Svd {
        u: complete_unitary(&u_sorted),
        sigma,
        v: complete_unitary(&v_sorted),
    })
}

/// Extends orthonormal columns to a square unitary matrix.
///
/// New columns are greedily taken from the standard basis vector with the
/// largest component orthogonal to the current span, which keeps the
/// Gram-Schmidt step well conditioned.
fn complete_unitary(partial: &ComplexMatrix) -> ComplexMatrix {
    let n = partial.nrows();
    let mut basis: Vec<DVector<C64>> = partial.column_iter().map(|c| c.into_owned()).collect();
    let orthogonalize = |v: &mut DVector<C64>, basis: &[DVector<C64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = b.dotc(v);
                v.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
    };
    while basis.len() < n {
        let mut best: Option<DVector<C64>> = None;
        let mut best_norm = -1.0;
        for j in 0..n {
            let mut e = DVector::<C64>::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            orthogonalize(&mut e, &basis);
            let norm = e.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(e);
            }
        }
        let v = best.expect("dimension is positive");
        basis.push(v / C64::new(best_norm, 0.0));
    }
    ComplexMatrix::from_columns(&basis)
}

/// True iff the smallest eigenvalue is at least `-tol · max(1, max |λ|)`.
pub fn is_psd(h: &Hermitian, tol: f64) -> Result<bool> {
    let e = evd(h)?;
    Ok(psd_by_spectrum(&e, tol))
}

pub fn psd_by_spectrum(e: &Eigensystem, tol: f64) -> bool {
    e.dim() == 0 || e.min_value() >= -tol * e.max_abs_value().max(1.0)
}

fn cholesky_factor(h: &Hermitian, what: &str) -> Result<ComplexMatrix> {
    require_finite(h.matrix(), what)?;
    let chol = nalgebra::Cholesky::new(h.matrix().clone())
        .ok_or_else(|| JamError::Domain(format!("{what} is not positive definite")))?;
    let l = chol.unpack();
    if (0..l.nrows()).any(|i| !(l[(i, i)].re > 0.0)) {
        return Err(JamError::Domain(format!("{what} is not positive definite")));
    }
    Ok(l)
}

/// Natural-log determinant of a positive definite matrix.
pub fn log_det(h: &Hermitian) -> Result<f64> {
    let l = cholesky_factor(h, "log_det argument")?;
    Ok(2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// `log|base + extra| − log|base|` for positive definite `base`.
///
/// Evaluated as `log|I + L⁻¹·extra·L⁻ᴴ|` with `base = L Lᴴ`, which avoids the
/// cancellation of two large log-determinants.
pub fn log_det_ratio(base: &Hermitian, extra: &Hermitian) -> Result<f64> {
    if base.dim() != extra.dim() {
        return Err(invalid("log_det_ratio dimension mismatch"));
    }
    let l = cholesky_factor(base, "log_det_ratio base")?;
    let y = l
        .solve_lower_triangular(extra.matrix())
        .ok_or_else(|| JamError::Domain("singular Cholesky factor".into()))?;
    let w = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or_else(|| JamError::Domain("singular Cholesky factor".into()))?;
    log_det(&Hermitian::symmetrized(w).shift(1.0))
}

pub fn inverse_pd(h: &Hermitian) -> Result<Hermitian> {
    let l = cholesky_factor(h, "matrix to invert")?;
    let n = l.nrows();
    let l_inv = l
        .solve_lower_triangular(&ComplexMatrix::identity(n, n))
        .ok_or_else(|| JamError::Domain("singular Cholesky factor".into()))?;
    Ok(Hermitian::symmetrized(l_inv.adjoint() * l_inv))
}

/// Frobenius projection onto `{X ⪰ 0, Tr X ≤ budget}`.
pub fn psd_trace_projection(h: &Hermitian, budget: f64) -> Result<Hermitian> {
    let e = evd(h)?;
    let ones = vec![1.0; e.dim()];
    let x = project_weighted_capped_simplex(&e.values, &ones, budget);
    Ok(spectral_sum(&e.vectors, &x))
}

/// Euclidean projection of `v` onto `{x ≥ 0, Σ w_i x_i ≤ budget}` for positive
/// weights.
///
/// The solution is `x_i = max(0, v_i − θ w_i)`, with `θ = 0` when the clamped
/// point is already within budget and otherwise the unique level making the
/// weighted sum equal `budget`, found exactly from the sorted breakpoints
/// `v_i / w_i`.
pub fn project_weighted_capped_simplex(v: &[f64], w: &[f64], budget: f64) -> Vec<f64> {
    debug_assert_eq!(v.len(), w.len());
    let budget = budget.max(0.0);
    let clamped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let load: f64 = clamped.iter().zip(w).map(|(x, w)| x * w).sum();
    if load <= budget {
        return clamped;
    }
    let mut order: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0).collect();
    order.sort_by(|&a, &b| (v[b] / w[b]).total_cmp(&(v[a] / w[a])));
    let mut sum_wv = 0.0;
    let mut sum_ww = 0.0;
    let mut theta = 0.0;
    for (k, &i) in order.iter().enumerate() {
        sum_wv += w[i] * v[i];
        sum_ww += w[i] * w[i];
        theta = (sum_wv - budget) / sum_ww;
        let next = order.get(k + 1).map_or(0.0, |&j| v[j] / w[j]);
        if theta >= next {
            break;
        }
    }
    v.iter()
        .zip(w)
        .map(|(&x, &wi)| (x - theta * wi).max(0.0))
        .collect()
}

/// Stacks blocks into a block-diagonal matrix.
pub fn block_diagonal(blocks: &[Hermitian]) -> Hermitian {
    let n: usize = blocks.iter().map(Hermitian::dim).sum();
    let mut m = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let d = b.dim();
        m.view_mut((at, at), (d, d)).copy_from(b.matrix());
        at += d;
    }
    Hermitian(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Hermitian {
        Hermitian::new(random_matrix(rng, n, n)).unwrap()
    }

    fn unitary_defect(u: &ComplexMatrix) -> f64 {
        let n = u.ncols();
        (u.adjoint() * u - ComplexMatrix::identity(n, n)).norm()
    }

    #[test]
    fn construction_symmetrizes() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.2), C64::new(2.0, 1.0), C64::new(0.0, 0.0), C64::new(3.0, 0.0)],
        );
        let h = Hermitian::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
        assert_eq!(h.matrix()[(0, 0)].im, 0.0);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(Hermitian::new(ComplexMatrix::zeros(2, 3)).is_err());
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(Hermitian::new(m), Err(JamError::InvalidInput(_))));
    }

    #[test]
    fn evd_of_diagonal_sorts_descending() {
        let e = evd(&Hermitian::from_real_diagonal(&[-1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![2.0, -1.0]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let e = evd(&Hermitian::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn evd_reconstructs_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=16 {
            let h = random_hermitian(&mut rng, n);
            let e = evd(&h).unwrap();
            assert!(unitary_defect(&e.vectors) < 1e-10);
            assert!((&e.reconstruct() - &h).frobenius_norm() < 1e-10);
            assert!(e.values.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn evd_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(&mut rng, 5);
        let a = evd(&h).unwrap();
        let b = evd(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn svd_shapes_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(3, 5), (5, 3), (4, 4), (1, 6), (6, 1), (16, 9)] {
            let m = random_matrix(&mut rng, r, c);
            let s = svd(&m).unwrap();
            assert_eq!(s.u.shape(), (r, r));
            assert_eq!(s.v.shape(), (c, c));
            assert!(unitary_defect(&s.u) < 1e-10);
            assert!(unitary_defect(&s.v) < 1e-10);
            assert!(s.sigma.windows(2).all(|p| p[0] >= p[1]));
            let mut sig = ComplexMatrix::zeros(r, c);
            for (i, &x) in s.sigma.iter().enumerate() {
                sig[(i, i)] = C64::new(x, 0.0);
            }
            assert!((&s.u * sig * s.v.adjoint() - &m).norm() < 1e-10);
        }
    }

    #[test]
    fn svd_trivial_cases() {
        let s = svd(&ComplexMatrix::identity(2, 2)).unwrap();
        assert_eq!(s.sigma, vec![1.0, 1.0]);
        let s = svd(&ComplexMatrix::zeros(2, 3)).unwrap();
        assert_eq!(s.sigma, vec![0.0, 0.0]);
        assert_eq!(s.numerical_rank(), 0);
        assert!(unitary_defect(&s.u) < 1e-12 && unitary_defect(&s.v) < 1e-12);
    }

    #[test]
    fn svd_of_rank_deficient_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 5, 2);
        let b = random_matrix(&mut rng, 2, 4);
        let s = svd(&(a * b)).unwrap();
        assert_eq!(s.numerical_rank(), 2);
        assert!(unitary_defect(&s.u) < 1e-10 && unitary_defect(&s.v) < 1e-10);
    }

    #[test]
    fn psd_predicate() {
        assert!(is_psd(&Hermitian::identity(2), 1e-9).unwrap());
        assert!(!is_psd(&Hermitian::from_real_diagonal(&[1.0, -1e-3]), 1e-9).unwrap());
        assert!(is_psd(&Hermitian::zeros(3), 1e-9).unwrap());
    }

    #[test]
    fn log_det_values() {
        assert_eq!(log_det(&Hermitian::identity(4)).unwrap(), 0.0);
        assert!((log_det(&Hermitian::from_real_diagonal(&[2.0, 3.0])).unwrap() - 6f64.ln()).abs() < 1e-14);
        assert!(matches!(
            log_det(&Hermitian::from_real_diagonal(&[1.0, 0.0])),
            Err(JamError::Domain(_))
        ));
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 3, 3);
            let h = Hermitian::gram(&m).shift(0.1);
            let from_evd: f64 = evd(&h).unwrap().values.iter().map(|v| v.ln()).sum();
            let ld = log_det(&h).unwrap();
            assert!((ld - from_evd).abs() <= 1e-10 * from_evd.abs().max(1.0));
        }
    }

    #[test]
    fn log_det_ratio_matches_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = Hermitian::gram(&random_matrix(&mut rng, 4, 4)).shift(0.5);
        let extra = Hermitian::gram(&random_matrix(&mut rng, 4, 2));
        let direct = log_det(&(&base + &extra)).unwrap() - log_det(&base).unwrap();
        assert!((log_det_ratio(&base, &extra).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn inverse_pd_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = Hermitian::gram(&random_matrix(&mut rng, 4, 4)).shift(0.2);
        let inv = inverse_pd(&h).unwrap();
        assert!((h.matrix() * inv.matrix() - ComplexMatrix::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn projection_examples() {
        let p = psd_trace_projection(&Hermitian::from_real_diagonal(&[0.5, 0.5]), 2.0).unwrap();
        assert!((&p - &Hermitian::from_real_diagonal(&[0.5, 0.5])).frobenius_norm() < 1e-14);
        let p = psd_trace_projection(&Hermitian::from_real_diagonal(&[3.0, -1.0]), 2.0).unwrap();
        assert!((&p - &Hermitian::from_real_diagonal(&[2.0, 0.0])).frobenius_norm() < 1e-14);
        let p = psd_trace_projection(&Hermitian::from_real_diagonal(&[-1.0, -2.0]), 5.0).unwrap();
        assert!(p.frobenius_norm() < 1e-14);
    }

    #[test]
    fn projection_diag_matches_quadratic_program_oracle() {
        // Independent oracle: among 2x2 diagonal PSD points the nearest is
        // found by dense search over (a, b) with a + b <= 2; off-diagonal
        // entries only add distance for a diagonal target.
        let target = [3.0, -1.0];
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = 2000;
        for i in 0..=steps {
            let a = 2.0 * i as f64 / steps as f64;
            let b = 0.0;
            let d = (a - target[0]).powi(2) + (b - target[1]).powi(2);
            if d < best.0 {
                best = (d, a, b);
            }
        }
        let p = psd_trace_projection(&Hermitian::from_real_diagonal(&target), 2.0).unwrap();
        assert!((p.diagonal()[0] - best.1).abs() < 2e-3);
        assert!(p.diagonal()[1].abs() < 1e-14);
    }

    #[test]
    fn weighted_simplex_projection_hits_budget() {
        let x = project_weighted_capped_simplex(&[3.0, 1.0, -2.0], &[1.0, 2.0, 1.0], 2.0);
        let load: f64 = x.iter().zip([1.0, 2.0, 1.0]).map(|(a, b)| a * b).sum();
        assert!((load - 2.0).abs() < 1e-14);
        assert_eq!(x[2], 0.0);
        let x = project_weighted_capped_simplex(&[1.0, 1.0], &[1.0, 1.0], 0.0);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn projection_optimal_against_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in 0..100 {
            let n = 2 + case % 2;
            let h = random_hermitian(&mut rng, n).scale(2.0);
            let budget = 1.5;
            let p = psd_trace_projection(&h, budget).unwrap();
            let dist = (&p - &h).frobenius_norm();
            for _ in 0..200 {
                let g = random_matrix(&mut rng, n, n);
                let mut x = Hermitian::gram(&g);
                let t = x.trace();
                x = x.scale(budget * rand::Rng::random::<f64>(&mut rng) / t);
                assert!((&x - &h).frobenius_norm() >= dist - 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(
            seed in 0u64..10_000,
            n in 1usize..6,
            budget in 0.01f64..10.0,
            scale in 0.1f64..20.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, n).scale(scale);
            let p = psd_trace_projection(&h, budget).unwrap();
            prop_assert!(is_psd(&p, 1e-9).unwrap());
            prop_assert!(p.trace() <= budget + 1e-9);
            let pp = psd_trace_projection(&p, budget).unwrap();
            prop_assert!((&pp - &p).frobenius_norm() < 1e-10 * (1.0 + p.frobenius_norm()));
        }

        #[test]
        fn evd_reconstruction_property(seed in 0u64..10_000, n in 1usize..17) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, n);
            let e = evd(&h).unwrap();
            prop_assert!((&e.reconstruct() - &h).frobenius_norm() < 1e-10);
            prop_assert!(unitary_defect(&e.vectors) < 1e-10);
        }

        #[test]
        fn svd_reconstruction_property(seed in 0u64..10_000, r in 1usize..17, c in 1usize..17) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, r, c);
            let s = svd(&m).unwrap();
            let mut sig = ComplexMatrix::zeros(r, c);
            for (i, &x) in s.sigma.iter().enumerate() {
                sig[(i, i)] = C64::new(x, 0.0);
            }
            prop_assert!((&s.u * sig * s.v.adjoint() - &m).norm() < 1e-10);
            prop_assert!(unitary_defect(&s.u) < 1e-10);
            prop_assert!(unitary_defect(&s.v) < 1e-10);
        }
    }
}
