//! The single-target system model and the quantities derived from it.
//!
//! A legitimate link with channel `H_r` and transmit covariance `Q_s` is
//! observed in white noise of power `σ²` plus jamming `H_z Q_z H_zᴴ`. Its rate
//! in nats is
//!
//! ```text
//! R(Q_z) = log|I + H_r Q_s H_rᴴ (H_z Q_z H_zᴴ + σ² I)⁻¹|
//! ```
//!
//! [`EffectiveDecomposition`] rotates the receiver into the singular basis of
//! `H_z`, splitting the rate into a part the jammer cannot touch (the
//! directions outside the range of `H_z`) and a reduced problem over an
//! `r_z × r_z` covariance `Q'`.

use crate::error::{invalid, JamError, Result};
use crate::linalg::{
    evd, inverse_pd, log_det_ratio, spectral_sum, svd, ComplexMatrix, Hermitian, C64, RANK_TOL,
};

/// A legitimate link under jamming, described at covariance level.
#[derive(Clone, Debug)]
pub struct JammingScenario {
    pub h_r: ComplexMatrix,
    pub q_s: Hermitian,
    pub h_z: ComplexMatrix,
    pub noise_power: f64,
    pub jam_budget: f64,
}

impl JammingScenario {
    pub fn new(
        h_r: ComplexMatrix,
        q_s: Hermitian,
        h_z: ComplexMatrix,
        noise_power: f64,
        jam_budget: f64,
    ) -> Result<Self> {
        if h_r.nrows() != h_z.nrows() {
            return Err(invalid(format!(
                "legitimate channel has {} rows but jamming channel has {}",
                h_r.nrows(),
                h_z.nrows()
            )));
        }
        if q_s.dim() != h_r.ncols() {
            return Err(invalid(format!(
                "signal covariance is {0}x{0} but the legitimate channel has {1} columns",
                q_s.dim(),
                h_r.ncols()
            )));
        }
        if h_r.nrows() == 0 || h_z.ncols() == 0 {
            return Err(invalid("channels must have at least one row and column"));
        }
        if !crate::linalg::all_finite(&h_r) || !crate::linalg::all_finite(&h_z) {
            return Err(invalid("channels have non-finite entries"));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(invalid(format!("noise power must be positive, got {noise_power}")));
        }
        if !(jam_budget >= 0.0 && jam_budget.is_finite()) {
            return Err(invalid(format!("jamming budget must be nonnegative, got {jam_budget}")));
        }
        if !crate::linalg::is_psd(&q_s, 1e-9)? {
            return Err(invalid("signal covariance is not positive semidefinite"));
        }
        Ok(Self {
            h_r,
            q_s,
            h_z,
            noise_power,
            jam_budget,
        })
    }

    pub fn n_r(&self) -> usize {
        self.h_r.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.h_z.ncols()
    }

    /// Received signal covariance `H_r Q_s H_rᴴ`.
    pub fn signal_covariance(&self) -> Hermitian {
        self.q_s.congruence(&self.h_r)
    }

    /// Same link with a different jamming budget.
    pub fn with_budget(&self, jam_budget: f64) -> Self {
        Self {
            jam_budget,
            ..self.clone()
        }
    }
}

/// Rate in nats of the legitimate link when the jammer uses `q_z`.
pub fn rate_single(sc: &JammingScenario, q_z: &Hermitian) -> Result<f64> {
    if q_z.dim() != sc.n_z() {
        return Err(invalid(format!(
            "jamming covariance is {0}x{0} but the jamming channel has {1} columns",
            q_z.dim(),
            sc.n_z()
        )));
    }
    let interference = q_z.congruence(&sc.h_z).shift(sc.noise_power);
    log_det_ratio(&interference, &sc.signal_covariance())
}

/// Rate without jamming, `log|I + H_r Q_s H_rᴴ / σ²|`.
pub fn unjammed_rate(sc: &JammingScenario) -> Result<f64> {
    log_det_ratio(&Hermitian::scaled_identity(sc.n_r(), sc.noise_power), &sc.signal_covariance())
}

/// Reduced problem data in the singular basis of the jamming channel.
#[derive(Clone, Debug)]
pub struct EffectiveDecomposition {
    /// Left singular vectors of `H_z` (`n_r × n_r`).
    pub u_z: ComplexMatrix,
    /// Right singular vectors of `H_z` (`n_z × n_z`).
    pub v_z: ComplexMatrix,
    /// The `r_z` nonzero singular values, descending.
    pub omega_plus: Vec<f64>,
    pub r_z: usize,
    /// Signal covariance in the rotated receiver basis, `U_zᴴ H_r Q_s H_rᴴ U_z`.
    pub b: Hermitian,
    pub b11: Hermitian,
    pub b12: ComplexMatrix,
    pub b22: Hermitian,
    /// Schur complement `B₁₁ − B₁₂(σ²I + B₂₂)⁻¹B₂₁`.
    pub b_tilde: Hermitian,
    /// `B̃` scaled by the inverse singular values on both sides.
    pub a_tilde: Hermitian,
    /// `diag(σ²/ω_i²)`.
    pub d0: Hermitian,
    pub noise_power: f64,
    /// Whether `H_r Q_s H_rᴴ` is positive definite at the rank tolerance.
    pub signal_pd: bool,
    /// `log|I + B₂₂/σ²|`, the rate carried outside the range of `H_z`.
    pub r0: f64,
}

/// The two parts of the rate: `r_bar` depends on the jammer, `r0` does not.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSplit {
    pub r_bar: f64,
    pub r0: f64,
}

impl RateSplit {
    pub fn total(&self) -> f64 {
        self.r_bar + self.r0
    }
}

/// Largest singular value below which the jamming channel counts as zero;
/// keeps `σ²/ω²` finite.
const DEGENERATE_SIGMA: f64 = 1e-150;

pub fn effective_quantities(sc: &JammingScenario) -> Result<EffectiveDecomposition> {
    let dec = svd(&sc.h_z)?;
    let sigma_max = dec.sigma.first().copied().unwrap_or(0.0);
    if sigma_max <= DEGENERATE_SIGMA {
        return Err(JamError::DegenerateChannel);
    }
    let r = dec.numerical_rank();
    let n_r = sc.n_r();
    let s = sc.signal_covariance();
    let s_eig = evd(&s)?;
    let signal_pd = s_eig.max_value() > 0.0 && s_eig.min_value() > RANK_TOL * s_eig.max_value();

    let b = s.adjoint_congruence(&dec.u);
    let b11 = b.principal_block(0, r);
    let b12 = b.matrix().view((0, r), (r, n_r - r)).into_owned();
    let b22 = b.principal_block(r, n_r - r);
    let sigma2 = sc.noise_power;

    let b_tilde = if r == n_r {
        b11.clone()
    } else {
        let inner = inverse_pd(&b22.shift(sigma2))?;
        &b11 - &inner.congruence(&b12)
    };
    let omega_plus: Vec<f64> = dec.sigma[..r].to_vec();
    let a_tilde = Hermitian::symmetrized(ComplexMatrix::from_fn(r, r, |i, j| {
        b_tilde.matrix()[(i, j)] / C64::new(omega_plus[i] * omega_plus[j], 0.0)
    }));
    let d0 = Hermitian::from_real_diagonal(
        &omega_plus.iter().map(|w| sigma2 / (w * w)).collect::<Vec<_>>(),
    );
    let r0 = if r == n_r {
        0.0
    } else {
        log_det_ratio(&Hermitian::scaled_identity(n_r - r, sigma2), &b22)?
    };
    Ok(EffectiveDecomposition {
        u_z: dec.u,
        v_z: dec.v,
        omega_plus,
        r_z: r,
        b,
        b11,
        b12,
        b22,
        b_tilde,
        a_tilde,
        d0,
        noise_power: sigma2,
        signal_pd,
        r0,
    })
}

impl EffectiveDecomposition {
    pub fn n_z(&self) -> usize {
        self.v_z.nrows()
    }

    /// Splits the rate at reduced covariance `q_prime` into the jammable part
    /// `log|I + Ã(Q' + D₀)⁻¹|` and the untouchable part.
    pub fn reduced_rate(&self, q_prime: &Hermitian) -> Result<RateSplit> {
        if q_prime.dim() != self.r_z {
            return Err(invalid(format!(
                "reduced covariance must be {0}x{0}, got {1}x{1}",
                self.r_z,
                q_prime.dim()
            )));
        }
        let r_bar = log_det_ratio(&(q_prime + &self.d0), &self.a_tilde)?;
        Ok(RateSplit { r_bar, r0: self.r0 })
    }

    /// Embeds `q_prime` into the jammer's antenna space:
    /// `Q_z = V_z · blockdiag(Q', 0) · V_zᴴ`.
    pub fn assemble_qz(&self, q_prime: &Hermitian) -> Hermitian {
        let v1 = self.v_z.columns(0, self.r_z).into_owned();
        q_prime.congruence(&v1)
    }

    /// Inverse of [`assemble_qz`](Self::assemble_qz) on its range:
    /// `V₁ᴴ Q_z V₁`.
    pub fn reduce_qz(&self, q_z: &Hermitian) -> Hermitian {
        let v1 = self.v_z.columns(0, self.r_z).into_owned();
        q_z.adjoint_congruence(&v1)
    }
}

/// Power levels of classic waterfilling over parallel channels.
#[derive(Clone, Debug, PartialEq)]
pub struct WaterfillAllocation {
    pub powers: Vec<f64>,
    /// Water level `μ`: every active channel gets `μ − σ²/gain`.
    pub level: f64,
}

/// Maximizes `Σ log(1 + g_i p_i / σ²)` subject to `Σ p_i = power`, `p ≥ 0`.
pub fn waterfill_powers(gains: &[f64], power: f64, noise_power: f64) -> WaterfillAllocation {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut powers = vec![0.0; gains.len()];
    if order.is_empty() {
        return WaterfillAllocation { powers, level: 0.0 };
    }
    let floor = |i: usize| noise_power / gains[i];
    let mut active = order.len();
    let mut level;
    loop {
        let sum: f64 = order[..active].iter().map(|&i| floor(i)).sum();
        level = (power + sum) / active as f64;
        if level > floor(order[active - 1]) || active == 1 {
            break;
        }
        active -= 1;
    }
    for &i in &order[..active] {
        powers[i] = (level - floor(i)).max(0.0);
    }
    WaterfillAllocation { powers, level }
}

/// Capacity-achieving transmit covariance for `h_r` under a trace budget.
///
/// Power is waterfilled over the right singular vectors of `h_r`. A zero
/// channel gets the uniform covariance, since every choice is equally useless.
pub fn waterfilling(h_r: &ComplexMatrix, transmit_power: f64, noise_power: f64) -> Result<Hermitian> {
    if !(transmit_power > 0.0) || !(noise_power > 0.0) {
        return Err(invalid("waterfilling needs positive transmit and noise power"));
    }
    let n_t = h_r.ncols();
    let dec = svd(h_r)?;
    let max = dec.sigma.first().copied().unwrap_or(0.0);
    if max <= DEGENERATE_SIGMA {
        return Ok(Hermitian::scaled_identity(n_t, transmit_power / n_t as f64));
    }
    let gains: Vec<f64> = dec
        .sigma
        .iter()
        .map(|&s| if s > RANK_TOL * max { s * s } else { 0.0 })
        .collect();
    let alloc = waterfill_powers(&gains, transmit_power, noise_power);
    Ok(spectral_sum(&dec.v, &alloc.powers))
}

/// Which solver produced a [`JammerSolution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Spca,
    Suboptimal,
    Zero,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Spca => "spca",
            Method::Suboptimal => "suboptimal",
            Method::Zero => "zero",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Outer iterations of an iterative solver; 0 for closed forms.
    pub iterations: usize,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub kkt_residual: Option<f64>,
    /// Whether the closed-form candidate was PSD.
    pub psd_condition_held: Option<bool>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct JammerSolution {
    pub q_z: Hermitian,
    pub rate: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_psd, log_det};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cmat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    fn real(m: &[f64], r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(r, c, &m.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    fn random_scenario(rng: &mut ChaCha8Rng, n_t: usize, n_r: usize, n_z: usize) -> JammingScenario {
        let h_r = cmat(rng, n_r, n_t);
        let q_s = Hermitian::gram(&cmat(rng, n_t, n_t));
        JammingScenario::new(h_r, q_s, cmat(rng, n_r, n_z), 1.0, 2.0).unwrap()
    }

    #[test]
    fn unjammed_identity_link() {
        let sc = JammingScenario::new(
            ComplexMatrix::identity(2, 2),
            Hermitian::identity(2),
            ComplexMatrix::identity(2, 2),
            1.0,
            1.0,
        )
        .unwrap();
        let r = rate_single(&sc, &Hermitian::zeros(2)).unwrap();
        assert!((r - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn scalar_rate() {
        let one = real(&[1.0], 1, 1);
        let sc = JammingScenario::new(one.clone(), Hermitian::identity(1), one, 1.0, 1.0).unwrap();
        let r = rate_single(&sc, &Hermitian::identity(1)).unwrap();
        assert!((r - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn nulled_jamming_channel_leaves_rate_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sc = random_scenario(&mut rng, 3, 2, 2);
        sc.h_z = ComplexMatrix::zeros(2, 2);
        let q = Hermitian::gram(&cmat(&mut rng, 2, 2));
        let r0 = rate_single(&sc, &Hermitian::zeros(2)).unwrap();
        assert!((rate_single(&sc, &q).unwrap() - r0).abs() < 1e-14);
        assert!((r0 - unjammed_rate(&sc).unwrap()).abs() < 1e-14);
        assert_eq!(effective_quantities(&sc).unwrap_err(), JamError::DegenerateChannel);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sc = random_scenario(&mut rng, 3, 2, 2);
        assert!(rate_single(&sc, &Hermitian::zeros(3)).is_err());
        assert!(JammingScenario::new(cmat(&mut rng, 2, 3), Hermitian::identity(3), cmat(&mut rng, 3, 2), 1.0, 1.0).is_err());
        assert!(JammingScenario::new(cmat(&mut rng, 2, 3), Hermitian::identity(3), cmat(&mut rng, 2, 2), 0.0, 1.0).is_err());
        assert!(JammingScenario::new(cmat(&mut rng, 2, 3), Hermitian::identity(3), cmat(&mut rng, 2, 2), 1.0, -1.0).is_err());
        assert!(JammingScenario::new(
            cmat(&mut rng, 2, 2),
            Hermitian::from_real_diagonal(&[1.0, -1.0]),
            cmat(&mut rng, 2, 2),
            1.0,
            1.0
        )
        .is_err());
    }

    #[test]
    fn identity_channel_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sc = JammingScenario::new(
            cmat(&mut rng, 2, 3),
            Hermitian::identity(3),
            ComplexMatrix::identity(2, 2),
            0.7,
            1.0,
        )
        .unwrap();
        let eff = effective_quantities(&sc).unwrap();
        assert_eq!(eff.r_z, 2);
        assert_eq!(eff.omega_plus, vec![1.0, 1.0]);
        assert!((&eff.b_tilde - &eff.b).frobenius_norm() < 1e-12);
        assert!((&eff.a_tilde - &eff.b).frobenius_norm() < 1e-12);
        assert!((&eff.d0 - &Hermitian::scaled_identity(2, 0.7)).frobenius_norm() < 1e-14);
        // u_z is only unique up to a unitary for repeated singular values, so
        // compare the basis-independent signal covariance instead.
        assert!((&eff.b.congruence(&eff.u_z) - &sc.signal_covariance()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn rank_one_diagonal_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let sc = JammingScenario::new(
            cmat(&mut rng, 2, 2),
            Hermitian::identity(2),
            real(&[2.0, 0.0, 0.0, 0.0], 2, 2),
            1.0,
            1.0,
        )
        .unwrap();
        let eff = effective_quantities(&sc).unwrap();
        assert_eq!(eff.r_z, 1);
        assert!((eff.omega_plus[0] - 2.0).abs() < 1e-14);
        assert!((eff.d0.matrix()[(0, 0)].re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn decomposition_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for (n_t, n_r, n_z) in [(4, 3, 5), (3, 5, 2), (2, 2, 2), (4, 4, 3)] {
            let sc = random_scenario(&mut rng, n_t, n_r, n_z);
            let eff = effective_quantities(&sc).unwrap();
            let s = sc.signal_covariance();
            assert!((&eff.b - &s.adjoint_congruence(&eff.u_z)).frobenius_norm() < 1e-10);
            let r = eff.r_z;
            assert_eq!(r, n_r.min(n_z));
            let schur = if r == n_r {
                eff.b11.clone()
            } else {
                let m = eff.b22.shift(1.0).into_matrix().try_inverse().unwrap();
                Hermitian::symmetrized(eff.b11.matrix() - &eff.b12 * m * eff.b12.adjoint())
            };
            assert!((&schur - &eff.b_tilde).frobenius_norm() < 1e-10);
            let om_inv = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                r,
                eff.omega_plus.iter().map(|w| C64::new(1.0 / w, 0.0)),
            ));
            assert!((&eff.a_tilde - &eff.b_tilde.congruence(&om_inv)).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn schur_complement_is_pd_when_signal_is_pd() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..200 {
            let sc = random_scenario(&mut rng, 4, 3, 2);
            let eff = effective_quantities(&sc).unwrap();
            assert!(eff.signal_pd);
            assert!(evd(&eff.b_tilde).unwrap().min_value() > 0.0);
        }
    }

    #[test]
    fn rate_split_matches_full_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (n_t, n_r, n_z) in [(4, 3, 5), (3, 5, 2), (2, 4, 4), (1, 3, 2)] {
            let sc = random_scenario(&mut rng, n_t, n_r, n_z);
            let eff = effective_quantities(&sc).unwrap();
            for _ in 0..10 {
                let q = Hermitian::gram(&cmat(&mut rng, eff.r_z, eff.r_z));
                let split = eff.reduced_rate(&q).unwrap();
                let qz = eff.assemble_qz(&q);
                assert!((qz.trace() - q.trace()).abs() < 1e-10);
                assert!(is_psd(&qz, 1e-9).unwrap());
                let full = rate_single(&sc, &qz).unwrap();
                assert!((split.total() - full).abs() < 1e-9, "{} vs {}", split.total(), full);
            }
            let zero = eff.reduced_rate(&Hermitian::zeros(eff.r_z)).unwrap();
            let direct = log_det_ratio(&eff.d0, &eff.a_tilde).unwrap();
            assert!((zero.r_bar - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn flooding_drives_reduced_rate_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let sc = random_scenario(&mut rng, 4, 3, 3);
        let eff = effective_quantities(&sc).unwrap();
        let r = eff.reduced_rate(&Hermitian::scaled_identity(3, 1e12)).unwrap();
        assert!(r.r_bar < 1e-9);
    }

    #[test]
    fn assemble_without_embedding_is_identity_map() {
        let eff_sc = JammingScenario::new(
            ComplexMatrix::identity(2, 2),
            Hermitian::identity(2),
            real(&[3.0, 0.0, 0.0, 1.0], 2, 2),
            1.0,
            1.0,
        )
        .unwrap();
        let eff = effective_quantities(&eff_sc).unwrap();
        let q = Hermitian::from_real_diagonal(&[0.3, 0.7]);
        assert!((&eff.assemble_qz(&q) - &q).frobenius_norm() < 1e-14);
        assert!(eff.assemble_qz(&Hermitian::zeros(2)).frobenius_norm() == 0.0);
    }

    #[test]
    fn off_diagonal_embedding_block_does_not_change_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        // n_z > n_r leaves a null space of H_z for the off-diagonal block.
        let sc = random_scenario(&mut rng, 4, 2, 4);
        let eff = effective_quantities(&sc).unwrap();
        let r = eff.r_z;
        let q = Hermitian::gram(&cmat(&mut rng, r, r));
        let base = rate_single(&sc, &eff.assemble_qz(&q)).unwrap();
        for _ in 0..20 {
            let gamma = cmat(&mut rng, r, 4 - r);
            let mut hat = ComplexMatrix::zeros(4, 4);
            hat.view_mut((0, 0), (r, r)).copy_from(q.matrix());
            hat.view_mut((0, r), (r, 4 - r)).copy_from(&gamma);
            hat.view_mut((r, 0), (4 - r, r)).copy_from(&gamma.adjoint());
            // A zero lower-right block forces gamma = 0 for PSD embeddings, so
            // the rate is evaluated on the possibly indefinite embedding.
            let qz = Hermitian::new(&eff.v_z * hat * eff.v_z.adjoint()).unwrap();
            assert!((rate_single(&sc, &qz).unwrap() - base).abs() < 1e-9);
        }
    }

    #[test]
    fn rate_decreases_along_psd_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let sc = random_scenario(&mut rng, 3, 3, 3);
            let q = Hermitian::gram(&cmat(&mut rng, 3, 3));
            let delta = Hermitian::gram(&cmat(&mut rng, 3, 2));
            let r = rate_single(&sc, &q).unwrap();
            for t in [1e-3, 0.1, 1.0, 10.0] {
                let moved = &q + &delta.scale(t);
                assert!(rate_single(&sc, &moved).unwrap() <= r + 1e-10);
            }
        }
    }

    #[test]
    fn waterfilling_examples() {
        let q = waterfilling(&ComplexMatrix::identity(2, 2), 2.0, 1.0).unwrap();
        assert!((&q - &Hermitian::identity(2)).frobenius_norm() < 1e-12);
        let q = waterfilling(&real(&[0.5], 1, 1), 3.0, 1.0).unwrap();
        assert!((q.trace() - 3.0).abs() < 1e-14);
        let q = waterfilling(&real(&[10.0, 0.0, 0.0, 0.01], 2, 2), 1.0, 1.0).unwrap();
        assert!((q.diagonal()[0] - 1.0).abs() < 1e-12 && q.diagonal()[1].abs() < 1e-12);
        let q = waterfilling(&ComplexMatrix::zeros(2, 3), 3.0, 1.0).unwrap();
        assert!((&q - &Hermitian::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn waterfilling_beats_grid_split() {
        // Two parallel channels: dense scan over the power split.
        let h = real(&[1.3, 0.0, 0.0, 0.6], 2, 2);
        let q = waterfilling(&h, 1.5, 1.0).unwrap();
        let rate_of = |q: &Hermitian| log_det(&q.congruence(&h).shift(1.0)).unwrap();
        let best = (0..=10_000)
            .map(|i| {
                let p = 1.5 * i as f64 / 10_000.0;
                rate_of(&Hermitian::from_real_diagonal(&[p, 1.5 - p]))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(rate_of(&q) >= best - 1e-12);
    }

    #[test]
    fn waterfilling_satisfies_its_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let gains: Vec<f64> = (0..4).map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                x * x
            }).collect();
            let a = waterfill_powers(&gains, 2.0, 1.0);
            assert!((a.powers.iter().sum::<f64>() - 2.0).abs() < 1e-12);
            for (p, g) in a.powers.iter().zip(&gains) {
                if *p > 0.0 {
                    assert!((a.level - 1.0 / g - p).abs() < 1e-8);
                } else {
                    assert!(1.0 / g >= a.level - 1e-12);
                }
            }
        }
    }
}
