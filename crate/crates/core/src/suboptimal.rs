//! Closed-form suboptimal jamming covariance for budgets where the optimal
//! closed form is indefinite.
//!
//! The family
//!
//! ```text
//! Q'(ε, λ) = U·sqrt(Λ/λ + Λ²/4)·Uᴴ − ½·UΛUᴴ + (ε − 1)·D₀
//! ```
//!
//! coincides with the optimal closed form at `ε = 0` and is PSD at `ε = 1`.
//! For each `ε` the trace budget pins `λ`; the solver returns the smallest
//! `ε` whose member is PSD.

use crate::error::{JamError, Result};
use crate::linalg::{evd, is_psd, spectral_sum, ComplexMatrix, Hermitian};
use crate::scenario::EffectiveDecomposition;
use crate::spectral::solve_multiplier;

/// PSD tolerance used while searching over `ε`; tighter than the tolerance
/// promised on the output so that the returned point is safely inside.
const SEARCH_PSD_TOL: f64 = 1e-12;
const PROBES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const SCAN_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonLambda {
    pub epsilon: f64,
    /// `None` when the effective signal matrix vanishes and no power is spent.
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SuboptimalOutcome {
    pub q_prime: Hermitian,
    pub params: EpsilonLambda,
}

/// Spectral data of one member of the `ε` family: the eigenvectors and
/// eigenvalues of `Ã` that enter the square-root term, and the fixed
/// subtracted part `½·UΛUᴴ`.
pub struct EpsilonFamily<'a> {
    pub vectors: &'a ComplexMatrix,
    pub values: &'a [f64],
    pub half: Hermitian,
    pub d0: &'a Hermitian,
    pub p_z: f64,
}

impl EpsilonFamily<'_> {
    /// Member at `epsilon` together with the multiplier meeting the budget.
    pub fn member(&self, epsilon: f64) -> Result<(Hermitian, f64)> {
        let target = self.p_z + (1.0 - epsilon) * self.d0.trace();
        let lambda = solve_multiplier(self.values, target)?;
        let root: Vec<f64> = self
            .values
            .iter()
            .map(|&v| (v / lambda + 0.25 * v * v).sqrt())
            .collect();
        let q = &(&spectral_sum(self.vectors, &root) - &self.half) + &self.d0.scale(epsilon - 1.0);
        Ok((q, lambda))
    }

    fn feasible(&self, epsilon: f64) -> Result<bool> {
        is_psd(&self.member(epsilon)?.0, SEARCH_PSD_TOL)
    }
}

/// Smallest `ε ∈ [0, 1]` whose family member is PSD, and its multiplier.
///
/// Feasibility is probed on a coarse grid first. If it switches from
/// infeasible to feasible exactly once, the switch is refined by bisection;
/// otherwise a fine linear scan from zero is used.
pub fn epsilon_lambda_search(family: &EpsilonFamily<'_>) -> Result<EpsilonLambda> {
    let probes: Vec<bool> = PROBES
        .iter()
        .map(|&e| family.feasible(e))
        .collect::<Result<_>>()?;
    if !probes[PROBES.len() - 1] {
        return Err(JamError::ContractViolation(
            "suboptimal family is indefinite even at epsilon = 1".into(),
        ));
    }
    let first = probes.iter().position(|&p| p).expect("last probe is feasible");
    let monotone = probes[first..].iter().all(|&p| p);
    let epsilon = if first == 0 {
        0.0
    } else if monotone {
        let (mut lo, mut hi) = (PROBES[first - 1], PROBES[first]);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if family.feasible(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    } else {
        log::warn!("PSD feasibility is not monotone in epsilon on the probe grid {probes:?}; scanning");
        let steps = (1.0 / SCAN_STEP).round() as usize;
        let mut found = 1.0;
        for j in 0..=steps {
            let e = j as f64 * SCAN_STEP;
            if family.feasible(e)? {
                found = e;
                break;
            }
        }
        found
    };
    let (_, lambda) = family.member(epsilon)?;
    Ok(EpsilonLambda {
        epsilon,
        lambda: Some(lambda),
    })
}

fn solve_family(
    vectors: &ComplexMatrix,
    values: &[f64],
    half: Hermitian,
    eff: &EffectiveDecomposition,
    p_z: f64,
) -> Result<SuboptimalOutcome> {
    let family = EpsilonFamily {
        vectors,
        values,
        half,
        d0: &eff.d0,
        p_z,
    };
    let params = epsilon_lambda_search(&family)?;
    let (q_prime, _) = family.member(params.epsilon)?;
    Ok(SuboptimalOutcome { q_prime, params })
}

/// Suboptimal solution for a positive definite received signal covariance,
/// built on the full eigensystem of `Ã` with the subtracted part `Ã/2`.
pub fn suboptimal_pd(eff: &EffectiveDecomposition, p_z: f64) -> Result<SuboptimalOutcome> {
    if !eff.signal_pd {
        return Err(JamError::Domain(
            "received signal covariance is not positive definite; use suboptimal_psd".into(),
        ));
    }
    let e = evd(&eff.a_tilde)?;
    solve_family(&e.vectors, &e.values, eff.a_tilde.scale(0.5), eff, p_z)
}

/// Rank-aware suboptimal solution using only the eigenpairs of `Ã` above the
/// rank tolerance. A vanishing `Ã` gives the zero covariance.
pub fn suboptimal_psd(eff: &EffectiveDecomposition, p_z: f64) -> Result<SuboptimalOutcome> {
    let e = evd(&eff.a_tilde)?;
    let rank = e.numerical_rank();
    if rank == 0 {
        return Ok(SuboptimalOutcome {
            q_prime: Hermitian::zeros(eff.r_z),
            params: EpsilonLambda {
                epsilon: 0.0,
                lambda: None,
            },
        });
    }
    let values = &e.values[..rank];
    let half = spectral_sum(&e.vectors, &values.iter().map(|v| 0.5 * v).collect::<Vec<_>>());
    solve_family(&e.vectors, values, half, eff, p_z)
}
