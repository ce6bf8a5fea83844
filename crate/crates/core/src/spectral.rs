//! Closed-form jamming covariances and the dispatcher that falls back to the
//! iterative or suboptimal solvers.
//!
//! All closed forms share one scalar map. For an eigenvalue `a ≥ 0` of the
//! effective signal matrix and a multiplier `λ > 0`, the power-plus-noise
//! level on that eigen-direction is
//!
//! ```text
//! d(a, λ) = sqrt(a/λ + a²/4) − a/2
//! ```
//!
//! which is strictly decreasing in `λ`. Each solver picks `λ` so that the
//! trace of the resulting covariance meets the power budget.

use crate::error::{JamError, Result};
use crate::linalg::{evd, is_psd, spectral_sum, Eigensystem, Hermitian};
use crate::scenario::{
    effective_quantities, rate_single, unjammed_rate, Diagnostics, EffectiveDecomposition,
    JammerSolution, JammingScenario, Method,
};
use crate::spca::{spca_iterate, SpcaOptions};
use crate::suboptimal::{suboptimal_pd, suboptimal_psd};

/// Tolerance of the PSD test applied to closed-form candidates.
pub const PSD_TOL: f64 = 1e-9;

/// `sqrt(a/λ + a²/4) − a/2`, evaluated without cancellation.
pub fn waterfill_term(a: f64, lambda: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let r = a / lambda;
    r / ((r + 0.25 * a * a).sqrt() + 0.5 * a)
}

/// Finds `λ > 0` with `f(λ) = target` for a continuous decreasing `f`.
///
/// The bracket starts at `[ε_machine, 1]`; the lower end shrinks and the upper
/// end doubles until it straddles the target. Bisection runs in log space.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    let mut lo = f64::EPSILON;
    while f(lo) < target {
        lo *= 1e-4;
        if lo < 1e-300 {
            return Err(JamError::Domain(format!(
                "multiplier equation cannot reach target {target}"
            )));
        }
    }
    let mut hi = 1.0_f64;
    while f(hi) >= target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(JamError::Domain(format!(
                "multiplier equation stays above target {target}"
            )));
        }
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo), f(hi));
    Ok(if (flo - target).abs() <= (fhi - target).abs() {
        lo
    } else {
        hi
    })
}

/// Multiplier with `Σ_i d(a_i, λ) = target`.
pub fn solve_multiplier(eigenvalues: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0) || !eigenvalues.iter().any(|&a| a > 0.0) {
        return Err(JamError::Domain(
            "multiplier needs a positive target and a positive eigenvalue".into(),
        ));
    }
    bisect_decreasing(
        |l| eigenvalues.iter().map(|&a| waterfill_term(a, l)).sum(),
        target,
    )
}

/// Minimizer of `log|I + A X⁻¹|` over `X ≻ 0` with `Tr X = 1`.
#[derive(Clone, Debug)]
pub struct Lemma1Solution {
    pub x: Hermitian,
    pub lambda: f64,
}

/// Unit-trace minimizer of `log|I + A X⁻¹|` for positive definite `a`:
/// `X = U·sqrt(Λ/λ + Λ²/4)·Uᴴ − A/2`.
pub fn lemma1_minimize(a: &Hermitian) -> Result<Lemma1Solution> {
    let e = evd(a)?;
    require_pd(&e, "matrix")?;
    let lambda = solve_multiplier(&e.values, 1.0)?;
    let root = e.map(|v| (v / lambda + 0.25 * v * v).sqrt());
    Ok(Lemma1Solution {
        x: &root - &a.scale(0.5),
        lambda,
    })
}

fn require_pd(e: &Eigensystem, what: &str) -> Result<()> {
    if e.dim() > 0 && e.min_value() > crate::linalg::RANK_TOL * e.max_value() && e.max_value() > 0.0 {
        Ok(())
    } else {
        Err(JamError::Domain(format!("{what} is not positive definite")))
    }
}

/// A closed-form reduced covariance, returned whether or not it is PSD.
#[derive(Clone, Debug)]
pub struct ClosedFormOutcome {
    pub q_prime: Hermitian,
    /// `None` when the effective signal matrix vanishes and no power is spent.
    pub lambda: Option<f64>,
    pub psd_ok: bool,
    /// `log|I + Ã(Q' + D₀)⁻¹|` evaluated on the eigen-directions of `Ã`,
    /// well defined even when `q_prime` is indefinite.
    pub r_bar_unconstrained: f64,
}

/// Closed form for a positive definite received signal covariance:
/// `Q' = U·sqrt(Λ/λ + Λ²/4)·Uᴴ − Ω⁻¹(B̃/2 + σ²I)Ω⁻ᴴ` over the eigensystem of `Ã`.
pub fn closed_form_pd(eff: &EffectiveDecomposition, p_z: f64) -> Result<ClosedFormOutcome> {
    if !eff.signal_pd {
        return Err(JamError::Domain(
            "received signal covariance is not positive definite; use closed_form_psd".into(),
        ));
    }
    let e = evd(&eff.a_tilde)?;
    let lambda = solve_multiplier(&e.values, p_z + eff.d0.trace())?;
    let root = e.map(|v| (v / lambda + 0.25 * v * v).sqrt());
    let sigma2 = eff.noise_power;
    let inv_omega: Vec<f64> = eff.omega_plus.iter().map(|w| 1.0 / w).collect();
    let shaped = eff
        .b_tilde
        .scale(0.5)
        .shift(sigma2)
        .congruence(&Hermitian::from_real_diagonal(&inv_omega).into_matrix());
    let q_prime = &root - &shaped;
    outcome(q_prime, Some(lambda), &e.values, e.dim())
}

/// Closed form for a possibly singular received signal covariance, using only
/// the `r` eigenpairs of `Ã` above the rank tolerance:
/// `Q' = U₁·sqrt(Λ₊/λ + Λ₊²/4)·U₁ᴴ − ½U₁Λ₊U₁ᴴ − σ²Ω⁻¹Ω⁻ᴴ`.
pub fn closed_form_psd(eff: &EffectiveDecomposition, p_z: f64) -> Result<ClosedFormOutcome> {
    let e = evd(&eff.a_tilde)?;
    let rank = e.numerical_rank();
    if rank == 0 {
        return Ok(ClosedFormOutcome {
            q_prime: Hermitian::zeros(eff.r_z),
            lambda: None,
            psd_ok: true,
            r_bar_unconstrained: 0.0,
        });
    }
    let positive = &e.values[..rank];
    let lambda = solve_multiplier(positive, p_z + eff.d0.trace())?;
    let root: Vec<f64> = positive
        .iter()
        .map(|&v| (v / lambda + 0.25 * v * v).sqrt())
        .collect();
    let half: Vec<f64> = positive.iter().map(|&v| 0.5 * v).collect();
    let q_prime = &(&spectral_sum(&e.vectors, &root) - &spectral_sum(&e.vectors, &half)) - &eff.d0;
    outcome(q_prime, Some(lambda), positive, rank)
}

fn outcome(
    q_prime: Hermitian,
    lambda: Option<f64>,
    values: &[f64],
    rank: usize,
) -> Result<ClosedFormOutcome> {
    let psd_ok = is_psd(&q_prime, PSD_TOL)?;
    let r_bar_unconstrained = match lambda {
        Some(l) => values[..rank]
            .iter()
            .filter(|&&a| a > 0.0)
            .map(|&a| (a / waterfill_term(a, l)).ln_1p())
            .sum(),
        None => 0.0,
    };
    Ok(ClosedFormOutcome {
        q_prime,
        lambda,
        psd_ok,
        r_bar_unconstrained,
    })
}

/// Reduced covariance and multiplier for a jamming channel equal to the
/// identity.
#[derive(Clone, Debug)]
pub struct IdentityChannelSolution {
    pub q_prime: Hermitian,
    pub lambda: Option<f64>,
}

/// Solution when the jammer reaches every receive antenna through an identity
/// channel: `Q' = U_B·(sqrt(Λ/λ + Λ²/4) − Λ/2 − σ²)₊·U_Bᴴ`, with `λ` chosen so
/// the clamped trace equals `p_z`. A zero `b` gets the uniform allocation.
pub fn identity_channel_solution(
    b: &Hermitian,
    noise_power: f64,
    p_z: f64,
) -> Result<IdentityChannelSolution> {
    let n = b.dim();
    let e = evd(b)?;
    if e.max_value() <= 0.0 {
        return Ok(IdentityChannelSolution {
            q_prime: Hermitian::scaled_identity(n, p_z / n as f64),
            lambda: None,
        });
    }
    if p_z <= 0.0 {
        return Ok(IdentityChannelSolution {
            q_prime: Hermitian::zeros(n),
            lambda: None,
        });
    }
    let values: Vec<f64> = e.values.iter().map(|&v| v.max(0.0)).collect();
    let powers_at = |l: f64| -> Vec<f64> {
        values
            .iter()
            .map(|&a| (waterfill_term(a, l) - noise_power).max(0.0))
            .collect()
    };
    let lambda = bisect_decreasing(|l| powers_at(l).iter().sum(), p_z)?;
    Ok(IdentityChannelSolution {
        q_prime: spectral_sum(&e.vectors, &powers_at(lambda)),
        lambda: Some(lambda),
    })
}

/// Solver used when the closed form is indefinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fallback {
    Spca,
    Suboptimal,
}

/// Best available jamming covariance for `sc`.
///
/// Tries the closed form that matches the definiteness of the received
/// signal covariance; if the candidate is PSD it is optimal, otherwise the
/// `prefer`red fallback runs on the same reduced problem.
pub fn solve_single(
    sc: &JammingScenario,
    prefer: Fallback,
    opts: &SpcaOptions,
) -> Result<JammerSolution> {
    if sc.jam_budget == 0.0 {
        return zero_solution(sc);
    }
    let eff = match effective_quantities(sc) {
        Ok(eff) => eff,
        Err(JamError::DegenerateChannel) => return zero_solution(sc),
        Err(e) => return Err(e),
    };
    let p_z = sc.jam_budget;
    let cf = if eff.signal_pd {
        closed_form_pd(&eff, p_z)?
    } else {
        closed_form_psd(&eff, p_z)?
    };
    let mut diagnostics = Diagnostics {
        lambda: cf.lambda,
        psd_condition_held: Some(cf.psd_ok),
        converged: true,
        ..Diagnostics::default()
    };
    let (q_prime, method) = if cf.psd_ok {
        (cf.q_prime, Method::ClosedForm)
    } else {
        match prefer {
            Fallback::Spca => {
                let (q, trace) = spca_iterate(&eff, p_z, opts)?;
                diagnostics.iterations = trace.iterations;
                diagnostics.kkt_residual = Some(trace.kkt_residual);
                diagnostics.converged = trace.converged;
                (q, Method::Spca)
            }
            Fallback::Suboptimal => {
                let sub = if eff.signal_pd {
                    suboptimal_pd(&eff, p_z)?
                } else {
                    suboptimal_psd(&eff, p_z)?
                };
                diagnostics.lambda = sub.params.lambda;
                diagnostics.epsilon = Some(sub.params.epsilon);
                (sub.q_prime, Method::Suboptimal)
            }
        }
    };
    let q_z = eff.assemble_qz(&q_prime);
    let rate = rate_single(sc, &q_z)?;
    Ok(JammerSolution {
        q_z,
        rate,
        method,
        diagnostics,
    })
}

fn zero_solution(sc: &JammingScenario) -> Result<JammerSolution> {
    Ok(JammerSolution {
        q_z: Hermitian::zeros(sc.n_z()),
        rate: unjammed_rate(sc)?,
        method: Method::Zero,
        diagnostics: Diagnostics {
            converged: true,
            ..Diagnostics::default()
        },
    })
}
