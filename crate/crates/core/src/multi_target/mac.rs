//! Multiple-access channel: several transmitters, one jammed receiver.
//!
//! The sum rate depends on the transmitters only through the aggregate
//! received covariance `Σ H_i Q_i H_iᴴ`, so the problem is a single-link
//! problem with an equivalent channel.

use super::{check_budget, check_covariance, check_noise, check_rows};
use crate::error::{invalid, Result};
use crate::linalg::{evd, log_det_ratio, ComplexMatrix, Hermitian};
use crate::scenario::JammingScenario;

#[derive(Clone, Debug)]
pub struct MacLink {
    /// Channel from this transmitter to the common receiver (`n_r × n_t`).
    pub h: ComplexMatrix,
    pub q: Hermitian,
}

#[derive(Clone, Debug)]
pub struct MacScenario {
    pub links: Vec<MacLink>,
    pub h_z: ComplexMatrix,
    pub noise_power: f64,
    pub jam_budget: f64,
}

impl MacScenario {
    pub fn new(links: Vec<MacLink>, h_z: ComplexMatrix, noise_power: f64, jam_budget: f64) -> Result<Self> {
        if links.is_empty() {
            return Err(invalid("multiple-access scenario needs at least one link"));
        }
        let n_r = h_z.nrows();
        check_rows(&h_z, n_r, "jamming channel")?;
        for (i, l) in links.iter().enumerate() {
            check_rows(&l.h, n_r, &format!("link {i} channel"))?;
            check_covariance(&l.q, l.h.ncols(), &format!("link {i} covariance"))?;
        }
        check_noise(noise_power, "multiple-access receiver")?;
        check_budget(jam_budget)?;
        Ok(Self {
            links,
            h_z,
            noise_power,
            jam_budget,
        })
    }

    /// `Σ H_i Q_i H_iᴴ`.
    pub fn aggregate_signal(&self) -> Hermitian {
        let n_r = self.h_z.nrows();
        self.links
            .iter()
            .fold(Hermitian::zeros(n_r), |acc, l| &acc + &l.q.congruence(&l.h))
    }
}

/// Sum rate `log|I + (Σ H_i Q_i H_iᴴ)(H_z Q_z H_zᴴ + σ²I)⁻¹|`.
pub fn mac_rate(mac: &MacScenario, q_z: &Hermitian) -> Result<f64> {
    if q_z.dim() != mac.h_z.ncols() {
        return Err(invalid("jamming covariance does not match the jamming channel"));
    }
    let interference = q_z.congruence(&mac.h_z).shift(mac.noise_power);
    log_det_ratio(&interference, &mac.aggregate_signal())
}

/// Equivalent single-link scenario with channel `U·Λ^{1/2}` and identity
/// signal covariance, where `UΛUᴴ` is the aggregate received covariance.
pub fn mac_reduce(mac: &MacScenario) -> Result<JammingScenario> {
    let s = mac.aggregate_signal();
    let e = evd(&s)?;
    let n_r = s.dim();
    let mut h_r = e.vectors.clone();
    for (j, &v) in e.values.iter().enumerate() {
        h_r.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    JammingScenario::new(h_r, Hermitian::identity(n_r), mac.h_z.clone(), mac.noise_power, mac.jam_budget)
}
