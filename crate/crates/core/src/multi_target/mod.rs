//! Jamming several legitimate links at once.
//!
//! * [`mac`]: many transmitters, one receiver; reduces exactly to the
//!   single-link problem.
//! * [`bc`]: one transmitter, several receivers; minimizes the sum rate with
//!   the sequential solver.
//! * [`tdm`]: time-multiplexed pairs sharing the jamming budget across time
//!   slots.
//! * [`ic`]: simultaneously active pairs that interfere with each other,
//!   jammed by one shared covariance.

pub mod bc;
pub mod ic;
pub mod mac;
pub mod tdm;

pub use bc::{bc_rate, bc_solve, BcReceiver, BcScenario};
pub use ic::{ic_rate, ic_solve, CrossChannel, IcLink, IcScenario};
pub use mac::{mac_rate, mac_reduce, MacLink, MacScenario};
pub use tdm::{tdm_rate, tdm_solve_grid, tdm_solve_joint, TdmPair, TdmScenario, TdmSolution};

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, Hermitian};
use crate::scenario::{Diagnostics, JammerSolution, Method};
use crate::spca::SpcaTrace;

pub(crate) fn check_budget(jam_budget: f64) -> Result<()> {
    if jam_budget >= 0.0 && jam_budget.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("jamming budget must be nonnegative, got {jam_budget}")))
    }
}

pub(crate) fn check_noise(noise_power: f64, what: &str) -> Result<()> {
    if noise_power > 0.0 && noise_power.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what}: noise power must be positive, got {noise_power}")))
    }
}

pub(crate) fn check_rows(m: &ComplexMatrix, rows: usize, what: &str) -> Result<()> {
    if m.nrows() != rows {
        return Err(invalid(format!("{what} has {} rows, expected {rows}", m.nrows())));
    }
    if !crate::linalg::all_finite(m) {
        return Err(invalid(format!("{what} has non-finite entries")));
    }
    Ok(())
}

pub(crate) fn check_covariance(q: &Hermitian, dim: usize, what: &str) -> Result<()> {
    if q.dim() != dim {
        return Err(invalid(format!("{what} is {0}x{0}, expected {dim}x{dim}", q.dim())));
    }
    if !crate::linalg::is_psd(q, 1e-9)? {
        return Err(invalid(format!("{what} is not positive semidefinite")));
    }
    Ok(())
}

pub(crate) fn sequential_solution(q_z: Hermitian, rate: f64, trace: &SpcaTrace) -> JammerSolution {
    JammerSolution {
        q_z,
        rate,
        method: Method::Spca,
        diagnostics: Diagnostics {
            iterations: trace.iterations,
            kkt_residual: Some(trace.kkt_residual),
            converged: trace.converged,
            ..Diagnostics::default()
        },
    }
}

pub(crate) fn zero_solution(n_z: usize, rate: f64) -> JammerSolution {
    JammerSolution {
        q_z: Hermitian::zeros(n_z),
        rate,
        method: Method::Zero,
        diagnostics: Diagnostics {
            converged: true,
            ..Diagnostics::default()
        },
    }
}
