//! Broadcast channel: one transmitter, several receivers, one jammer.
//!
//! With the receivers' outputs stacked, the sum rate is
//! `log|H Q_s Hᴴ + D + Θ(Q_z)| − log|D + Θ(Q_z)|`, where `D` holds the noise
//! powers and `Θ(Q_z)` is block diagonal with blocks `H_zi Q_z H_ziᴴ`
//! (jamming reaches each receiver separately; receivers do not cooperate
//! beyond the stacked rate bound).

use super::{check_budget, check_covariance, check_noise, check_rows, sequential_solution, zero_solution};
use crate::error::{invalid, Result};
use crate::linalg::{
    block_diagonal, inverse_pd, log_det, log_det_ratio, psd_trace_projection, ComplexMatrix, Hermitian,
};
use crate::scenario::JammerSolution;
use crate::spca::{minimize_split, SpcaOptions, SplitObjective};

#[derive(Clone, Debug)]
pub struct BcReceiver {
    /// Channel from the transmitter (`n_ri × n_t`).
    pub h: ComplexMatrix,
    /// Channel from the jammer (`n_ri × n_z`).
    pub h_z: ComplexMatrix,
    pub noise_power: f64,
}

#[derive(Clone, Debug)]
pub struct BcScenario {
    pub q_s: Hermitian,
    pub receivers: Vec<BcReceiver>,
    pub jam_budget: f64,
}

impl BcScenario {
    pub fn new(q_s: Hermitian, receivers: Vec<BcReceiver>, jam_budget: f64) -> Result<Self> {
        let first = receivers
            .first()
            .ok_or_else(|| invalid("broadcast scenario needs at least one receiver"))?;
        let (n_t, n_z) = (first.h.ncols(), first.h_z.ncols());
        check_covariance(&q_s, n_t, "signal covariance")?;
        for (i, r) in receivers.iter().enumerate() {
            check_rows(&r.h, r.h.nrows(), &format!("receiver {i} channel"))?;
            check_rows(&r.h_z, r.h.nrows(), &format!("receiver {i} jamming channel"))?;
            if r.h.ncols() != n_t || r.h_z.ncols() != n_z {
                return Err(invalid(format!("receiver {i} channel widths are inconsistent")));
            }
            check_noise(r.noise_power, &format!("receiver {i}"))?;
        }
        check_budget(jam_budget)?;
        Ok(Self {
            q_s,
            receivers,
            jam_budget,
        })
    }

    pub fn n_z(&self) -> usize {
        self.receivers[0].h_z.ncols()
    }

    fn stacked_signal(&self) -> Hermitian {
        let h = stack(self.receivers.iter().map(|r| &r.h));
        self.q_s.congruence(&h)
    }

    /// Per-receiver blocks of `D + Θ(Q_z)`.
    fn noise_blocks(&self, q_z: &Hermitian) -> Vec<Hermitian> {
        self.receivers
            .iter()
            .map(|r| q_z.congruence(&r.h_z).shift(r.noise_power))
            .collect()
    }

    /// `Σ_i H_ziᴴ M_ii H_zi` for a matrix `m` partitioned like the stacked
    /// receivers.
    fn pull_back(&self, m: &Hermitian) -> Hermitian {
        let mut at = 0;
        let mut acc = Hermitian::zeros(self.n_z());
        for r in &self.receivers {
            let d = r.h.nrows();
            acc = &acc + &m.principal_block(at, d).adjoint_congruence(&r.h_z);
            at += d;
        }
        acc
    }
}

fn stack<'a>(blocks: impl Iterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let blocks: Vec<&ComplexMatrix> = blocks.collect();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks[0].ncols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Broadcast sum rate under jamming covariance `q_z`.
pub fn bc_rate(bc: &BcScenario, q_z: &Hermitian) -> Result<f64> {
    if q_z.dim() != bc.n_z() {
        return Err(invalid("jamming covariance does not match the jamming channels"));
    }
    let noise = block_diagonal(&bc.noise_blocks(q_z));
    log_det_ratio(&noise, &bc.stacked_signal())
}

struct BcProblem<'a> {
    bc: &'a BcScenario,
    signal: Hermitian,
}

impl BcProblem<'_> {
    fn noise(&self, x: &[Hermitian]) -> Hermitian {
        block_diagonal(&self.bc.noise_blocks(&x[0]))
    }
}

impl SplitObjective for BcProblem<'_> {
    fn value(&self, x: &[Hermitian]) -> Result<f64> {
        log_det_ratio(&self.noise(x), &self.signal)
    }

    fn concave_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        let g = inverse_pd(&(&self.noise(x) + &self.signal))?;
        Ok(vec![self.bc.pull_back(&g)])
    }

    fn convex_value(&self, x: &[Hermitian]) -> Result<f64> {
        self.bc
            .noise_blocks(&x[0])
            .iter()
            .try_fold(0.0, |acc, b| Ok(acc - log_det(b)?))
    }

    fn convex_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        let inverses = self
            .bc
            .noise_blocks(&x[0])
            .iter()
            .map(inverse_pd)
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![-&self.bc.pull_back(&block_diagonal(&inverses))])
    }

    fn project(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        Ok(vec![psd_trace_projection(&x[0], self.bc.jam_budget)?])
    }
}

/// Jamming covariance minimizing the broadcast sum rate, by sequential
/// convex approximation from uniform power.
pub fn bc_solve(bc: &BcScenario, opts: &SpcaOptions) -> Result<JammerSolution> {
    let n_z = bc.n_z();
    if bc.jam_budget == 0.0 {
        return Ok(zero_solution(n_z, bc_rate(bc, &Hermitian::zeros(n_z))?));
    }
    let problem = BcProblem {
        bc,
        signal: bc.stacked_signal(),
    };
    let init = vec![Hermitian::scaled_identity(n_z, bc.jam_budget / n_z as f64)];
    let (x, trace) = minimize_split(&problem, init, opts)?;
    let q_z = x.into_iter().next().expect("one block");
    let rate = bc_rate(bc, &q_z)?;
    Ok(sequential_solution(q_z, rate, &trace))
}
