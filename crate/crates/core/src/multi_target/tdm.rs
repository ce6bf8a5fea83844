//! Time-multiplexed pairs sharing one jammer.
//!
//! Pair `i` is active for a fraction `β_i` of the time and is jammed with its
//! own covariance `Q_zi` during its slot. The sum rate is
//! `Σ β_i·R_i(Q_zi)` and the average power constraint is
//! `Σ β_i·Tr Q_zi ≤ P_z`. Writing `β_i·Tr Q_zi = ρ_i·P_z`, the shares `ρ`
//! live on the unit simplex.

use super::{check_budget, check_covariance, check_noise, check_rows};
use crate::error::{invalid, JamError, Result};
use crate::linalg::{
    evd, inverse_pd, log_det, log_det_ratio, project_weighted_capped_simplex, spectral_sum,
    ComplexMatrix, Hermitian,
};
use crate::scenario::{effective_quantities, rate_single, unjammed_rate, JammingScenario};
use crate::spca::{minimize_split, spca_iterate_from, SpcaOptions, SplitObjective};
use crate::spectral::{closed_form_pd, closed_form_psd};

#[derive(Clone, Debug)]
pub struct TdmPair {
    pub h: ComplexMatrix,
    pub q: Hermitian,
    pub h_z: ComplexMatrix,
    pub noise_power: f64,
    /// Fraction of time this pair is active.
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct TdmScenario {
    pub pairs: Vec<TdmPair>,
    pub jam_budget: f64,
}

#[derive(Clone, Debug)]
pub struct TdmSolution {
    pub q_z: Vec<Hermitian>,
    /// Share of the jamming budget spent on each pair.
    pub rho: Vec<f64>,
    pub sum_rate: f64,
    pub converged: bool,
}

impl TdmScenario {
    pub fn new(pairs: Vec<TdmPair>, jam_budget: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("time-multiplexed scenario needs at least one pair"));
        }
        for (i, p) in pairs.iter().enumerate() {
            check_rows(&p.h, p.h.nrows(), &format!("pair {i} channel"))?;
            check_rows(&p.h_z, p.h.nrows(), &format!("pair {i} jamming channel"))?;
            check_covariance(&p.q, p.h.ncols(), &format!("pair {i} covariance"))?;
            check_noise(p.noise_power, &format!("pair {i}"))?;
            if !(p.beta > 0.0) {
                return Err(invalid(format!("pair {i} time fraction must be positive")));
            }
        }
        let total: f64 = pairs.iter().map(|p| p.beta).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("time fractions sum to {total}, expected 1")));
        }
        check_budget(jam_budget)?;
        Ok(Self { pairs, jam_budget })
    }

    /// Pair `i` as a single-link scenario with its own jamming budget.
    pub fn pair_scenario(&self, i: usize, budget: f64) -> Result<JammingScenario> {
        let p = &self.pairs[i];
        JammingScenario::new(p.h.clone(), p.q.clone(), p.h_z.clone(), p.noise_power, budget)
    }

    fn shares(&self, q_list: &[Hermitian]) -> Vec<f64> {
        let loads: Vec<f64> = self
            .pairs
            .iter()
            .zip(q_list)
            .map(|(p, q)| p.beta * q.trace().max(0.0))
            .collect();
        let total: f64 = loads.iter().sum();
        if total > 0.0 {
            loads.iter().map(|l| l / total).collect()
        } else {
            vec![1.0 / self.pairs.len() as f64; self.pairs.len()]
        }
    }
}

/// Time-averaged sum rate `Σ β_i·R_i(Q_zi)`.
pub fn tdm_rate(tdm: &TdmScenario, q_list: &[Hermitian]) -> Result<f64> {
    if q_list.len() != tdm.pairs.len() {
        return Err(invalid("one jamming covariance per pair is required"));
    }
    let mut total = 0.0;
    for (i, (p, q)) in tdm.pairs.iter().zip(q_list).enumerate() {
        total += p.beta * rate_single(&tdm.pair_scenario(i, 0.0)?, q)?;
    }
    Ok(total)
}

/// Enumerates all compositions of `steps` into `parts` nonnegative integers.
fn compositions(steps: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![steps]];
    }
    (0..=steps)
        .flat_map(|k| {
            compositions(steps - k, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

/// Best power split on the simplex grid with spacing `1/grid_steps`.
///
/// Each pair is solved independently, with the closed form where it applies,
/// for every share it can receive; the grid search then only adds up cached
/// rates.
pub fn tdm_solve_grid(tdm: &TdmScenario, grid_steps: usize, opts: &SpcaOptions) -> Result<TdmSolution> {
    if grid_steps < 1 {
        return Err(invalid("grid needs at least one step"));
    }
    let m = tdm.pairs.len();
    let cache = (0..m)
        .map(|i| budget_path(tdm, i, grid_steps, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for split in compositions(grid_steps, m) {
        let rate: f64 = split.iter().enumerate().map(|(i, &k)| cache[i][k].0).sum();
        if best.as_ref().is_none_or(|(r, _)| rate < *r) {
            best = Some((rate, split));
        }
    }
    let (sum_rate, split) = best.expect("at least one composition");
    Ok(TdmSolution {
        q_z: split.iter().enumerate().map(|(i, &k)| cache[i][k].1.clone()).collect(),
        rho: split.iter().map(|&k| k as f64 / grid_steps as f64).collect(),
        sum_rate,
        converged: split.iter().enumerate().all(|(i, &k)| cache[i][k].2),
    })
}

/// Weighted optimal rate, covariance and convergence flag of pair `i` at
/// every grid share `k / grid_steps` of the budget. The decomposition is
/// shared along the path and each iterative solve starts from the previous
/// share's solution.
fn budget_path(
    tdm: &TdmScenario,
    i: usize,
    grid_steps: usize,
    opts: &SpcaOptions,
) -> Result<Vec<(f64, Hermitian, bool)>> {
    let p = &tdm.pairs[i];
    let sc = tdm.pair_scenario(i, 0.0)?;
    let n_z = sc.n_z();
    let unjammed = (p.beta * unjammed_rate(&sc)?, Hermitian::zeros(n_z), true);
    let eff = match effective_quantities(&sc) {
        Ok(eff) => eff,
        Err(JamError::DegenerateChannel) => return Ok(vec![unjammed; grid_steps + 1]),
        Err(e) => return Err(e),
    };
    let mut row = Vec::with_capacity(grid_steps + 1);
    row.push(unjammed);
    let mut warm = Hermitian::zeros(eff.r_z);
    let mut previous = 0.0;
    for k in 1..=grid_steps {
        let budget = k as f64 / grid_steps as f64 * tdm.jam_budget / p.beta;
        let cf = if eff.signal_pd {
            closed_form_pd(&eff, budget)?
        } else {
            closed_form_psd(&eff, budget)?
        };
        let (q_prime, converged) = if cf.psd_ok {
            (cf.q_prime, true)
        } else {
            let init = warm.shift((budget - previous) / eff.r_z as f64);
            let (q, trace) = spca_iterate_from(&eff, budget, init, opts)?;
            (q, trace.converged)
        };
        let q_z = eff.assemble_qz(&q_prime);
        row.push((p.beta * rate_single(&sc, &q_z)?, q_z, converged));
        warm = q_prime;
        previous = budget;
    }
    Ok(row)
}

struct TdmProblem<'a> {
    tdm: &'a TdmScenario,
    signals: Vec<Hermitian>,
}

impl TdmProblem<'_> {
    fn noise(&self, i: usize, q: &Hermitian) -> Hermitian {
        let p = &self.tdm.pairs[i];
        q.congruence(&p.h_z).shift(p.noise_power)
    }
}

impl SplitObjective for TdmProblem<'_> {
    fn value(&self, x: &[Hermitian]) -> Result<f64> {
        let mut total = 0.0;
        for (i, q) in x.iter().enumerate() {
            total += self.tdm.pairs[i].beta * log_det_ratio(&self.noise(i, q), &self.signals[i])?;
        }
        Ok(total)
    }

    fn concave_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        x.iter()
            .enumerate()
            .map(|(i, q)| {
                let p = &self.tdm.pairs[i];
                let g = inverse_pd(&(&self.noise(i, q) + &self.signals[i]))?;
                Ok(g.adjoint_congruence(&p.h_z).scale(p.beta))
            })
            .collect()
    }

    fn convex_value(&self, x: &[Hermitian]) -> Result<f64> {
        let mut total = 0.0;
        for (i, q) in x.iter().enumerate() {
            total -= self.tdm.pairs[i].beta * log_det(&self.noise(i, q))?;
        }
        Ok(total)
    }

    fn convex_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        x.iter()
            .enumerate()
            .map(|(i, q)| {
                let p = &self.tdm.pairs[i];
                let k = inverse_pd(&self.noise(i, q))?;
                Ok(k.adjoint_congruence(&p.h_z).scale(-p.beta))
            })
            .collect()
    }

    /// Projection onto `{Q_i ⪰ 0, Σ β_i Tr Q_i ≤ P_z}`: eigenvalues of all
    /// blocks share one water level, scaled per block by `β_i`.
    fn project(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        let systems = x.iter().map(evd).collect::<Result<Vec<_>>>()?;
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (e, p) in systems.iter().zip(&self.tdm.pairs) {
            values.extend_from_slice(&e.values);
            weights.extend(std::iter::repeat_n(p.beta, e.dim()));
        }
        let projected = project_weighted_capped_simplex(&values, &weights, self.tdm.jam_budget);
        let mut at = 0;
        Ok(systems
            .iter()
            .map(|e| {
                let block = spectral_sum(&e.vectors, &projected[at..at + e.dim()]);
                at += e.dim();
                block
            })
            .collect())
    }
}

/// Joint sequential convex approximation over all pairs' covariances under
/// the shared average power constraint, started from an even split.
pub fn tdm_solve_joint(tdm: &TdmScenario, opts: &SpcaOptions) -> Result<TdmSolution> {
    let m = tdm.pairs.len();
    let problem = TdmProblem {
        tdm,
        signals: tdm.pairs.iter().map(|p| p.q.congruence(&p.h)).collect(),
    };
    let init: Vec<Hermitian> = tdm
        .pairs
        .iter()
        .map(|p| {
            let n = p.h_z.ncols();
            Hermitian::scaled_identity(n, tdm.jam_budget / (m as f64 * p.beta * n as f64))
        })
        .collect();
    let (q_z, trace) = minimize_split(&problem, init, opts)?;
    let sum_rate = tdm_rate(tdm, &q_z)?;
    Ok(TdmSolution {
        rho: tdm.shares(&q_z),
        q_z,
        sum_rate,
        converged: trace.converged,
    })
}
