//! Interference network: simultaneously active pairs, each receiver hearing
//! the other transmitters, all jammed by one shared covariance.
//!
//! Receiver `i` sees noise plus interference
//! `N_i = σ_i²I + Σ_{j≠i} H_ji Q_j H_jiᴴ`, which does not depend on the
//! jammer, so the sum rate is a sum of single-link rates with colored noise.

use super::{check_budget, check_covariance, check_noise, check_rows, sequential_solution, zero_solution};
use crate::error::{invalid, Result};
use crate::linalg::{inverse_pd, log_det, log_det_ratio, psd_trace_projection, ComplexMatrix, Hermitian};
use crate::scenario::JammerSolution;
use crate::spca::{minimize_split, SpcaOptions, SplitObjective};

#[derive(Clone, Debug)]
pub struct IcLink {
    /// Direct channel of the pair (`n_ri × n_ti`).
    pub h: ComplexMatrix,
    pub q: Hermitian,
    /// Channel from the jammer to this receiver (`n_ri × n_z`).
    pub h_z: ComplexMatrix,
    pub noise_power: f64,
}

/// A cross channel from transmitter `from` to receiver `to`.
#[derive(Clone, Debug)]
pub struct CrossChannel {
    pub from: usize,
    pub to: usize,
    pub h: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct IcScenario {
    pub links: Vec<IcLink>,
    /// Cross channels; missing `(from, to)` pairs are zero.
    pub cross: Vec<CrossChannel>,
    pub jam_budget: f64,
}

impl IcScenario {
    pub fn new(links: Vec<IcLink>, cross: Vec<CrossChannel>, jam_budget: f64) -> Result<Self> {
        let first = links
            .first()
            .ok_or_else(|| invalid("interference scenario needs at least one link"))?;
        let n_z = first.h_z.ncols();
        for (i, l) in links.iter().enumerate() {
            check_rows(&l.h_z, l.h.nrows(), &format!("link {i} jamming channel"))?;
            check_covariance(&l.q, l.h.ncols(), &format!("link {i} covariance"))?;
            check_noise(l.noise_power, &format!("link {i}"))?;
            if l.h_z.ncols() != n_z {
                return Err(invalid(format!("link {i} jamming channel width differs")));
            }
        }
        for c in &cross {
            if c.from >= links.len() || c.to >= links.len() || c.from == c.to {
                return Err(invalid(format!("invalid cross channel {} -> {}", c.from, c.to)));
            }
            let what = format!("cross channel {} -> {}", c.from, c.to);
            check_rows(&c.h, links[c.to].h.nrows(), &what)?;
            if c.h.ncols() != links[c.from].h.ncols() {
                return Err(invalid(format!("{what} width does not match transmitter {}", c.from)));
            }
        }
        check_budget(jam_budget)?;
        Ok(Self {
            links,
            cross,
            jam_budget,
        })
    }

    pub fn n_z(&self) -> usize {
        self.links[0].h_z.ncols()
    }

    /// `σ_i²I + Σ_{j≠i} H_ji Q_j H_jiᴴ` for every receiver.
    fn interference_plus_noise(&self) -> Vec<Hermitian> {
        let mut out: Vec<Hermitian> = self
            .links
            .iter()
            .map(|l| Hermitian::scaled_identity(l.h.nrows(), l.noise_power))
            .collect();
        for c in &self.cross {
            out[c.to] = &out[c.to] + &self.links[c.from].q.congruence(&c.h);
        }
        out
    }
}

struct IcProblem<'a> {
    ic: &'a IcScenario,
    offsets: Vec<Hermitian>,
    signals: Vec<Hermitian>,
}

impl IcProblem<'_> {
    fn new(ic: &IcScenario) -> IcProblem<'_> {
        IcProblem {
            ic,
            offsets: ic.interference_plus_noise(),
            signals: ic.links.iter().map(|l| l.q.congruence(&l.h)).collect(),
        }
    }

    fn noise(&self, i: usize, q_z: &Hermitian) -> Hermitian {
        &self.offsets[i] + &q_z.congruence(&self.ic.links[i].h_z)
    }

    fn rate(&self, q_z: &Hermitian) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.ic.links.len() {
            total += log_det_ratio(&self.noise(i, q_z), &self.signals[i])?;
        }
        Ok(total)
    }
}

impl SplitObjective for IcProblem<'_> {
    fn value(&self, x: &[Hermitian]) -> Result<f64> {
        self.rate(&x[0])
    }

    fn concave_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        let mut acc = Hermitian::zeros(self.ic.n_z());
        for (i, l) in self.ic.links.iter().enumerate() {
            let g = inverse_pd(&(&self.noise(i, &x[0]) + &self.signals[i]))?;
            acc = &acc + &g.adjoint_congruence(&l.h_z);
        }
        Ok(vec![acc])
    }

    fn convex_value(&self, x: &[Hermitian]) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.ic.links.len() {
            total -= log_det(&self.noise(i, &x[0]))?;
        }
        Ok(total)
    }

    fn convex_gradient(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        let mut acc = Hermitian::zeros(self.ic.n_z());
        for (i, l) in self.ic.links.iter().enumerate() {
            let k = inverse_pd(&self.noise(i, &x[0]))?;
            acc = &acc - &k.adjoint_congruence(&l.h_z);
        }
        Ok(vec![acc])
    }

    fn project(&self, x: &[Hermitian]) -> Result<Vec<Hermitian>> {
        Ok(vec![psd_trace_projection(&x[0], self.ic.jam_budget)?])
    }
}

/// Sum rate of the interference network under jamming covariance `q_z`.
pub fn ic_rate(ic: &IcScenario, q_z: &Hermitian) -> Result<f64> {
    if q_z.dim() != ic.n_z() {
        return Err(invalid("jamming covariance does not match the jamming channels"));
    }
    IcProblem::new(ic).rate(q_z)
}

/// Shared jamming covariance minimizing the interference-network sum rate,
/// by sequential convex approximation from uniform power.
pub fn ic_solve(ic: &IcScenario, opts: &SpcaOptions) -> Result<JammerSolution> {
    let n_z = ic.n_z();
    if ic.jam_budget == 0.0 {
        return Ok(zero_solution(n_z, ic_rate(ic, &Hermitian::zeros(n_z))?));
    }
    let problem = IcProblem::new(ic);
    let init = vec![Hermitian::scaled_identity(n_z, ic.jam_budget / n_z as f64)];
    let (x, trace) = minimize_split(&problem, init, opts)?;
    let q_z = x.into_iter().next().expect("one block");
    let rate = problem.rate(&q_z)?;
    Ok(sequential_solution(q_z, rate, &trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::scenario::{rate_single, JammingScenario};
    use crate::spectral::{solve_single, Fallback};
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

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, C64::new(x, 0.0))
    }

    fn random_link(rng: &mut ChaCha8Rng, n: usize, n_z: usize) -> IcLink {
        IcLink {
            h: cmat(rng, n, n),
            q: Hermitian::identity(n),
            h_z: cmat(rng, n, n_z),
            noise_power: 1.0,
        }
    }

    #[test]
    fn single_link_matches_single_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let l = random_link(&mut rng, 3, 2);
        let ic = IcScenario::new(vec![l.clone()], vec![], 1.0).unwrap();
        let sc = JammingScenario::new(l.h, l.q, l.h_z, 1.0, 1.0).unwrap();
        let q = Hermitian::gram(&cmat(&mut rng, 2, 2));
        assert!((ic_rate(&ic, &q).unwrap() - rate_single(&sc, &q).unwrap()).abs() < 1e-12);
        let opts = SpcaOptions::default();
        let a = ic_solve(&ic, &opts).unwrap();
        let b = solve_single(&sc, Fallback::Spca, &opts).unwrap();
        assert!((a.rate - b.rate).abs() < 1e-6);
    }

    #[test]
    fn rate_matches_direct_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let links = vec![random_link(&mut rng, 2, 3), random_link(&mut rng, 3, 3)];
        let cross = vec![
            CrossChannel { from: 0, to: 1, h: cmat(&mut rng, 3, 2) },
            CrossChannel { from: 1, to: 0, h: cmat(&mut rng, 2, 3) },
        ];
        let ic = IcScenario::new(links.clone(), cross.clone(), 1.0).unwrap();
        let q = Hermitian::gram(&cmat(&mut rng, 3, 3));
        let term = |i: usize, j: usize, c: &ComplexMatrix| {
            let n = links[j].q.congruence(c);
            let k = &(&q.congruence(&links[i].h_z) + &n).shift(1.0);
            let s = links[i].q.congruence(&links[i].h);
            log_det(&(k + &s)).unwrap() - log_det(k).unwrap()
        };
        let oracle = term(0, 1, &cross[1].h) + term(1, 0, &cross[0].h);
        assert!((ic_rate(&ic, &q).unwrap() - oracle).abs() < 1e-12);
        let no_cross = IcScenario::new(links.clone(), vec![], 1.0).unwrap();
        let separate: f64 = links
            .iter()
            .map(|l| {
                let sc = JammingScenario::new(l.h.clone(), l.q.clone(), l.h_z.clone(), 1.0, 1.0).unwrap();
                rate_single(&sc, &q).unwrap()
            })
            .sum();
        assert!((ic_rate(&no_cross, &q).unwrap() - separate).abs() < 1e-12);
    }

    #[test]
    fn scalar_network_matches_dense_scan() {
        let links = vec![
            IcLink { h: scalar(1.2), q: Hermitian::identity(1), h_z: scalar(0.9), noise_power: 1.0 },
            IcLink { h: scalar(0.8), q: Hermitian::scaled_identity(1, 2.0), h_z: scalar(0.4), noise_power: 0.5 },
        ];
        let cross = vec![
            CrossChannel { from: 0, to: 1, h: scalar(0.3) },
            CrossChannel { from: 1, to: 0, h: scalar(0.5) },
        ];
        let ic = IcScenario::new(links, cross, 2.0).unwrap();
        let dense = (0..=100_000)
            .map(|i| ic_rate(&ic, &Hermitian::scaled_identity(1, 2.0 * i as f64 / 100_000.0)).unwrap())
            .fold(f64::INFINITY, f64::min);
        let sol = ic_solve(&ic, &SpcaOptions::default()).unwrap();
        assert!((sol.rate - dense).abs() < 1e-4);
        assert!(sol.rate <= ic_rate(&ic, &Hermitian::zeros(1)).unwrap() + 1e-10);
    }

    #[test]
    fn zero_budget_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let links = vec![random_link(&mut rng, 2, 2), random_link(&mut rng, 2, 2)];
        let ic = IcScenario::new(links.clone(), vec![], 0.0).unwrap();
        let sol = ic_solve(&ic, &SpcaOptions::default()).unwrap();
        assert_eq!(sol.rate, ic_rate(&ic, &Hermitian::zeros(2)).unwrap());
        let bad = CrossChannel { from: 0, to: 0, h: cmat(&mut rng, 2, 2) };
        assert!(IcScenario::new(links, vec![bad], 1.0).is_err());
    }
}
