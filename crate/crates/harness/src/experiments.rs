//! Monte Carlo runners for the single-link, broadcast and time-multiplexed
//! experiments.
//!
//! Each trial is evaluated at every grid point before results are averaged,
//! so all grid points and all methods share the same channel draws.

use crate::channel::{hermitian_to_pairs, matrix_from_pairs, matrix_to_pairs, random_channel, trial_rng};
use crate::config::{ExperimentConfig, ExperimentKind, LinkConfig, MethodTag, TdmConfig, TdmSolver};
use crate::error::{HarnessError, Result};
use crate::output::{config_hash, mean_stderr, reduction_ratio, SweepResult, SweepRow};
use jamcraft_core::linalg::psd_trace_projection;
use jamcraft_core::multi_target::{
    bc_rate, bc_solve, tdm_rate, tdm_solve_grid, tdm_solve_joint, BcReceiver, BcScenario, TdmPair, TdmScenario,
};
use jamcraft_core::spectral::{closed_form_pd, closed_form_psd};
use jamcraft_core::suboptimal::{suboptimal_pd, suboptimal_psd};
use jamcraft_core::{
    effective_quantities, rate_single, solve_single, spca_iterate, unjammed_rate, waterfilling, Diagnostics,
    Fallback, Hermitian, JamError, JammerSolution, JammingScenario, Method, SpcaOptions,
};
use rayon::prelude::*;
use serde_json::{json, Value};

/// Execution settings shared by all runners.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Treat any non-converged iterative solve as an error.
    pub strict: bool,
    /// Worker threads; `None` reads `JAMCRAFT_THREADS` (0 or unset = auto).
    pub threads: Option<usize>,
}

fn thread_pool(opts: &RunOptions) -> Result<rayon::ThreadPool> {
    let n = match opts.threads {
        Some(n) => n,
        None => std::env::var("JAMCRAFT_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))
}

/// Runs the sweep selected by `cfg.experiment`.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    match cfg.experiment {
        ExperimentKind::Fig1 | ExperimentKind::Fig2 | ExperimentKind::Custom => run_example1(cfg, opts),
        ExperimentKind::Fig3 => run_example2(cfg, opts),
        ExperimentKind::Fig45 => run_example3(cfg, opts),
    }
}

/// Per-trial outcome on one grid point of a single-link sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkOutcome {
    /// Whether the received signal covariance is positive definite.
    pub signal_pd: bool,
    /// Whether the closed-form candidate is PSD.
    pub psd_ok: bool,
    pub closed_form: Option<f64>,
    pub spca: Option<f64>,
    pub suboptimal: Option<f64>,
    pub spca_converged: bool,
}

/// Evaluates the requested methods on one scenario.
///
/// The closed-form rate is that of the candidate covariance even when it is
/// indefinite, unless `clamp_indefinite` projects it onto the feasible set
/// first. The suboptimal rate uses the closed form whenever it is PSD.
pub fn evaluate_link(
    sc: &JammingScenario,
    methods: &[MethodTag],
    clamp_indefinite: bool,
    opts: &SpcaOptions,
) -> Result<LinkOutcome, JamError> {
    let wants = |m| methods.contains(&m);
    let all = |rate: f64, signal_pd| LinkOutcome {
        signal_pd,
        psd_ok: true,
        closed_form: wants(MethodTag::ClosedForm).then_some(rate),
        spca: wants(MethodTag::Spca).then_some(rate),
        suboptimal: wants(MethodTag::Suboptimal).then_some(rate),
        spca_converged: true,
    };
    let p_z = sc.jam_budget;
    let eff = match effective_quantities(sc) {
        Ok(eff) => eff,
        Err(JamError::DegenerateChannel) => return Ok(all(unjammed_rate(sc)?, false)),
        Err(e) => return Err(e),
    };
    if p_z == 0.0 {
        return Ok(all(unjammed_rate(sc)?, eff.signal_pd));
    }
    let cf = if eff.signal_pd {
        closed_form_pd(&eff, p_z)?
    } else {
        closed_form_psd(&eff, p_z)?
    };
    // An indefinite rank-truncated candidate leaves `Q' + D₀` singular, so
    // the as-is rate comes from its eigen-directions instead.
    let cf_rate = if cf.psd_ok {
        eff.reduced_rate(&cf.q_prime)?.total()
    } else {
        eff.r0 + cf.r_bar_unconstrained
    };
    let mut out = LinkOutcome {
        signal_pd: eff.signal_pd,
        psd_ok: cf.psd_ok,
        closed_form: None,
        spca: None,
        suboptimal: None,
        spca_converged: true,
    };
    if wants(MethodTag::ClosedForm) {
        out.closed_form = Some(if cf.psd_ok || !clamp_indefinite {
            cf_rate
        } else {
            eff.reduced_rate(&psd_trace_projection(&cf.q_prime, p_z)?)?.total()
        });
    }
    if wants(MethodTag::Spca) {
        let (q, trace) = spca_iterate(&eff, p_z, opts)?;
        out.spca = Some(eff.reduced_rate(&q)?.total());
        out.spca_converged = trace.converged;
    }
    if wants(MethodTag::Suboptimal) {
        out.suboptimal = Some(if cf.psd_ok {
            cf_rate
        } else {
            let sub = if eff.signal_pd {
                suboptimal_pd(&eff, p_z)?
            } else {
                suboptimal_psd(&eff, p_z)?
            };
            eff.reduced_rate(&sub.q_prime)?.total()
        });
    }
    Ok(out)
}

/// Scenario of a single-link config: explicit channels if given, otherwise
/// the draw of `trial`. The signal covariance defaults to waterfilling.
pub fn link_scenario(link: &LinkConfig, seed: u64, trial: usize, p_z: f64) -> Result<JammingScenario, JamError> {
    let (h_r, h_z, q_s) = match &link.channels {
        Some(ch) => (
            matrix_from_pairs(&ch.h_r),
            matrix_from_pairs(&ch.h_z),
            ch.q_s.as_ref().map(|q| Hermitian::new(matrix_from_pairs(q))).transpose()?,
        ),
        None => {
            let mut rng = trial_rng(seed, trial);
            let h_r = random_channel(&mut rng, link.n_r, link.n_t, 1.0);
            let h_z = random_channel(&mut rng, link.n_r, link.n_z, 1.0);
            (h_r, h_z, None)
        }
    };
    let q_s = match q_s {
        Some(q) => q,
        None => waterfilling(&h_r, link.transmit_power, link.noise_power)?,
    };
    JammingScenario::new(h_r, q_s, h_z, link.noise_power, p_z)
}

pub fn scenario_json(sc: &JammingScenario) -> String {
    json!({
        "h_r": matrix_to_pairs(&sc.h_r),
        "q_s": hermitian_to_pairs(&sc.q_s),
        "h_z": matrix_to_pairs(&sc.h_z),
        "noise_power": sc.noise_power,
        "jam_budget": sc.jam_budget,
    })
    .to_string()
}

fn check_finite(x: f64, what: &'static str, grid: usize, trial: usize, scenario: impl FnOnce() -> String) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::NonFinite {
            grid,
            trial,
            what,
            scenario: scenario(),
        })
    }
}

fn sweep_result(cfg: &ExperimentConfig, coord_names: Vec<&'static str>, rows: Vec<SweepRow>, nonconverged: usize) -> SweepResult {
    SweepResult {
        experiment: cfg.experiment,
        coord_names,
        rows,
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        nonconverged,
    }
}

fn push_mean(rows: &mut Vec<SweepRow>, coords: &[f64], metric: &'static str, xs: &[f64]) {
    if xs.is_empty() {
        return;
    }
    let (mean, stderr) = mean_stderr(xs);
    rows.push(SweepRow {
        coords: coords.to_vec(),
        metric,
        mean,
        stderr,
        trials: xs.len(),
    });
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Handles a non-converged solve: an error in strict mode, a warning
/// otherwise.
fn note_nonconvergence(strict: bool, grid: usize, trial: usize, scenario: impl FnOnce() -> String) -> Result<()> {
    if strict {
        return Err(HarnessError::NonConvergence {
            grid,
            trial,
            scenario: scenario(),
        });
    }
    log::warn!("grid point {grid}, trial {trial}: iterative solver hit its iteration cap");
    Ok(())
}

/// Single-link sweep over `pz_grid`: mean rate per method, and the fraction
/// of PSD closed-form candidates.
///
/// Metrics per grid point: `rate_<method>` for each configured method,
/// `psd_fraction` (among trials with a positive definite received signal
/// covariance, where the full-rank closed form applies), `psd_fraction_all`
/// and `pd_fraction`.
pub fn run_example1(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    let link = cfg
        .link
        .as_ref()
        .ok_or_else(|| HarnessError::config("link", "required for this experiment"))?;
    let spca = cfg.spca_options();
    let pool = thread_pool(opts)?;
    let per_trial: Vec<Vec<LinkOutcome>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                cfg.pz_grid
                    .iter()
                    .enumerate()
                    .map(|(g, &p_z)| {
                        let sc = link_scenario(link, cfg.seed, t, p_z)?;
                        let wrap = |source| HarnessError::Trial {
                            grid: g,
                            trial: t,
                            source,
                            scenario: scenario_json(&sc),
                        };
                        let o = evaluate_link(&sc, &cfg.methods, cfg.clamp_indefinite, &spca).map_err(wrap)?;
                        for (x, what) in [(o.closed_form, "closed-form rate"), (o.spca, "spca rate"), (o.suboptimal, "suboptimal rate")] {
                            if let Some(x) = x {
                                check_finite(x, what, g, t, || scenario_json(&sc))?;
                            }
                        }
                        if !o.spca_converged {
                            note_nonconvergence(opts.strict, g, t, || scenario_json(&sc))?;
                        }
                        Ok(o)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut nonconverged = 0;
    for (g, &p_z) in cfg.pz_grid.iter().enumerate() {
        let at: Vec<&LinkOutcome> = per_trial.iter().map(|t| &t[g]).collect();
        nonconverged += at.iter().filter(|o| !o.spca_converged).count();
        let coords = [p_z];
        for m in &cfg.methods {
            let xs: Vec<f64> = at
                .iter()
                .filter_map(|o| match m {
                    MethodTag::ClosedForm => o.closed_form,
                    MethodTag::Spca => o.spca,
                    MethodTag::Suboptimal => o.suboptimal,
                })
                .collect();
            let metric = match m {
                MethodTag::ClosedForm => "rate_closed_form",
                MethodTag::Spca => "rate_spca",
                MethodTag::Suboptimal => "rate_suboptimal",
            };
            push_mean(&mut rows, &coords, metric, &xs);
        }
        let pd: Vec<f64> = at.iter().filter(|o| o.signal_pd).map(|o| indicator(o.psd_ok)).collect();
        push_mean(&mut rows, &coords, "psd_fraction", &pd);
        let all: Vec<f64> = at.iter().map(|o| indicator(o.psd_ok)).collect();
        push_mean(&mut rows, &coords, "psd_fraction_all", &all);
        let sig: Vec<f64> = at.iter().map(|o| indicator(o.signal_pd)).collect();
        push_mean(&mut rows, &coords, "pd_fraction", &sig);
    }
    Ok(sweep_result(cfg, vec!["pz"], rows, nonconverged))
}

/// Broadcast sweep: mean unjammed and jammed sum rates and their paired gap
/// (`rate_unjammed`, `rate_jammed`, `rate_gap`) per `P_z`.
pub fn run_example2(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    let bc_cfg = cfg
        .broadcast
        .as_ref()
        .ok_or_else(|| HarnessError::config("broadcast", "required for fig3"))?;
    let spca = cfg.spca_options();
    let pool = thread_pool(opts)?;
    // (unjammed, jammed, converged) per trial and grid point.
    let per_trial: Vec<Vec<(f64, f64, bool)>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                let receivers: Vec<BcReceiver> = bc_cfg
                    .receivers
                    .iter()
                    .map(|r| BcReceiver {
                        h: random_channel(&mut rng, r.n_r, bc_cfg.n_t, 1.0),
                        h_z: random_channel(&mut rng, r.n_r, bc_cfg.n_z, 1.0),
                        noise_power: r.noise_power,
                    })
                    .collect();
                let q_s = Hermitian::identity(bc_cfg.n_t);
                cfg.pz_grid
                    .iter()
                    .enumerate()
                    .map(|(g, &p_z)| {
                        let bc = BcScenario::new(q_s.clone(), receivers.clone(), p_z)?;
                        let describe = || bc_json(&bc);
                        let wrap = |source| HarnessError::Trial {
                            grid: g,
                            trial: t,
                            source,
                            scenario: describe(),
                        };
                        let r0 = bc_rate(&bc, &Hermitian::zeros(bc_cfg.n_z)).map_err(wrap)?;
                        let sol = bc_solve(&bc, &spca).map_err(wrap)?;
                        check_finite(r0, "unjammed rate", g, t, describe)?;
                        check_finite(sol.rate, "jammed rate", g, t, describe)?;
                        if !sol.diagnostics.converged {
                            note_nonconvergence(opts.strict, g, t, describe)?;
                        }
                        Ok((r0, sol.rate, sol.diagnostics.converged))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut nonconverged = 0;
    for (g, &p_z) in cfg.pz_grid.iter().enumerate() {
        let at: Vec<(f64, f64, bool)> = per_trial.iter().map(|t| t[g]).collect();
        nonconverged += at.iter().filter(|o| !o.2).count();
        let r0: Vec<f64> = at.iter().map(|o| o.0).collect();
        let rj: Vec<f64> = at.iter().map(|o| o.1).collect();
        let gap: Vec<f64> = at.iter().map(|o| o.0 - o.1).collect();
        push_mean(&mut rows, &[p_z], "rate_unjammed", &r0);
        push_mean(&mut rows, &[p_z], "rate_jammed", &rj);
        push_mean(&mut rows, &[p_z], "rate_gap", &gap);
    }
    Ok(sweep_result(cfg, vec!["pz"], rows, nonconverged))
}

fn bc_json(bc: &BcScenario) -> String {
    let receivers: Vec<Value> = bc
        .receivers
        .iter()
        .map(|r| {
            json!({
                "h": matrix_to_pairs(&r.h),
                "h_z": matrix_to_pairs(&r.h_z),
                "noise_power": r.noise_power,
            })
        })
        .collect();
    json!({
        "q_s": hermitian_to_pairs(&bc.q_s),
        "receivers": receivers,
        "jam_budget": bc.jam_budget,
    })
    .to_string()
}

fn tdm_json(tdm: &TdmScenario) -> String {
    let pairs: Vec<Value> = tdm
        .pairs
        .iter()
        .map(|p| {
            json!({
                "h": matrix_to_pairs(&p.h),
                "q": hermitian_to_pairs(&p.q),
                "h_z": matrix_to_pairs(&p.h_z),
                "noise_power": p.noise_power,
                "beta": p.beta,
            })
        })
        .collect();
    json!({ "pairs": pairs, "jam_budget": tdm.jam_budget }).to_string()
}

/// Two-pair time-multiplexed scenario at legitimate power `p1` for the first
/// pair and jamming-channel variance `v1` towards it. Unit-variance draws are
/// rescaled, so every `(p1, v1)` point of a trial sees the same channel
/// directions. Legitimate covariances are uniform, `(P_i/n_t)·I`.
pub fn tdm_scenario(tdm_cfg: &TdmConfig, seed: u64, trial: usize, p1: f64, v1: f64) -> Result<TdmScenario, JamError> {
    let mut rng = trial_rng(seed, trial);
    let draws: Vec<_> = tdm_cfg
        .pairs
        .iter()
        .map(|p| {
            (
                random_channel(&mut rng, p.n_r, p.n_t, 1.0),
                random_channel(&mut rng, p.n_r, tdm_cfg.n_z, 1.0),
            )
        })
        .collect();
    let powers = [p1, tdm_cfg.total_power - p1];
    let variances = [v1, 2.0 - v1];
    let pairs = tdm_cfg
        .pairs
        .iter()
        .zip(draws)
        .enumerate()
        .map(|(i, (p, (h, h_z)))| TdmPair {
            h,
            q: Hermitian::scaled_identity(p.n_t, powers[i] / p.n_t as f64),
            h_z: h_z * jamcraft_core::C64::from(variances[i].sqrt()),
            noise_power: p.noise_power,
            beta: p.beta,
        })
        .collect();
    TdmScenario::new(pairs, tdm_cfg.jam_budget)
}

/// Time-multiplexed sweep over the `(p1, v1)` grid: mean unjammed and jammed
/// sum rates, `r1 = 1 − mean(R_J)/mean(R_0)` and `r2`, the mean share of
/// jamming power spent on the first pair.
pub fn run_example3(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    let tdm_cfg = cfg
        .tdm
        .as_ref()
        .ok_or_else(|| HarnessError::config("tdm", "required for fig45"))?;
    let spca = cfg.spca_options();
    let grid: Vec<(f64, f64)> = tdm_cfg
        .p1_grid
        .iter()
        .flat_map(|&p| tdm_cfg.v1_grid.iter().map(move |&v| (p, v)))
        .collect();
    let pool = thread_pool(opts)?;
    // (unjammed, jammed, share on pair 1, converged) per trial and grid point.
    let per_trial: Vec<Vec<(f64, f64, f64, bool)>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                grid.iter()
                    .enumerate()
                    .map(|(g, &(p1, v1))| {
                        let tdm = tdm_scenario(tdm_cfg, cfg.seed, t, p1, v1)?;
                        let describe = || tdm_json(&tdm);
                        let wrap = |source| HarnessError::Trial {
                            grid: g,
                            trial: t,
                            source,
                            scenario: describe(),
                        };
                        let zeros: Vec<Hermitian> = tdm.pairs.iter().map(|_| Hermitian::zeros(tdm_cfg.n_z)).collect();
                        let r0 = tdm_rate(&tdm, &zeros).map_err(wrap)?;
                        let sol = match tdm_cfg.solver {
                            TdmSolver::Grid => tdm_solve_grid(&tdm, tdm_cfg.grid_steps, &spca),
                            TdmSolver::Joint => tdm_solve_joint(&tdm, &spca),
                        }
                        .map_err(wrap)?;
                        check_finite(r0, "unjammed rate", g, t, describe)?;
                        check_finite(sol.sum_rate, "jammed rate", g, t, describe)?;
                        if !sol.converged {
                            note_nonconvergence(opts.strict, g, t, describe)?;
                        }
                        Ok((r0, sol.sum_rate, sol.rho[0], sol.converged))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    let mut nonconverged = 0;
    for (g, &(p1, v1)) in grid.iter().enumerate() {
        let at: Vec<(f64, f64, f64, bool)> = per_trial.iter().map(|t| t[g]).collect();
        nonconverged += at.iter().filter(|o| !o.3).count();
        let coords = [p1, v1];
        let r0: Vec<f64> = at.iter().map(|o| o.0).collect();
        let rj: Vec<f64> = at.iter().map(|o| o.1).collect();
        let share: Vec<f64> = at.iter().map(|o| o.2).collect();
        push_mean(&mut rows, &coords, "rate_unjammed", &r0);
        push_mean(&mut rows, &coords, "rate_jammed", &rj);
        let (r1, se) = reduction_ratio(&rj, &r0);
        rows.push(SweepRow {
            coords: coords.to_vec(),
            metric: "r1",
            mean: r1,
            stderr: se,
            trials: at.len(),
        });
        push_mean(&mut rows, &coords, "r2", &share);
    }
    Ok(sweep_result(cfg, vec!["p1", "v1"], rows, nonconverged))
}

/// Solves one scenario with the solver selected by `tag`.
///
/// `closed_form` and `suboptimal` go through the dispatcher (closed form when
/// its candidate is PSD, the named fallback otherwise); `spca` always runs
/// the iterative solver.
pub fn solve_with(sc: &JammingScenario, tag: MethodTag, opts: &SpcaOptions) -> Result<JammerSolution, JamError> {
    match tag {
        MethodTag::ClosedForm => solve_single(sc, Fallback::Spca, opts),
        MethodTag::Suboptimal => solve_single(sc, Fallback::Suboptimal, opts),
        MethodTag::Spca => {
            if sc.jam_budget == 0.0 {
                return solve_single(sc, Fallback::Spca, opts);
            }
            let eff = match effective_quantities(sc) {
                Ok(eff) => eff,
                Err(JamError::DegenerateChannel) => return solve_single(sc, Fallback::Spca, opts),
                Err(e) => return Err(e),
            };
            let (q, trace) = spca_iterate(&eff, sc.jam_budget, opts)?;
            let q_z = eff.assemble_qz(&q);
            Ok(JammerSolution {
                rate: rate_single(sc, &q_z)?,
                q_z,
                method: Method::Spca,
                diagnostics: Diagnostics {
                    iterations: trace.iterations,
                    kkt_residual: Some(trace.kkt_residual),
                    converged: trace.converged,
                    ..Diagnostics::default()
                },
            })
        }
    }
}

/// `solve` subcommand: every configured method at every `P_z` on the
/// config's scenario (explicit channels, or the draw of trial 0).
pub fn solve_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    let link = cfg
        .link
        .as_ref()
        .ok_or_else(|| HarnessError::config("link", "`solve` needs a single-link scenario"))?;
    let spca = cfg.spca_options();
    let mut out = Vec::new();
    for (g, &p_z) in cfg.pz_grid.iter().enumerate() {
        let sc = link_scenario(link, cfg.seed, 0, p_z)?;
        let unjammed = unjammed_rate(&sc)?;
        for &tag in &cfg.methods {
            let sol = solve_with(&sc, tag, &spca).map_err(|source| HarnessError::Trial {
                grid: g,
                trial: 0,
                source,
                scenario: scenario_json(&sc),
            })?;
            check_finite(sol.rate, "rate", g, 0, || scenario_json(&sc))?;
            if !sol.diagnostics.converged {
                note_nonconvergence(opts.strict, g, 0, || scenario_json(&sc))?;
            }
            out.push(solution_json(p_z, tag, unjammed, &sol));
        }
    }
    Ok(Value::Array(out))
}

pub fn solution_json(p_z: f64, requested: MethodTag, unjammed: f64, sol: &JammerSolution) -> Value {
    let d = &sol.diagnostics;
    json!({
        "pz": p_z,
        "requested": requested.as_str(),
        "method": sol.method.as_str(),
        "rate": sol.rate,
        "unjammed_rate": unjammed,
        "q_z": hermitian_to_pairs(&sol.q_z),
        "trace": sol.q_z.trace(),
        "diagnostics": {
            "iterations": d.iterations,
            "lambda": d.lambda,
            "epsilon": d.epsilon,
            "kkt_residual": d.kkt_residual,
            "psd_condition_held": d.psd_condition_held,
            "converged": d.converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind, trials: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(kind);
        cfg.trials = trials;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn example1_rows_are_grid_major() {
        let mut cfg = small(ExperimentKind::Fig1, 3);
        cfg.pz_grid = vec![0.5, 4.0];
        let res = run_example1(&cfg, &RunOptions::default()).unwrap();
        let metrics: Vec<&str> = res.rows.iter().map(|r| r.metric).collect();
        let one = [
            "rate_closed_form",
            "rate_spca",
            "rate_suboptimal",
            "psd_fraction",
            "psd_fraction_all",
            "pd_fraction",
        ];
        // psd_fraction disappears only if no trial has a PD signal covariance.
        assert!(metrics.len() <= 12);
        assert_eq!(&metrics[..3], &one[..3]);
        assert!(res.rows.iter().take_while(|r| r.coords == [0.5]).count() >= 5);
        for r in &res.rows {
            assert!(r.mean.is_finite() && r.trials >= 1);
        }
    }

    #[test]
    fn spca_never_above_other_methods() {
        let mut cfg = small(ExperimentKind::Fig1, 4);
        cfg.pz_grid = vec![0.3, 1.0];
        let sc_rates: Vec<LinkOutcome> = (0..4)
            .flat_map(|t| {
                let cfg = &cfg;
                cfg.pz_grid.iter().map(move |&p| {
                    let sc = link_scenario(cfg.link.as_ref().unwrap(), cfg.seed, t, p).unwrap();
                    evaluate_link(&sc, &cfg.methods, false, &SpcaOptions::default()).unwrap()
                })
            })
            .collect();
        for o in sc_rates {
            let s = o.spca.unwrap();
            assert!(s <= o.suboptimal.unwrap() + 1e-6);
            if o.psd_ok {
                assert!((s - o.closed_form.unwrap()).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn clamping_only_changes_indefinite_cases() {
        let cfg = small(ExperimentKind::Fig1, 1);
        let link = cfg.link.as_ref().unwrap();
        for t in 0..20 {
            let sc = link_scenario(link, 9, t, 0.2).unwrap();
            let a = evaluate_link(&sc, &[MethodTag::ClosedForm], false, &SpcaOptions::default()).unwrap();
            let b = evaluate_link(&sc, &[MethodTag::ClosedForm], true, &SpcaOptions::default()).unwrap();
            if a.psd_ok {
                assert_eq!(a.closed_form, b.closed_form);
            }
        }
    }

    #[test]
    fn example2_zero_budget_is_unjammed() {
        let mut cfg = small(ExperimentKind::Fig3, 2);
        cfg.pz_grid = vec![0.0, 1.0];
        let res = run_example2(&cfg, &RunOptions::default()).unwrap();
        let r0 = res.row(&[0.0], "rate_unjammed").unwrap().mean;
        let rj = res.row(&[0.0], "rate_jammed").unwrap().mean;
        assert!((r0 - rj).abs() < 1e-9);
        // Common draws: the unjammed rate is identical at every budget.
        assert_eq!(r0, res.row(&[1.0], "rate_unjammed").unwrap().mean);
        assert!(res.row(&[1.0], "rate_gap").unwrap().mean > 0.0);
    }

    #[test]
    fn example3_single_point_is_deterministic() {
        let mut cfg = small(ExperimentKind::Fig45, 1);
        let tdm = cfg.tdm.as_mut().unwrap();
        tdm.p1_grid = vec![2.5];
        tdm.v1_grid = vec![1.0];
        let a = run_example3(&cfg, &RunOptions::default()).unwrap();
        let b = run_example3(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(a.rows, b.rows);
        let r2 = a.row(&[2.5, 1.0], "r2").unwrap().mean;
        assert!((0.0..=1.0).contains(&r2));
    }

    #[test]
    fn weak_jamming_channel_to_strong_pair_draws_power() {
        // Pair 1 carries most of the legitimate power while the jammer's
        // channel to it is weak: most jamming power goes to pair 1.
        let mut cfg = small(ExperimentKind::Fig45, 6);
        let tdm = cfg.tdm.as_mut().unwrap();
        tdm.p1_grid = vec![4.5];
        tdm.v1_grid = vec![0.2];
        let res = run_example3(&cfg, &RunOptions::default()).unwrap();
        let weak = res.row(&[4.5, 0.2], "r2").unwrap().mean;
        assert!(weak > 0.5, "share on pair 1: {weak}");
    }

    #[test]
    fn solve_reports_every_method() {
        let mut cfg = small(ExperimentKind::Custom, 1);
        cfg.pz_grid = vec![0.0, 1.0];
        let v = solve_config(&cfg, &RunOptions::default()).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 6);
        assert_eq!(arr[0]["method"], "zero");
        for s in arr {
            assert!(s["rate"].as_f64().unwrap() <= s["unjammed_rate"].as_f64().unwrap() + 1e-10);
            assert!(s["trace"].as_f64().unwrap() <= s["pz"].as_f64().unwrap() + 1e-8);
        }
    }
}
