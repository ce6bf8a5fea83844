//! Cross-module property suite behind `jamcraft validate`.
//!
//! Every property draws its own seeded cases; a failing property carries
//! the first offending scenario serialized as JSON.

use crate::channel::{matrix_to_pairs, random_channel, trial_rng};
use crate::config::MethodTag;
use crate::experiments::{scenario_json, solve_with};
use jamcraft_core::linalg::{evd, inverse_pd, is_psd};
use jamcraft_core::multi_target::{
    bc_rate, bc_solve, ic_rate, ic_solve, mac_rate, mac_reduce, tdm_solve_grid, tdm_solve_joint, BcReceiver,
    BcScenario, CrossChannel, IcLink, IcScenario, MacLink, MacScenario, TdmPair, TdmScenario,
};
use jamcraft_core::spectral::{closed_form_pd, closed_form_psd, lemma1_minimize};
use jamcraft_core::{
    effective_quantities, rate_single, spca_iterate, unjammed_rate, waterfilling, Hermitian, JammingScenario,
    SpcaOptions,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Quick,
    Full,
}

/// Deliberate corruption used to check that the suite detects broken
/// solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Adds the noise-shaping term `D₀` to the closed-form candidate instead
    /// of subtracting it.
    FlipNoiseTerm,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub scale: Scale,
    pub properties: Vec<PropertyReport>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Outcome of one case: `Err` carries the reason and the scenario.
type Case = Result<(), (String, Value)>;

struct Counts {
    link: usize,
    multi: usize,
    tdm: usize,
}

impl Scale {
    fn counts(self) -> Counts {
        match self {
            Scale::Quick => Counts { link: 20, multi: 3, tdm: 2 },
            Scale::Full => Counts {
                link: 200,
                multi: 20,
                tdm: 10,
            },
        }
    }
}

pub fn validate_suite(seed: u64, scale: Scale) -> ValidationReport {
    validate_suite_with(seed, scale, Mutation::None)
}

pub fn validate_suite_with(seed: u64, scale: Scale, mutation: Mutation) -> ValidationReport {
    let c = scale.counts();
    let opts = SpcaOptions::default();
    let mut properties = Vec::new();
    let mut run = |name: &'static str, salt: u64, cases: usize, check: &dyn Fn(&mut ChaCha8Rng) -> Case| {
        let mut result = PropertyReport {
            name,
            cases,
            passed: true,
            detail: format!("{cases} cases"),
            counterexample: None,
        };
        for i in 0..cases {
            let mut rng = trial_rng(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), i);
            if let Err((why, scenario)) = check(&mut rng) {
                result.passed = false;
                result.detail = format!("case {i}: {why}");
                result.counterexample = Some(scenario);
                break;
            }
        }
        properties.push(result);
    };

    run("jamming_never_helps", 1, c.link, &|rng| {
        let sc = link_case(rng);
        let sol = solve_with(&sc, MethodTag::ClosedForm, &opts).map_err(|e| fail(e, &sc))?;
        let r0 = unjammed_rate(&sc).map_err(|e| fail(e, &sc))?;
        ensure(sol.rate >= -1e-12 && sol.rate <= r0 + 1e-10, &sc, || {
            format!("rate {} outside [0, {}]", sol.rate, r0)
        })
    });
    run("solutions_feasible", 2, c.link, &|rng| {
        let sc = link_case(rng);
        for tag in [MethodTag::ClosedForm, MethodTag::Spca, MethodTag::Suboptimal] {
            let sol = solve_with(&sc, tag, &opts).map_err(|e| fail(e, &sc))?;
            let psd = is_psd(&sol.q_z, 1e-8).map_err(|e| fail(e, &sc))?;
            ensure(psd && sol.q_z.trace() <= sc.jam_budget + 1e-8, &sc, || {
                format!("{} solution infeasible, trace {}", tag.as_str(), sol.q_z.trace())
            })?;
        }
        Ok(())
    });
    run("closed_form_matches_spca", 3, c.link, &|rng| {
        let sc = link_case(rng);
        let eff = effective_quantities(&sc).map_err(|e| fail(e, &sc))?;
        if !eff.signal_pd {
            return Ok(());
        }
        let cf = closed_form_pd(&eff, sc.jam_budget).map_err(|e| fail(e, &sc))?;
        if !cf.psd_ok {
            return Ok(());
        }
        let q = match mutation {
            Mutation::None => cf.q_prime,
            Mutation::FlipNoiseTerm => &cf.q_prime + &eff.d0.scale(2.0),
        };
        let closed = rate_single(&sc, &eff.assemble_qz(&q)).map_err(|e| fail(e, &sc))?;
        let (qs, _) = spca_iterate(&eff, sc.jam_budget, &opts).map_err(|e| fail(e, &sc))?;
        let iterative = eff.reduced_rate(&qs).map_err(|e| fail(e, &sc))?.total();
        ensure((closed - iterative).abs() < 1e-5, &sc, || {
            format!("closed form {closed} vs iterative {iterative}")
        })
    });
    run("suboptimal_not_below_spca", 4, c.link, &|rng| {
        let sc = link_case(rng);
        let sub = solve_with(&sc, MethodTag::Suboptimal, &opts).map_err(|e| fail(e, &sc))?;
        let it = solve_with(&sc, MethodTag::Spca, &opts).map_err(|e| fail(e, &sc))?;
        ensure(sub.rate >= it.rate - 1e-6, &sc, || {
            format!("suboptimal {} below iterative {}", sub.rate, it.rate)
        })
    });
    run("spca_monotone", 5, c.link, &|rng| {
        let sc = link_case(rng);
        let eff = effective_quantities(&sc).map_err(|e| fail(e, &sc))?;
        let (_, trace) = spca_iterate(&eff, sc.jam_budget, &opts).map_err(|e| fail(e, &sc))?;
        match trace.objective.windows(2).position(|w| w[1] > w[0] + 1e-12) {
            Some(k) => Err((format!("objective rose at iteration {}", k + 1), scenario_value(&sc))),
            None => Ok(()),
        }
    });
    run("multiplier_stationarity", 6, c.link, &|rng| {
        let n = rng.random_range(2..=8);
        let a = Hermitian::gram(&random_channel(rng, n, n, 1.0)).shift(0.05);
        let sol = lemma1_minimize(&a).map_err(|e| (e.to_string(), hermitian_value(&a)))?;
        let inv = |h: &Hermitian| inverse_pd(h).map_err(|e| (e.to_string(), hermitian_value(&a)));
        let r = &(&inv(&(&sol.x + &a))? - &inv(&sol.x)?) + &Hermitian::scaled_identity(n, sol.lambda);
        if r.frobenius_norm() < 1e-7 && (sol.x.trace() - 1.0).abs() < 1e-10 {
            Ok(())
        } else {
            Err((format!("residual {:e}", r.frobenius_norm()), hermitian_value(&a)))
        }
    });
    run("reduced_signal_pd", 7, c.link, &|rng| {
        let sc = link_case(rng);
        let eff = effective_quantities(&sc).map_err(|e| fail(e, &sc))?;
        if !eff.signal_pd {
            return Ok(());
        }
        let min = evd(&eff.b_tilde).map_err(|e| fail(e, &sc))?.min_value();
        ensure(min > 0.0, &sc, || format!("reduced signal matrix min eigenvalue {min}"))
    });
    run("rank_truncated_form_agrees", 8, c.link, &|rng| {
        let sc = link_case(rng);
        let eff = effective_quantities(&sc).map_err(|e| fail(e, &sc))?;
        if !eff.signal_pd {
            return Ok(());
        }
        let full = closed_form_pd(&eff, sc.jam_budget).map_err(|e| fail(e, &sc))?;
        let trunc = closed_form_psd(&eff, sc.jam_budget).map_err(|e| fail(e, &sc))?;
        let d = (&full.q_prime - &trunc.q_prime).frobenius_norm();
        ensure(d < 1e-9, &sc, || format!("forms differ by {d:e}"))
    });
    run("mac_reduction_exact", 9, c.multi, &|rng| {
        let links: Vec<MacLink> = (0..3)
            .map(|i| MacLink {
                h: random_channel(rng, 3, 1 + i, 1.0),
                q: Hermitian::gram(&random_channel(rng, 1 + i, 1 + i, 1.0)),
            })
            .collect();
        let mac = MacScenario::new(links, random_channel(rng, 3, 2, 1.0), 1.0, 1.0)
            .map_err(|e| (e.to_string(), Value::Null))?;
        let reduced = mac_reduce(&mac).map_err(|e| (e.to_string(), Value::Null))?;
        for _ in 0..5 {
            let q = Hermitian::gram(&random_channel(rng, 2, 2, 1.0));
            let a = mac_rate(&mac, &q).map_err(|e| (e.to_string(), Value::Null))?;
            let b = rate_single(&reduced, &q).map_err(|e| (e.to_string(), Value::Null))?;
            if (a - b).abs() > 1e-9 {
                return Err((format!("sum rate {a} vs reduced {b}"), scenario_value(&reduced)));
            }
        }
        Ok(())
    });
    run("broadcast_never_helps", 10, c.multi, &|rng| {
        let receivers = [2, 3]
            .iter()
            .map(|&d| BcReceiver {
                h: random_channel(rng, d, 3, 1.0),
                h_z: random_channel(rng, d, 2, 1.0),
                noise_power: 0.5,
            })
            .collect();
        let p_z = rng.random_range(0.1..4.0);
        let bc = BcScenario::new(Hermitian::identity(3), receivers, p_z).map_err(|e| (e.to_string(), Value::Null))?;
        let describe = || json!({ "receivers": bc.receivers.iter().map(|r| json!({"h": matrix_to_pairs(&r.h), "h_z": matrix_to_pairs(&r.h_z)})).collect::<Vec<_>>(), "jam_budget": p_z });
        let sol = bc_solve(&bc, &opts).map_err(|e| (e.to_string(), describe()))?;
        let r0 = bc_rate(&bc, &Hermitian::zeros(2)).map_err(|e| (e.to_string(), describe()))?;
        let psd = is_psd(&sol.q_z, 1e-8).unwrap_or(false);
        if sol.rate <= r0 + 1e-10 && psd && sol.q_z.trace() <= p_z + 1e-8 {
            Ok(())
        } else {
            Err((format!("jammed {} vs unjammed {r0}", sol.rate), describe()))
        }
    });
    run("tdm_grid_matches_joint", 11, c.tdm, &|rng| {
        let pairs = (0..2)
            .map(|_| TdmPair {
                h: random_channel(rng, 2, 2, 1.0),
                q: Hermitian::identity(2),
                h_z: random_channel(rng, 2, 2, 1.0),
                noise_power: 1.0,
                beta: 0.5,
            })
            .collect();
        let tdm = TdmScenario::new(pairs, rng.random_range(0.5..4.0)).map_err(|e| (e.to_string(), Value::Null))?;
        let grid = tdm_solve_grid(&tdm, 1000, &opts).map_err(|e| (e.to_string(), Value::Null))?;
        let joint = tdm_solve_joint(&tdm, &opts).map_err(|e| (e.to_string(), Value::Null))?;
        let gap = (grid.sum_rate - joint.sum_rate).abs();
        if gap < 1e-3 {
            Ok(())
        } else {
            let pairs: Vec<Value> = tdm
                .pairs
                .iter()
                .map(|p| json!({"h": matrix_to_pairs(&p.h), "h_z": matrix_to_pairs(&p.h_z)}))
                .collect();
            Err((format!("grid {} vs joint {}", grid.sum_rate, joint.sum_rate), json!({"pairs": pairs, "jam_budget": tdm.jam_budget})))
        }
    });
    run("interference_never_helps", 12, c.multi, &|rng| {
        let links: Vec<IcLink> = (0..2)
            .map(|_| IcLink {
                h: random_channel(rng, 2, 2, 1.0),
                q: Hermitian::identity(2),
                h_z: random_channel(rng, 2, 3, 1.0),
                noise_power: 1.0,
            })
            .collect();
        let cross = vec![
            CrossChannel {
                from: 0,
                to: 1,
                h: random_channel(rng, 2, 2, 0.3),
            },
            CrossChannel {
                from: 1,
                to: 0,
                h: random_channel(rng, 2, 2, 0.3),
            },
        ];
        let p_z = rng.random_range(0.1..4.0);
        let ic = IcScenario::new(links, cross, p_z).map_err(|e| (e.to_string(), Value::Null))?;
        let sol = ic_solve(&ic, &opts).map_err(|e| (e.to_string(), Value::Null))?;
        let r0 = ic_rate(&ic, &Hermitian::zeros(3)).map_err(|e| (e.to_string(), Value::Null))?;
        let psd = is_psd(&sol.q_z, 1e-8).unwrap_or(false);
        if sol.rate <= r0 + 1e-10 && psd && sol.q_z.trace() <= p_z + 1e-8 {
            Ok(())
        } else {
            Err((format!("jammed {} vs unjammed {r0}", sol.rate), json!({"jam_budget": p_z})))
        }
    });
    run("channel_draws_deterministic", 13, c.multi, &|rng| {
        let s: u64 = rng.random();
        let a = random_channel(&mut trial_rng(s, 3), 3, 4, 1.0);
        let b = random_channel(&mut trial_rng(s, 3), 3, 4, 1.0);
        if a == b {
            Ok(())
        } else {
            Err(("repeated draw differs".into(), json!({ "seed": s })))
        }
    });

    ValidationReport {
        seed,
        scale,
        properties,
    }
}

/// Example-sized single-link scenario with a log-uniform budget in
/// `[0.05, 20]`.
fn link_case(rng: &mut ChaCha8Rng) -> JammingScenario {
    let h_r = random_channel(rng, 3, 4, 1.0);
    let h_z = random_channel(rng, 3, 5, 1.0);
    let p_z = (rng.random_range(0.05f64.ln()..20f64.ln())).exp();
    let q_s = waterfilling(&h_r, 3.0, 1.0).expect("waterfilling of a finite channel");
    JammingScenario::new(h_r, q_s, h_z, 1.0, p_z).expect("valid scenario")
}

fn scenario_value(sc: &JammingScenario) -> Value {
    serde_json::from_str(&scenario_json(sc)).expect("scenario json")
}

fn hermitian_value(h: &Hermitian) -> Value {
    json!(matrix_to_pairs(h.matrix()))
}

fn fail(e: jamcraft_core::JamError, sc: &JammingScenario) -> (String, Value) {
    (e.to_string(), scenario_value(sc))
}

fn ensure(ok: bool, sc: &JammingScenario, why: impl FnOnce() -> String) -> Case {
    if ok {
        Ok(())
    } else {
        Err((why(), scenario_value(sc)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = validate_suite(5, Scale::Quick);
        for p in &report.properties {
            assert!(p.passed, "{}: {}", p.name, p.detail);
        }
        assert_eq!(report.properties.len(), 13);
    }

    #[test]
    fn flipped_noise_term_is_caught() {
        let report = validate_suite_with(5, Scale::Quick, Mutation::FlipNoiseTerm);
        let p = report.property("closed_form_matches_spca").unwrap();
        assert!(!p.passed);
        assert!(p.counterexample.is_some());
        assert!(report.property("solutions_feasible").unwrap().passed);
    }
}
