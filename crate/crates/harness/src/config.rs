//! Experiment configuration: a strict JSON document.
//!
//! Scenario sections (`link`, `broadcast`, `tdm`) and grids may be omitted,
//! in which case the preset for the experiment kind fills them in. Unknown
//! fields are rejected.

use crate::error::{HarnessError, Result};
use jamcraft_core::SpcaOptions;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Fig3,
    Fig45,
    Custom,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig45 => "fig45",
            ExperimentKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(ExperimentKind::Fig1),
            "fig2" => Ok(ExperimentKind::Fig2),
            "fig3" => Ok(ExperimentKind::Fig3),
            "fig45" => Ok(ExperimentKind::Fig45),
            "custom" => Ok(ExperimentKind::Custom),
            other => Err(format!("unknown experiment `{other}`")),
        }
    }
}

/// Single-link solver selection in sweeps and `solve`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    ClosedForm,
    Spca,
    Suboptimal,
}

impl MethodTag {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodTag::ClosedForm => "closed_form",
            MethodTag::Spca => "spca",
            MethodTag::Suboptimal => "suboptimal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdmSolver {
    Grid,
    Joint,
}

/// One legitimate link and one jammer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n_z: usize,
    /// Legitimate transmit power, allocated by waterfilling.
    pub transmit_power: f64,
    pub noise_power: f64,
    /// Explicit channels for `solve`; drawn at random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<ExplicitChannels>,
}

/// Matrices as row-major lists of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitChannels {
    pub h_r: Vec<Vec<[f64; 2]>>,
    pub h_z: Vec<Vec<[f64; 2]>>,
    /// Signal covariance; waterfilling is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_s: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    pub n_r: usize,
    pub noise_power: f64,
}

/// One transmitter with identity signal covariance, several receivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadcastConfig {
    pub n_t: usize,
    pub n_z: usize,
    pub receivers: Vec<ReceiverConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub noise_power: f64,
    pub beta: f64,
}

/// Two time-multiplexed pairs sharing a total legitimate power, jammed by
/// one jammer whose channel variances are `v1` and `2 − v1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdmConfig {
    pub pairs: Vec<PairConfig>,
    pub n_z: usize,
    pub jam_budget: f64,
    pub total_power: f64,
    pub p1_grid: Vec<f64>,
    pub v1_grid: Vec<f64>,
    pub solver: TdmSolver,
    /// Steps of the power-share grid when `solver` is `grid`.
    pub grid_steps: usize,
}

/// Overrides for the iterative solver; omitted fields keep their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpcaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kkt_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub pz_grid: Vec<f64>,
    #[serde(default)]
    pub methods: Vec<MethodTag>,
    /// Project indefinite closed-form candidates onto the feasible set
    /// before evaluating their rate, instead of evaluating them as-is.
    #[serde(default)]
    pub clamp_indefinite: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broadcast: Option<BroadcastConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tdm: Option<TdmConfig>,
    #[serde(default)]
    pub spca: SpcaConfig,
}

fn example1_link() -> LinkConfig {
    LinkConfig {
        n_t: 4,
        n_r: 3,
        n_z: 5,
        transmit_power: 3.0,
        noise_power: 1.0,
        channels: None,
    }
}

impl ExperimentConfig {
    /// Desk-scale version of the published setup for `kind`.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            seed: 1,
            trials: 800,
            pz_grid: vec![],
            methods: vec![],
            clamp_indefinite: false,
            link: None,
            broadcast: None,
            tdm: None,
            spca: SpcaConfig::default(),
        };
        match kind {
            ExperimentKind::Fig1 | ExperimentKind::Custom => {
                cfg.pz_grid = vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
                cfg.methods = vec![MethodTag::ClosedForm, MethodTag::Spca, MethodTag::Suboptimal];
                cfg.link = Some(example1_link());
            }
            ExperimentKind::Fig2 => {
                cfg.pz_grid = vec![0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
                cfg.methods = vec![MethodTag::ClosedForm];
                cfg.link = Some(example1_link());
            }
            ExperimentKind::Fig3 => {
                cfg.trials = 400;
                cfg.pz_grid = vec![0.0, 1.0, 2.0, 4.0, 8.0];
                let rx = |n_r, noise_power| ReceiverConfig { n_r, noise_power };
                cfg.broadcast = Some(BroadcastConfig {
                    n_t: 4,
                    n_z: 4,
                    receivers: vec![rx(3, 0.5), rx(4, 0.5), rx(4, 1.0)],
                });
            }
            ExperimentKind::Fig45 => {
                cfg.trials = 400;
                let pair = |n| PairConfig {
                    n_t: n,
                    n_r: n,
                    noise_power: 1.0,
                    beta: 0.5,
                };
                cfg.tdm = Some(TdmConfig {
                    pairs: vec![pair(4), pair(3)],
                    n_z: 4,
                    jam_budget: 4.0,
                    total_power: 5.0,
                    p1_grid: (1..10).map(|k| 0.5 * k as f64).collect(),
                    v1_grid: (1..10).map(|k| 0.2 * k as f64).collect(),
                    solver: TdmSolver::Grid,
                    grid_steps: 20,
                });
            }
        }
        cfg
    }

    /// Parses a config document, filling omitted sections from the preset.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(path, e.into_inner().to_string())
        })?;
        let preset = Self::preset(cfg.experiment);
        if cfg.pz_grid.is_empty() && cfg.experiment != ExperimentKind::Fig45 {
            cfg.pz_grid = preset.pz_grid;
        }
        if cfg.methods.is_empty() {
            cfg.methods = preset.methods;
        }
        cfg.link = cfg.link.or(preset.link);
        cfg.broadcast = cfg.broadcast.or(preset.broadcast);
        cfg.tdm = cfg.tdm.or(preset.tdm);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn spca_options(&self) -> SpcaOptions {
        let mut o = SpcaOptions::default();
        let s = &self.spca;
        o.max_outer_iters = s.max_outer_iters.unwrap_or(o.max_outer_iters);
        o.outer_tol = s.outer_tol.unwrap_or(o.outer_tol);
        o.kkt_tol = s.kkt_tol.unwrap_or(o.kkt_tol);
        o.inner_max_iters = s.inner_max_iters.unwrap_or(o.inner_max_iters);
        o.inner_tol = s.inner_tol.unwrap_or(o.inner_tol);
        o
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        self.spca_options()
            .validate()
            .map_err(|e| HarnessError::config("spca", e.to_string()))?;
        match self.experiment {
            ExperimentKind::Fig1 | ExperimentKind::Fig2 | ExperimentKind::Custom => {
                check_grid(&self.pz_grid, "pz_grid", 0.0)?;
                let link = self
                    .link
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("link", "required for this experiment"))?;
                check_link(link)?;
            }
            ExperimentKind::Fig3 => {
                check_grid(&self.pz_grid, "pz_grid", 0.0)?;
                let bc = self
                    .broadcast
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("broadcast", "required for fig3"))?;
                check_count(bc.n_t, "broadcast.n_t")?;
                check_count(bc.n_z, "broadcast.n_z")?;
                if bc.receivers.is_empty() {
                    return Err(HarnessError::config("broadcast.receivers", "must not be empty"));
                }
                for (i, r) in bc.receivers.iter().enumerate() {
                    check_count(r.n_r, &format!("broadcast.receivers[{i}].n_r"))?;
                    check_positive(r.noise_power, &format!("broadcast.receivers[{i}].noise_power"))?;
                }
            }
            ExperimentKind::Fig45 => {
                let tdm = self
                    .tdm
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("tdm", "required for fig45"))?;
                check_tdm(tdm)?;
            }
        }
        Ok(())
    }

    /// Canonical serialization used for provenance hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn check_count(n: usize, path: &str) -> Result<()> {
    if n == 0 {
        return Err(HarnessError::config(path, "must be at least 1"));
    }
    Ok(())
}

fn check_positive(x: f64, path: &str) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(HarnessError::config(path, format!("must be positive and finite, got {x}")));
    }
    Ok(())
}

fn check_grid(grid: &[f64], path: &str, lower: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(HarnessError::config(path, "must not be empty"));
    }
    for (i, &g) in grid.iter().enumerate() {
        if !g.is_finite() || g < lower {
            return Err(HarnessError::config(
                format!("{path}[{i}]"),
                format!("must be finite and at least {lower}, got {g}"),
            ));
        }
        if i > 0 && g <= grid[i - 1] {
            return Err(HarnessError::config(format!("{path}[{i}]"), "grid must be strictly increasing"));
        }
    }
    Ok(())
}

fn check_link(link: &LinkConfig) -> Result<()> {
    check_count(link.n_t, "link.n_t")?;
    check_count(link.n_r, "link.n_r")?;
    check_count(link.n_z, "link.n_z")?;
    check_positive(link.transmit_power, "link.transmit_power")?;
    check_positive(link.noise_power, "link.noise_power")?;
    if let Some(ch) = &link.channels {
        check_shape(&ch.h_r, link.n_r, link.n_t, "link.channels.h_r")?;
        check_shape(&ch.h_z, link.n_r, link.n_z, "link.channels.h_z")?;
        if let Some(q) = &ch.q_s {
            check_shape(q, link.n_t, link.n_t, "link.channels.q_s")?;
        }
    }
    Ok(())
}

fn check_shape(m: &[Vec<[f64; 2]>], rows: usize, cols: usize, path: &str) -> Result<()> {
    if m.len() != rows {
        return Err(HarnessError::config(path, format!("expected {rows} rows, got {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(HarnessError::config(
                format!("{path}[{i}]"),
                format!("expected {cols} entries, got {}", row.len()),
            ));
        }
        if row.iter().flatten().any(|x| !x.is_finite()) {
            return Err(HarnessError::config(format!("{path}[{i}]"), "entries must be finite"));
        }
    }
    Ok(())
}

fn check_tdm(tdm: &TdmConfig) -> Result<()> {
    if tdm.pairs.len() != 2 {
        return Err(HarnessError::config("tdm.pairs", "exactly two pairs are supported"));
    }
    for (i, p) in tdm.pairs.iter().enumerate() {
        check_count(p.n_t, &format!("tdm.pairs[{i}].n_t"))?;
        check_count(p.n_r, &format!("tdm.pairs[{i}].n_r"))?;
        check_positive(p.noise_power, &format!("tdm.pairs[{i}].noise_power"))?;
        check_positive(p.beta, &format!("tdm.pairs[{i}].beta"))?;
    }
    let beta: f64 = tdm.pairs.iter().map(|p| p.beta).sum();
    if (beta - 1.0).abs() > 1e-12 {
        return Err(HarnessError::config("tdm.pairs", format!("time shares must sum to 1, got {beta}")));
    }
    check_count(tdm.n_z, "tdm.n_z")?;
    check_positive(tdm.jam_budget, "tdm.jam_budget")?;
    check_positive(tdm.total_power, "tdm.total_power")?;
    check_grid(&tdm.p1_grid, "tdm.p1_grid", 0.0)?;
    check_grid(&tdm.v1_grid, "tdm.v1_grid", 0.0)?;
    if let Some(i) = tdm.p1_grid.iter().position(|&p| p <= 0.0 || p >= tdm.total_power) {
        return Err(HarnessError::config(
            format!("tdm.p1_grid[{i}]"),
            "must lie strictly between 0 and total_power",
        ));
    }
    if let Some(i) = tdm.v1_grid.iter().position(|&v| v <= 0.0 || v >= 2.0) {
        return Err(HarnessError::config(format!("tdm.v1_grid[{i}]"), "must lie strictly between 0 and 2"));
    }
    if tdm.solver == TdmSolver::Grid && tdm.grid_steps < 2 {
        return Err(HarnessError::config("tdm.grid_steps", "must be at least 2"));
    }
    Ok(())
}
