//! Sweep results, CSV persistence and the provenance sidecar.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HarnessError, Result};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// One averaged metric at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub metric: &'static str,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub experiment: ExperimentKind,
    /// Names of the grid coordinates, e.g. `["pz"]` or `["p1", "v1"]`.
    pub coord_names: Vec<&'static str>,
    /// Grid-major, metric-minor.
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    pub config_hash: String,
    /// Iterative solves that stopped at the iteration cap.
    pub nonconverged: usize,
}

impl SweepResult {
    pub fn row(&self, coords: &[f64], metric: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.metric == metric && r.coords == coords)
    }

    /// Rows of one metric in grid order.
    pub fn series(&self, metric: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.metric == metric).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["experiment"];
        header.extend(&self.coord_names);
        header.extend(["metric", "mean", "stderr", "trials", "seed"]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![self.experiment.as_str().to_string()];
            rec.extend(r.coords.iter().map(|&c| format_significant(c)));
            rec.push(r.metric.to_string());
            rec.push(format_significant(r.mean));
            rec.push(format_significant(r.stderr));
            rec.push(r.trials.to_string());
            rec.push(self.seed.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| HarnessError::Io {
            path: "csv output".into(),
            source,
        })?;
        Ok(())
    }

    /// Writes the CSV to `path` and its metadata to `<path>.meta.json`.
    pub fn write_files(&self, cfg: &ExperimentConfig, path: &Path) -> Result<PathBuf> {
        let io = |p: &Path| {
            let p = p.display().to_string();
            move |source| HarnessError::Io { path: p, source }
        };
        let file = std::fs::File::create(path).map_err(io(path))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let meta_path = sidecar_path(path);
        let meta = json!({
            "experiment": self.experiment.as_str(),
            "seed": self.seed,
            "trials": cfg.trials,
            "config_sha256": self.config_hash,
            "config": cfg,
            "rng": "ChaCha8, seeded from `seed`, one stream per trial index (shared across grid points)",
            "closed_form_curve": if cfg.clamp_indefinite {
                "indefinite closed-form candidates are projected onto {Q ⪰ 0, Tr Q ≤ P_z} before evaluation"
            } else {
                "indefinite closed-form candidates are evaluated as-is"
            },
            "psd_fraction": "fraction of PSD closed-form candidates among trials with a positive definite received signal covariance",
            "nonconverged_solves": self.nonconverged,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        std::fs::write(&meta_path, text).map_err(io(&meta_path))?;
        Ok(meta_path)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

/// Decimal rendering with 12 significant digits; scientific notation outside
/// `[1e-6, 1e12)`.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..12).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `1 − mean(x)/mean(y)` with a first-order (delta-method) standard error
/// for paired samples.
pub fn reduction_ratio(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, _) = mean_stderr(x);
    let (my, _) = mean_stderr(y);
    let ratio = mx / my;
    if x.len() < 2 {
        return (1.0 - ratio, 0.0);
    }
    // Residuals of the linearized ratio.
    let var = x
        .iter()
        .zip(y)
        .map(|(a, b)| ((a - mx) - ratio * (b - my)).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    (1.0 - ratio, (var / n).sqrt() / my.abs())
}
