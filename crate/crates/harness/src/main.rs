use clap::{Parser, Subcommand, ValueEnum};
use jamcraft::config::ExperimentConfig;
use jamcraft::experiments::solve_config;
use jamcraft::{run_sweep, validate_suite, ExperimentKind, HarnessError, RunOptions, Scale};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Jamming covariance design for MIMO links.
///
/// Exit codes: 0 success, 1 validation failures or I/O errors, 2 config
/// error, 3 numerical-contract violation, 4 non-convergence in strict mode.
#[derive(Parser)]
#[command(name = "jamcraft", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the config's single-link scenario and print the solutions as JSON.
    Solve {
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Run the sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Run a preset experiment.
    Reproduce {
        figure: Figure,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Project indefinite closed-form candidates onto the feasible set
        /// before evaluating them.
        #[arg(long)]
        clamp_indefinite: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Run the property suite.
    Validate {
        #[arg(long, value_enum, default_value_t = Scale::Quick)]
        scale: Scale,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig45,
}

impl From<Figure> for ExperimentKind {
    fn from(f: Figure) -> Self {
        match f {
            Figure::Fig1 => ExperimentKind::Fig1,
            Figure::Fig2 => ExperimentKind::Fig2,
            Figure::Fig3 => ExperimentKind::Fig3,
            Figure::Fig45 => ExperimentKind::Fig45,
        }
    }
}

fn sweep_to(cfg: &ExperimentConfig, out: &Path, strict: bool) -> Result<(), HarnessError> {
    let opts = RunOptions {
        strict,
        threads: None,
    };
    let result = run_sweep(cfg, &opts)?;
    let meta = result.write_files(cfg, out)?;
    eprintln!(
        "wrote {} rows to {} (metadata {})",
        result.rows.len(),
        out.display(),
        meta.display()
    );
    if result.nonconverged > 0 {
        eprintln!("warning: {} iterative solves hit the iteration cap", result.nonconverged);
    }
    Ok(())
}

/// Writes one line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(line: &str) -> Result<(), HarnessError> {
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarnessError::Io {
            path: "stdout".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Solve { config, strict } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let v = solve_config(&cfg, &RunOptions { strict, threads: None })?;
            emit(&serde_json::to_string_pretty(&v)?)?;
        }
        Command::Sweep { config, out, strict } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            sweep_to(&cfg, &out, strict)?;
        }
        Command::Reproduce {
            figure,
            seed,
            trials,
            out,
            clamp_indefinite,
            strict,
        } => {
            let mut cfg = ExperimentConfig::preset(figure.into());
            cfg.seed = seed;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.clamp_indefinite = clamp_indefinite;
            cfg.validate()?;
            sweep_to(&cfg, &out, strict)?;
        }
        Command::Validate { scale, seed, report } => {
            let r = validate_suite(seed, scale);
            for p in &r.properties {
                let status = if p.passed { "PASS" } else { "FAIL" };
                emit(&format!("{status} {:<28} {}", p.name, p.detail))?;
                if let Some(c) = &p.counterexample {
                    emit(&format!("     counterexample: {c}"))?;
                }
            }
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&r)? + "\n";
                std::fs::write(&path, text).map_err(|source| HarnessError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            if !r.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
