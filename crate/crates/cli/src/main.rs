use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use timeop_cli::{write_outputs, Experiment, ExperimentConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// Numerical experiments on the free time operator and its scattering
/// counterparts. Writes `<experiment>.csv` and `<experiment>.json` into the
/// output directory; exits 0 if every verdict passes, 1 if any fails, and 2
/// on configuration or convergence errors.
#[derive(Debug, Parser)]
#[command(name = "timeop", version, arg_required_else_help = true)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,

    /// Flat key = value config file; flags override its entries.
    config: Option<PathBuf>,

    /// Half-width K of the momentum box.
    #[arg(long = "grid-K")]
    grid_k: Option<f64>,

    /// Number of lattice nodes N.
    #[arg(long = "grid-N")]
    grid_n: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Cauchy tolerance of the wave-operator limits.
    #[arg(long)]
    tol: Option<f64>,

    /// Time horizon for survival sweeps and half-times.
    #[arg(long)]
    horizon: Option<f64>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, timeop_cli::config::ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if self.grid_k.is_some() {
            cfg.grid_k = self.grid_k;
        }
        if self.grid_n.is_some() {
            cfg.grid_n = self.grid_n;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("timeop: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let outcome = match cli.experiment.run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("timeop: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let (csv, json) = match write_outputs(&outcome, &cfg.out, cli.experiment.stem()) {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("timeop: cannot write outputs to {}: {e}", cfg.out.display());
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let report = &outcome.report;
    for v in report.failures() {
        eprintln!("FAIL {}: {:e} (needs {})", v.name, v.value, v.condition);
    }
    println!(
        "{}: {}/{} verdicts pass; wrote {} and {}",
        report.experiment,
        report.verdicts.iter().filter(|v| v.pass).count(),
        report.verdicts.len(),
        csv.display(),
        json.display()
    );
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
