//! Library side of the `timeop` command-line tool: configuration, the
//! experiments, and the CSV/JSON writers.

pub mod commands;
pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;

pub use commands::{Outcome, RunError, Table};
pub use config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Survival,
    Uncertainty,
    Bounds,
    Weylrel,
    Domain,
    Scatter,
    DemoInterval,
}

impl Experiment {
    /// File stem of the CSV and JSON outputs.
    pub fn stem(self) -> &'static str {
        match self {
            Experiment::Survival => "survival",
            Experiment::Uncertainty => "uncertainty",
            Experiment::Bounds => "bounds",
            Experiment::Weylrel => "weylrel",
            Experiment::Domain => "domain",
            Experiment::Scatter => "scatter",
            Experiment::DemoInterval => "demo_interval",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
        cfg.validate()?;
        match self {
            Experiment::Survival => commands::survival(cfg),
            Experiment::Uncertainty => commands::uncertainty(cfg),
            Experiment::Bounds => commands::bounds(cfg),
            Experiment::Weylrel => commands::weylrel(cfg),
            Experiment::Domain => commands::domain(cfg),
            Experiment::Scatter => commands::scatter(cfg),
            Experiment::DemoInterval => commands::demo_interval(cfg),
        }
    }
}

pub fn write_csv(table: &Table, path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
pub fn write_outputs(
    outcome: &Outcome,
    dir: &Path,
    stem: &str,
) -> std::io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(&outcome.table, &csv_path)?;
    let mut f = BufWriter::new(File::create(&json_path)?);
    f.write_all(outcome.report.to_json().as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok((csv_path, json_path))
}
