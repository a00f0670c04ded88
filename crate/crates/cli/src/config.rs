//! Experiment configuration: a flat `key = value` file plus flag overrides.
//!
//! The file is top-level TOML with no tables, so every key is one line:
//!
//! ```text
//! grid_K = 32.0
//! grid_N = 8192
//! seed = 20240601
//! n_list = [2, 10, 100]
//! bumps = [[1.0, 2.0], [-2.0, -0.5]]
//! ```
//!
//! Missing keys take the defaults of [`ExperimentConfig::default`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timeop::lattice::MomentumGrid;
use timeop::scattering::WaveOperatorOptions;

/// Desk lattice used when the grid is not configured.
pub const DEFAULT_GRID: (f64, usize) = (32.0, 8192);

/// Scattering runs need a wider position box than the desk lattice gives.
pub const DEFAULT_SCATTER_GRID: (f64, usize) = (16.0, 8192);

/// Every knob of every subcommand.
///
/// | key | default | used by |
/// |---|---|---|
/// | `grid_K`, `grid_N` | unset: 32, 8192 (scatter: 16, 8192) | all |
/// | `seed` | 20240601 | bounds |
/// | `a0` | 1.0 | survival, uncertainty, weylrel, domain |
/// | `phi_n` | 2..=6 | survival, uncertainty, bounds, domain |
/// | `n_list` | 2, 5, 10, 50, 100 | uncertainty |
/// | `bumps` | [1,2], [0.5,2.5], [-2,-0.5] | all but demo-interval |
/// | `t_min`, `t_count` | 0.1, 60 | survival |
/// | `horizon` | 100 | survival, uncertainty |
/// | `intervals` | 100 | bounds |
/// | `tol` | 1e-3 | scatter |
/// | `scatter_t0`, `scatter_levels`, `scatter_dt` | 2, 6, 0.01 | scatter |
/// | `barrier_height`, `well_depth` | 0.1, 1.0 | scatter |
/// | `partner` | [1.5, 2.5] | scatter (second state of the symmetry pair) |
/// | `theta_arg` | 0.4 | demo-interval |
/// | `out` | `.` | all |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "grid_K", skip_serializing_if = "Option::is_none")]
    pub grid_k: Option<f64>,
    #[serde(rename = "grid_N", skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    pub seed: u64,
    pub a0: f64,
    pub phi_n: Vec<u32>,
    pub n_list: Vec<u32>,
    pub bumps: Vec<[f64; 2]>,
    pub t_min: f64,
    pub t_count: usize,
    pub horizon: f64,
    pub intervals: usize,
    pub tol: f64,
    pub scatter_t0: f64,
    pub scatter_levels: u32,
    pub scatter_dt: f64,
    pub barrier_height: f64,
    pub well_depth: f64,
    pub partner: [f64; 2],
    pub theta_arg: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let wave = WaveOperatorOptions::default();
        Self {
            grid_k: None,
            grid_n: None,
            seed: 20_240_601,
            a0: 1.0,
            phi_n: (2..=6).collect(),
            n_list: vec![2, 5, 10, 50, 100],
            bumps: vec![[1.0, 2.0], [0.5, 2.5], [-2.0, -0.5]],
            t_min: 0.1,
            t_count: 60,
            horizon: 100.0,
            intervals: 100,
            tol: wave.tol,
            scatter_t0: wave.t0,
            scatter_levels: wave.levels,
            scatter_dt: wave.dt,
            barrier_height: 0.1,
            well_depth: 1.0,
            partner: [1.5, 2.5],
            theta_arg: 0.4,
            out: PathBuf::from("."),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })
    }

    /// Fails for seeds above `i64::MAX`, which the file format cannot hold.
    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The configured lattice, or `fallback` for whatever is unset.
    pub fn grid_or(&self, fallback: (f64, usize)) -> Result<MomentumGrid, ConfigError> {
        let k = self.grid_k.unwrap_or(fallback.0);
        let n = self.grid_n.unwrap_or(fallback.1);
        MomentumGrid::new(k, n).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn wave_options(&self) -> WaveOperatorOptions {
        WaveOperatorOptions {
            t0: self.scatter_t0,
            levels: self.scatter_levels,
            tol: self.tol,
            dt: self.scatter_dt,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !positive(self.a0) {
            return bad(format!("a0 must be positive, got {}", self.a0));
        }
        if !(self.t_min > 0.0 && self.t_min < self.horizon) {
            return bad(format!(
                "need 0 < t_min < horizon, got t_min = {}, horizon = {}",
                self.t_min, self.horizon
            ));
        }
        if self.t_count < 2 {
            return bad(format!("t_count must be at least 2, got {}", self.t_count));
        }
        if i64::try_from(self.seed).is_err() {
            return bad(format!(
                "seed must be at most {}, got {}",
                i64::MAX,
                self.seed
            ));
        }
        if !positive(self.tol) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if let Some(b) = self
            .bumps
            .iter()
            .chain([&self.partner])
            .find(|b| b[0].partial_cmp(&b[1]) != Some(std::cmp::Ordering::Less))
        {
            return bad(format!("bump support must satisfy k1 < k2, got {b:?}"));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return bad(format!("n_list entries must be at least 2, got {n}"));
        }
        Ok(())
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}
