use crate::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Optional defaults loaded from a TOML config file; one table per
/// subcommand plus a `[global]` table. Command-line flags override every
/// config value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub global: GlobalConfig,
    #[serde(default)]
    pub connectivity: ConnectivityConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    #[serde(default)]
    pub clocks: ClocksConfig,
    #[serde(default)]
    pub compute: ComputeConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivityConfig {
    pub model: Option<String>,
    pub n: Option<usize>,
    pub param: Option<f64>,
    pub c_grid: Option<String>,
    pub k_grid: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub n_grid: Option<String>,
    pub delta: Option<f64>,
    pub kappa: Option<f64>,
    pub rounds: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub noise: Option<f64>,
    pub p_ind: Option<f64>,
    pub literal_eq1: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClocksConfig {
    pub topology: Option<String>,
    pub n: Option<usize>,
    pub mode: Option<String>,
    pub noise_var: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeConfig {
    pub op: Option<String>,
    pub function: Option<String>,
    pub table: Option<PathBuf>,
    pub n: Option<usize>,
    pub alphabet: Option<usize>,
    pub theta: Option<String>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub gamma: Option<f64>,
    pub block_n: Option<usize>,
    pub blocks: Option<usize>,
    pub split: Option<f64>,
    pub n_grid: Option<String>,
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub avg: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read config {path:?}: {e}")))?;
    toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("bad config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg: FileConfig = toml::from_str(
            r#"
            [global]
            seed = 7
            [connectivity]
            model = "range"
            n = 100
            c_grid = "-2:2:2"
            trials = 10
            [capacity]
            n_grid = "64,256"
            delta = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.global.seed, Some(7));
        assert_eq!(cfg.connectivity.model.as_deref(), Some("range"));
        assert_eq!(cfg.capacity.n_grid.as_deref(), Some("64,256"));
    }

    #[test]
    fn rejects_unknown_keys() {
        let r: std::result::Result<FileConfig, _> = toml::from_str("[connectivity]\nbogus = 1\n");
        assert!(r.is_err());
    }
}
