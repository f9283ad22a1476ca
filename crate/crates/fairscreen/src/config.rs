//! Service and CLI defaults: one TOML file plus environment overrides.

use std::path::{Path, PathBuf};

use fairscreen_core::inconsistency::DEFAULT_TAU;
use fairscreen_core::layout::EmbeddingConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub port: u16,
    pub data_dir: PathBuf,
    /// Group and tables served by `serve`; relative paths resolve against
    /// `data_dir`.
    pub group: PathBuf,
    pub tables: PathBuf,
    pub tau: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub seed: u64,
    pub perplexity: f64,
    /// When set, every request must carry it in `x-session-token`.
    pub token: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            port: 8080,
            data_dir: PathBuf::from("data"),
            group: PathBuf::from("group.json"),
            tables: PathBuf::from("tables.json"),
            tau: DEFAULT_TAU,
            c: 1.0,
            seed: 0,
            perplexity: EmbeddingConfig::default().perplexity,
            token: None,
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Usage(format!("{name}: cannot parse `{raw}`")))
}

impl Config {
    /// Reads `path` (defaults when `None`) then applies the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str(&text).map_err(|e| Error::format(p, e))?
            }
            None => Config::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    /// Applies `FAIRSCREEN_PORT`, `FAIRSCREEN_DATA_DIR`, `FAIRSCREEN_TAU`,
    /// `FAIRSCREEN_C` and `FAIRSCREEN_SEED`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(v) = lookup("FAIRSCREEN_PORT") {
            self.port = parse_env("FAIRSCREEN_PORT", &v)?;
        }
        if let Some(v) = lookup("FAIRSCREEN_DATA_DIR") {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = lookup("FAIRSCREEN_TAU") {
            self.tau = parse_env("FAIRSCREEN_TAU", &v)?;
        }
        if let Some(v) = lookup("FAIRSCREEN_C") {
            self.c = parse_env("FAIRSCREEN_C", &v)?;
        }
        if let Some(v) = lookup("FAIRSCREEN_SEED") {
            self.seed = parse_env("FAIRSCREEN_SEED", &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::Usage(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Usage(format!("C must be positive, got {}", self.c)));
        }
        if !(self.perplexity.is_finite() && self.perplexity > 0.0) {
            return Err(Error::Usage(format!("perplexity must be positive, got {}", self.perplexity)));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.data_dir.join(path)
        }
    }

    pub fn embedding(&self, seed: u64) -> EmbeddingConfig {
        EmbeddingConfig { perplexity: self.perplexity, seed, ..EmbeddingConfig::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut config: Config = toml::from_str("port = 9000\nC = 2.5\ntau = 0.7\n").unwrap();
        assert_eq!(config.port, 9000);
        assert_eq!(config.c, 2.5);
        config
            .apply_env(|k| match k {
                "FAIRSCREEN_C" => Some("10".into()),
                "FAIRSCREEN_SEED" => Some("42".into()),
                _ => None,
            })
            .unwrap();
        assert_eq!(config.c, 10.0);
        assert_eq!(config.seed, 42);
        assert_eq!(config.tau, 0.7);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_env() {
        assert!(toml::from_str::<Config>("prot = 1\n").is_err());
        let mut config = Config::default();
        assert!(config.apply_env(|k| (k == "FAIRSCREEN_TAU").then(|| "half".into())).is_err());
        config.c = 0.0;
        assert!(config.validate().is_err());
    }
}
