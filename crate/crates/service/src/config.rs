//! Server settings from flags, environment, a `key = value` file and defaults.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::zipjob::ZipLimits;

pub const DEFAULT_BATCH_ADDR: &str = "127.0.0.1:8750";
pub const DEFAULT_LIVE_ADDR: &str = "127.0.0.1:8751";
pub const DEFAULT_MAX_BODY: usize = 10 << 20;
pub const DEFAULT_RECYCLE_AFTER: usize = 1000;

/// Keys accepted in a service config file.
pub const CONFIG_KEYS: &[&str] = &["batch-addr", "live-addr", "max-body", "workers", "recycle-after", "examples", "profiles"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid {key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServiceConfig {
    pub batch_addr: SocketAddr,
    pub live_addr: SocketAddr,
    /// Request bodies above this many bytes are refused with 413.
    pub max_body: usize,
    pub workers: usize,
    /// Jobs a worker thread runs before it is replaced; zero never recycles.
    pub recycle_after: usize,
    /// Replaces the shipped examples list.
    pub examples: Option<PathBuf>,
    /// A directory of `*.profile` files registered next to the builtins.
    pub profiles: Option<PathBuf>,
    pub zip_limits: ZipLimits,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            batch_addr: DEFAULT_BATCH_ADDR.parse().expect("default address"),
            live_addr: DEFAULT_LIVE_ADDR.parse().expect("default address"),
            max_body: DEFAULT_MAX_BODY,
            workers: std::thread::available_parallelism().map_or(2, |n| n.get()),
            recycle_after: DEFAULT_RECYCLE_AFTER,
            examples: None,
            profiles: None,
            zip_limits: ZipLimits::default(),
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment line.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { path: path.display().to_string(), line: i + 1, message };
        let (k, v) = line.split_once('=').ok_or_else(|| syntax("expected key = value".into()))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl ServiceConfig {
    /// Apply settings in order; later calls win.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (key, value) in settings {
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |message: String| ConfigError::Invalid { key: key.to_string(), message };
        match key {
            "batch-addr" => self.batch_addr = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "live-addr" => self.live_addr = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "max-body" => self.max_body = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "workers" => {
                self.workers = value.parse().map_err(|e| invalid(format!("{e}")))?;
                if self.workers == 0 {
                    return Err(invalid("must be at least 1".into()));
                }
            }
            "recycle-after" => self.recycle_after = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "examples" => self.examples = Some(PathBuf::from(value)),
            "profiles" => self.profiles = Some(PathBuf::from(value)),
            _ => return Err(invalid(format!("unknown key; expected one of {}", CONFIG_KEYS.join(", ")))),
        }
        Ok(())
    }

    /// `TEXMATH_<KEY>` variables, with dashes as underscores.
    pub fn env_settings(get: impl Fn(&str) -> Option<String>) -> BTreeMap<String, String> {
        CONFIG_KEYS
            .iter()
            .filter_map(|k| {
                let var = format!("TEXMATH_{}", k.to_ascii_uppercase().replace('-', "_"));
                get(&var).map(|v| (k.to_string(), v))
            })
            .collect()
    }
}
