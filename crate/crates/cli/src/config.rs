//! `key = value` run configuration, merged under command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const KNOWN_KEYS: &[&str] = &[
    "seed", "workers", "out", "rho", "alpha", "r", "b0", "eta", "trials", "feas_tol", "obj_tol", "rank", "kind",
    "mode", "grid", "max_depth", "top_offset", "csv", "export", "mu3",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("bad value for {key}: {value:?}")]
    Value { key: String, value: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides(pub BTreeMap<String, String>);

impl Overrides {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: k + 1, msg: "expected key = value".into() });
            };
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::Syntax { line: k + 1, msg: format!("unknown key {key:?}") });
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::parse(&text)
    }

    /// The flag if given, else the config value, else None.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, ConfigError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::Value { key: key.into(), value: v.clone() }),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let o = Overrides::parse("# run\nseed = 7\ntrials=50\nfeas-tol = 1e-6\n").unwrap();
        assert_eq!(o.pick::<u64>(None, "seed").unwrap(), Some(7));
        assert_eq!(o.pick(Some(3u64), "seed").unwrap(), Some(3));
        assert_eq!(o.pick::<f64>(None, "feas_tol").unwrap(), Some(1e-6));
        assert_eq!(o.pick_or::<f64>(None, "eta", 1e-13).unwrap(), 1e-13);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Overrides::parse("seed 7").is_err());
        assert!(Overrides::parse("colour = red").is_err());
        let o = Overrides::parse("seed = x").unwrap();
        assert!(o.pick::<u64>(None, "seed").is_err());
    }
}
