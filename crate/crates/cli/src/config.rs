//! Plain `key=value` config files. Command-line flags override config
//! values, which override built-in defaults.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config {} line {}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    /// Flag value if present, else config-file value, else default.
    pub fn resolve<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
            None => Ok(default),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_overrides_config_overrides_default() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg");
        std::fs::write(&p, "# comment\neta = 0.3\nk=7\n").unwrap();
        let cfg = ConfigFile::load(&p).unwrap();
        assert_eq!(cfg.resolve(Some(0.5f64), "eta", 0.1).unwrap(), 0.5);
        assert_eq!(cfg.resolve(None::<f64>, "eta", 0.1).unwrap(), 0.3);
        assert_eq!(cfg.resolve(None::<f64>, "c", 15.0).unwrap(), 15.0);
    }

    #[test]
    fn malformed_line_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg");
        std::fs::write(&p, "just some words\n").unwrap();
        assert!(ConfigFile::load(&p).is_err());
    }
}
