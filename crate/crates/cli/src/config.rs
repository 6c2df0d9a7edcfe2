//! Flat key=value configuration files.
//!
//! Precedence is: command-line flags > config file > built-in defaults.
//! Lines are `key=value`; blank lines and `#` comments are ignored. Keys
//! match the long flag names of the subcommands.

use std::collections::BTreeMap;
use std::path::Path;

const KNOWN_KEYS: &[&str] = &[
    "tol",
    "samples",
    "seed",
    "out",
    "format",
    "grid",
    "u-values",
    "s-interval",
    "quad-nodes",
    "max-time",
    "gamma-max",
    "allow-bad-set",
    "as-gate",
    "broken-field",
    "refine",
    "x0",
    "y0",
    "z0",
    "t0",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("cannot parse '{raw}' for key '{key}'"))),
        }
    }

    pub fn get_string(&self, key: &str) -> Option<String> {
        self.raw(key).map(|s| s.to_string())
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => Err(ConfigError(format!(
                "cannot parse '{other}' as a boolean for key '{key}'"
            ))),
        }
    }
}

/// Comma-separated list of reals, e.g. "0.5,0.25,0.1".
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("cannot parse '{piece}' as a number")))
        })
        .collect()
}

/// Interval "start,end".
pub fn parse_interval(text: &str) -> Result<(f64, f64), ConfigError> {
    let values = parse_f64_list(text)?;
    if values.len() != 2 {
        return Err(ConfigError(format!(
            "interval must be 'start,end', got '{text}'"
        )));
    }
    Ok((values[0], values[1]))
}

/// Grid "NSxNT", e.g. "192x64".
pub fn parse_grid(text: &str) -> Result<(usize, usize), ConfigError> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| ConfigError(format!("grid must be 'NSxNT', got '{text}'")))?;
    let n_s = a
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("cannot parse grid lines '{a}'")))?;
    let n_t = b
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("cannot parse grid columns '{b}'")))?;
    Ok((n_s, n_t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_rejects_unknown_keys() {
        let cfg = FileConfig::parse("seed=7\n# comment\ntol = 1e-9\n").unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(cfg.get::<f64>("tol").unwrap(), Some(1e-9));
        assert!(FileConfig::parse("bogus=1\n").is_err());
    }

    #[test]
    fn parses_lists_intervals_and_grids() {
        assert_eq!(parse_f64_list("0.5, 0.25").unwrap(), vec![0.5, 0.25]);
        assert!(parse_f64_list("").unwrap().is_empty());
        assert_eq!(parse_interval("0.5,0.05").unwrap(), (0.5, 0.05));
        assert!(parse_interval("1.0").is_err());
        assert_eq!(parse_grid("192x64").unwrap(), (192, 64));
        assert!(parse_grid("192").is_err());
    }
}
