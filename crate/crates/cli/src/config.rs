//! Structured text configuration: `key = value` lines grouped by optional
//! `[section]` headers, one scenario per file. Section names prefix the keys
//! (`[model]` + `kind = strip` gives `model.kind`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<ConfigMap, ConfigError> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(ConfigError {
                        line: line_no,
                        message: format!("unterminated section header {line:?}"),
                    });
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            values.insert(full, (line_no, value.trim().to_string()));
        }
        Ok(ConfigMap { values })
    }

    pub fn load(path: &Path) -> Result<ConfigMap, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        ConfigMap::parse(&text).map_err(|e| e.to_string())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    /// Look up `section.key`, falling back to the bare `key`.
    pub fn scoped(&self, section: &str, key: &str) -> Option<&str> {
        self.raw(&format!("{section}.{key}")).or_else(|| self.raw(key))
    }

    pub fn parse_scoped<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, String>
    where
        T::Err: fmt::Display,
    {
        let scoped_key = format!("{section}.{key}");
        let entry = self
            .values
            .get(&scoped_key)
            .or_else(|| self.values.get(key));
        match entry {
            None => Ok(None),
            Some((line, value)) => value.parse::<T>().map(Some).map_err(|e| {
                format!("config line {line}: field {scoped_key:?} has bad value {value:?}: {e}")
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_scoping() {
        let cfg = ConfigMap::parse("seed = 7\n[model]\nkind = strip-flat\n# comment\n").unwrap();
        assert_eq!(cfg.raw("seed"), Some("7"));
        assert_eq!(cfg.raw("model.kind"), Some("strip-flat"));
        assert_eq!(cfg.scoped("model", "seed"), Some("7"));
        let seed: Option<u64> = cfg.parse_scoped("busemann", "seed").unwrap();
        assert_eq!(seed, Some(7));
    }

    #[test]
    fn reports_line_numbers() {
        let err = ConfigMap::parse("ok = 1\nnot a pair\n").unwrap_err();
        assert_eq!(err.line, 2);
        let cfg = ConfigMap::parse("x = abc\n").unwrap();
        let got: Result<Option<f64>, _> = cfg.parse_scoped("s", "x");
        assert!(got.unwrap_err().contains("line 1"));
    }
}
