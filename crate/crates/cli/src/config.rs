//! Flat `key = value` configuration with dotted sections.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {message}")]
    Line { origin: String, line: usize, message: String },
    #[error("{origin}: {message}")]
    Missing { origin: String, message: String },
    #[error("cannot read {origin}: {message}")]
    Io { origin: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed key/value pairs with the line each came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    origin: String,
    entries: BTreeMap<String, Entry>,
}

const KNOWN_KEYS: &[&str] = &[
    "scenario.name",
    "scenario.hydro",
    "scenario.vector_potential",
    "scenario.labels",
    "grid.nx",
    "grid.ny",
    "grid.nz",
    "grid.order",
    "grid.lx",
    "grid.ly",
    "grid.lz",
    "eos.gamma",
    "eos.cv",
    "eos.s_ref",
    "eos.mu0",
    "foliation.a1",
    "foliation.a2",
    "foliation.a3",
    "foliation.entropy_amplitude",
    "run.t_end",
    "run.cfl",
    "run.kernel",
    "run.mode",
    "run.report_every",
    "run.report_initial",
    "reports.list",
    "reports.psi",
    "reports.chi",
    "reports.lorentz_sign",
    "output.dir",
    "output.dump_fields",
    "output.dump_tracers",
    "output.dump_residuals",
    "convergence.floor",
    "convergence.noise_floor",
];

fn is_known(key: &str) -> bool {
    KNOWN_KEYS.contains(&key) || key.strip_prefix("convergence.floor.").is_some_and(|r| !r.is_empty())
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let err = |line: usize, message: String| ConfigError::Line {
            origin: origin.to_string(),
            line,
            message,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(err(line, format!("invalid key `{key}`")));
            }
            if !is_known(key) {
                return Err(err(line, format!("unknown key `{key}`")));
            }
            if let Some(prev) = entries.get::<str>(key) {
                let prev: &Entry = prev;
                return Err(err(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self {
            origin: origin.to_string(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            origin: origin.clone(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &origin)
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Sets or replaces a value; used to derive refinement levels.
    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }

    /// A diagnostic attached to the line that set `key`.
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        match self.entries.get(key) {
            Some(e) if e.line > 0 => ConfigError::Line {
                origin: self.origin.clone(),
                line: e.line,
                message: format!("{key}: {}", message.into()),
            },
            _ => ConfigError::Missing {
                origin: self.origin.clone(),
                message: format!("{key}: {}", message.into()),
            },
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| self.error(key, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::Missing {
            origin: self.origin.clone(),
            message: format!("missing required key `{key}`"),
        })
    }

    /// Comma-separated list; `None` when the key is absent.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.raw(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
    }

    /// Canonical text: sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&e.value);
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_lists() {
        let c = Config::parse(
            "# run\nscenario.name = uniform\n\ngrid.nx = 16 # cells\nreports.list = eq1.3, nfa17\n",
            "t.cfg",
        )
        .unwrap();
        assert_eq!(c.raw("scenario.name"), Some("uniform"));
        assert_eq!(c.get::<usize>("grid.nx").unwrap(), Some(16));
        assert_eq!(c.list("reports.list").unwrap(), vec!["eq1.3", "nfa17"]);
        assert_eq!(c.get_or("grid.order", 4usize).unwrap(), 4);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let e = Config::parse("scenario.name = uniform\ngrid.nx 16\n", "a.cfg").unwrap_err();
        assert_eq!(e.to_string(), "a.cfg:2: expected `key = value`, found `grid.nx 16`");
        let e = Config::parse("\n\ngrid.bogus = 1\n", "a.cfg").unwrap_err();
        assert_eq!(e.to_string(), "a.cfg:3: unknown key `grid.bogus`");
        let e = Config::parse("grid.nx = 1\ngrid.nx = 2\n", "a.cfg").unwrap_err();
        assert!(e.to_string().starts_with("a.cfg:2: duplicate key"));
        let c = Config::parse("grid.nx = 1\n\ngrid.ny = lots\n", "a.cfg").unwrap();
        let e = c.get::<usize>("grid.ny").unwrap_err();
        assert!(e.to_string().starts_with("a.cfg:3: grid.ny: cannot parse `lots`"), "{e}");
    }

    #[test]
    fn hash_ignores_order_and_comments() {
        let a = Config::parse("grid.nx = 8\nscenario.name = uniform\n", "a").unwrap();
        let b = Config::parse("# x\nscenario.name = uniform\n grid.nx=8\n", "b").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = Config::parse("grid.nx = 9\nscenario.name = uniform\n", "c").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn per_report_floors_are_accepted() {
        let c = Config::parse("convergence.floor.eq1.3 = 3.5\n", "a").unwrap();
        assert_eq!(c.get::<f64>("convergence.floor.eq1.3").unwrap(), Some(3.5));
        assert!(Config::parse("convergence.floor. = 1\n", "a").is_err());
    }
}
