//! Run configuration. Values come from command-line flags, then an optional
//! config file, then built-in defaults. The config file uses the DSL's item
//! syntax: `key = value;` statements with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "SPDECRIT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let stripped: String = text
            .lines()
            .map(|line| line.split_once('#').map_or(line, |(code, _)| code))
            .collect::<Vec<_>>()
            .join("\n");
        let mut statements: Vec<&str> = stripped.split(';').collect();
        let tail = statements.pop().unwrap_or("");
        if !tail.trim().is_empty() {
            return Err(CliError::input(format!("config: missing `;` after `{}`", tail.trim())));
        }
        for stmt in statements {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            let Some((key, value)) = stmt.split_once('=') else {
                return Err(CliError::input(format!("config: expected `key = value;`, found `{stmt}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let valid_key = !key.is_empty()
                && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
            if !valid_key || value.is_empty() {
                return Err(CliError::input(format!("config: bad statement `{stmt}`")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::input(format!("config: duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Entries under `prefix.`, with the prefix removed.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries.iter().filter_map(move |(k, v)| {
            k.strip_prefix(prefix).and_then(|rest| rest.strip_prefix('.')).map(|rest| (rest, v.as_str()))
        })
    }
}

/// Resolves each parameter once and records the value used.
#[derive(Debug)]
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    echo: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self { file, echo: BTreeMap::new() }
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|_| CliError::input(format!("config: invalid value `{text}` for `{key}`"))),
        }
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>> {
        let value = match cli {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T> {
        let v = self.optional(key, cli)?.unwrap_or(default);
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// The seed: flag, config file, `SPDECRIT_SEED`, then 0.
    pub fn seed(&mut self, cli: Option<u64>) -> Result<u64> {
        let env = match std::env::var(SEED_ENV) {
            Ok(text) => Some(
                text.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::input(format!("{SEED_ENV}: invalid seed `{text}`")))?,
            ),
            Err(_) => None,
        };
        let v = match (cli, self.from_file::<u64>("seed")?) {
            (Some(v), _) | (None, Some(v)) => v,
            (None, None) => env.unwrap_or(0),
        };
        self.echo.insert("seed".into(), v.to_string());
        Ok(v)
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.echo.insert(key.to_string(), value.to_string());
    }

    pub fn file(&self) -> &'a ConfigFile {
        self.file
    }

    pub fn into_echo(self) -> BTreeMap<String, String> {
        self.echo
    }
}

/// Range checks shared by the commands.
pub mod check {
    use crate::error::{CliError, Result};

    pub fn positive(key: &str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::input(format!("--{key} must be a positive number, got {v}")))
        }
    }

    pub fn in_range<T: PartialOrd + std::fmt::Display>(key: &str, v: T, lo: T, hi: T) -> Result<T> {
        if v >= lo && v <= hi {
            Ok(v)
        } else {
            Err(CliError::input(format!("--{key} must lie in [{lo}, {hi}], got {v}")))
        }
    }

    pub fn odd_power(v: u32) -> Result<u32> {
        if v >= 3 && v % 2 == 1 {
            Ok(v)
        } else {
            Err(CliError::input(format!("--n must be an odd integer >= 3, got {v}")))
        }
    }

    pub fn grid(v: usize) -> Result<usize> {
        if v >= 2 && v.is_power_of_two() {
            Ok(v)
        } else {
            Err(CliError::input(format!("--grid must be a power of two, got {v}")))
        }
    }

    pub fn numerics_dim(v: usize) -> Result<usize> {
        if v == 1 || v == 2 {
            Ok(v)
        } else {
            Err(CliError::input(format!("--dim must be 1 or 2 for numerical suites, got {v}")))
        }
    }

    /// Number of steps of size `dt` to reach `tmax`, which must be a multiple.
    pub fn steps(tmax: f64, dt: f64) -> Result<usize> {
        let steps = (tmax / dt).round();
        if steps < 1.0 || (steps * dt - tmax).abs() > 1e-9 * tmax {
            return Err(CliError::input(format!("--tmax {tmax} must be a positive multiple of --dt {dt}")));
        }
        Ok(steps as usize)
    }
}
