//! Flag values layered over an optional JSON config file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use cantor_analysis::cantor_set::{make_spec, IfsSpec, Slot};
use cantor_analysis::numeric::{parse_rational, Rational, DEFAULT_PRECISION};
use cantor_analysis::Error;
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_LEVEL_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

/// Keys from the config file; a flag given on the command line wins.
#[derive(Debug, Default)]
pub struct Layers {
    file: Map<String, Value>,
}

impl Layers {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Layers::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(file)) => Ok(Layers { file }),
            Ok(_) => Err(CliError::usage("config file must hold a JSON object")),
            Err(e) => Err(CliError::usage(format!("config file {}: {e}", path.display()))),
        }
    }

    fn text(&self, key: &str) -> Result<Option<String>, CliError> {
        let value = self
            .file
            .get(key)
            .or_else(|| self.file.get(&key.replace('_', "-")));
        Ok(match value {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            Some(Value::Bool(b)) => Some(b.to_string()),
            Some(Value::Array(items)) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                Some(parts.join(","))
            }
            Some(Value::Object(_)) => {
                return Err(CliError::usage(format!("config key {key:?} must not be an object")))
            }
        })
    }

    /// The flag if present, else the config entry parsed from text.
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.text(key)? {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::usage(format!("config key {key:?}: {e}"))),
        }
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing --{}", key.replace('_', "-"))))
    }

    pub fn rational(&self, flag: Option<String>, key: &str) -> Result<Option<Rational>, CliError> {
        self.get(flag, key)?
            .map(|s: String| parse_rational(&s).map_err(CliError::from))
            .transpose()
    }

    pub fn require_rational(&self, flag: Option<String>, key: &str) -> Result<Rational, CliError> {
        self.rational(flag, key)?
            .ok_or_else(|| CliError::usage(format!("missing --{}", key.replace('_', "-"))))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get(None::<bool>, key)?.unwrap_or(false))
    }
}

/// Comma-separated list of exact values.
pub fn rational_list(text: &str) -> Result<Vec<Rational>, CliError> {
    text.split(',')
        .map(|s| parse_rational(s).map_err(CliError::from))
        .collect()
}

pub fn float_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::from(Error::Parse(s.to_string())))
        })
        .collect()
}

fn slot_list(text: &str) -> Result<Vec<Slot>, CliError> {
    text.split(',')
        .map(|s| match s.trim() {
            "keep" | "k" => Ok(Slot::Keep),
            "gap" | "g" => Ok(Slot::Gap),
            other => Err(CliError::usage(format!("gap pattern entry {other:?} is not keep or gap"))),
        })
        .collect()
}

/// Settings shared by every subcommand.
#[derive(Debug)]
pub struct Common {
    pub spec: IfsSpec,
    pub precision: u32,
    pub level_cap: usize,
    pub format: Format,
}

pub struct CommonFlags {
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub r: Option<u32>,
    pub gap_pattern: Option<String>,
    pub precision: Option<u32>,
    pub level_cap: Option<usize>,
    pub format: Option<Format>,
}

impl Common {
    pub fn resolve(layers: &Layers, flags: CommonFlags) -> Result<Self, CliError> {
        let p = layers.get(flags.p, "p")?.unwrap_or(2);
        let q = layers.get(flags.q, "q")?.unwrap_or(1);
        let r = layers.get(flags.r, "r")?.unwrap_or(p.saturating_add(q));
        let pattern = layers
            .get(flags.gap_pattern, "gap_pattern")?
            .map(|s: String| slot_list(&s))
            .transpose()?;
        let spec = make_spec(p, q, r, pattern)?;
        let precision = layers.get(flags.precision, "precision")?.unwrap_or(DEFAULT_PRECISION);
        if precision < 6 {
            return Err(CliError::usage("precision must be at least 6 digits"));
        }
        let level_cap = layers.get(flags.level_cap, "level_cap")?.unwrap_or(DEFAULT_LEVEL_CAP);
        if level_cap < 1 {
            return Err(CliError::usage("level cap must be at least 1"));
        }
        let format = layers.get(flags.format, "format")?.unwrap_or(Format::Csv);
        Ok(Common {
            spec,
            precision,
            level_cap,
            format,
        })
    }

    /// Levels above the cap are a resource error.
    pub fn check_level(&self, n: usize) -> Result<usize, CliError> {
        if n > self.level_cap {
            return Err(Error::ResourceCap {
                what: "level",
                requested: n.to_string(),
                cap: self.level_cap as u64,
            }
            .into());
        }
        Ok(n)
    }
}
