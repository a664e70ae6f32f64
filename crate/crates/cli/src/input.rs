//! Reading JSON arguments and mapping errors to exit codes.

use std::fmt;
use std::path::Path;

use fpa_core::dist::{CdfSpec, PiecewisePolyCdf};
use fpa_core::numeric::parse_rational;
use rug::Rational;
use serde::de::DeserializeOwned;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or malformed input; exit 2.
    Usage(String),
    /// Well-formed input that fails a check, or a solver error; exit 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<fpa_core::Error> for CliError {
    fn from(e: fpa_core::Error) -> Self {
        match e {
            fpa_core::Error::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file path.
pub fn read_json_arg(arg: &str, what: &str) -> CliResult<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Usage(format!("--{what}: cannot read {arg}: {e}")))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("--{what}: {e}")))
}

pub fn cdf_spec(arg: &str) -> CliResult<CdfSpec> {
    let text = read_json_arg(arg, "cdf")?;
    CdfSpec::from_json(&text).map_err(|e| CliError::Usage(format!("--cdf: {e}")))
}

pub fn load_cdf(arg: &str) -> CliResult<PiecewisePolyCdf> {
    Ok(cdf_spec(arg)?.build()?)
}

pub fn rational(s: &str, what: &str) -> CliResult<Rational> {
    parse_rational(s).map_err(|e| CliError::Usage(format!("--{what}: {e}")))
}

/// A JSON array of rationals, given inline or as a file.
pub fn rational_list(arg: &str, what: &str) -> CliResult<Vec<Rational>> {
    let text = read_json_arg(arg, what)?;
    let raw: Vec<serde_json::Value> = parse_json(&text, what)?;
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => return Err(CliError::Usage(format!("--{what}[{i}]: expected a rational, got {other}"))),
            };
            parse_rational(&s).map_err(|e| CliError::Usage(format!("--{what}[{i}]: {e}")))
        })
        .collect()
}
