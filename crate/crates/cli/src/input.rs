use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;
use yamabe_core::bundle::{BundleError, BundleSpec, BundleSpecFile};
use yamabe_core::charclass::{CharClassError, PontryaginData};
use yamabe_core::cocycle::{Cocycle, CocycleError, CocycleFile};
use yamabe_core::constants::ConstantsError;
use yamabe_core::metric::{MetricError, MetricFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: BundleError },
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    CharClass(#[from] CharClassError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn from_value<T: DeserializeOwned>(path: &Path, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

pub fn load_bundle(path: &Path) -> Result<BundleSpec> {
    let text = read(path)?;
    let file: BundleSpecFile = parse_json(path, &text)?;
    file.to_spec().map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

/// A base given on its own or as the `base` field of a bundle spec.
pub fn load_base(path: &Path) -> Result<PontryaginData> {
    let text = read(path)?;
    let mut v: Value = parse_json(path, &text)?;
    if let Some(base) = v.get_mut("base") {
        v = base.take();
    }
    let base: PontryaginData = from_value(path, v)?;
    base.validate()?;
    Ok(base)
}

/// A cocycle given on its own or inside a bundle spec; a bare cocycle file
/// takes its rank from `rank` or else from its first transition.
pub fn load_cocycle(path: &Path, rank: Option<usize>) -> Result<(Cocycle, Option<PontryaginData>)> {
    let text = read(path)?;
    let v: Value = parse_json(path, &text)?;
    if v.get("cocycle").is_some() {
        let file: BundleSpecFile = from_value(path, v)?;
        let spec = file.to_spec().map_err(|source| CliError::Input {
            path: path.to_owned(),
            source,
        })?;
        return Ok((spec.cocycle, Some(spec.base)));
    }
    let file: CocycleFile = from_value(path, v)?;
    let rank = match rank {
        Some(r) => r,
        None => file
            .transitions
            .values()
            .next()
            .map(|t| t.linear.size())
            .ok_or_else(|| CliError::Usage("cocycle has no transitions; pass --rank".into()))?,
    };
    Ok((file.to_cocycle(rank)?, None))
}

pub fn load_metric(path: &Path) -> Result<MetricFile> {
    let text = read(path)?;
    parse_json(path, &text)
}
