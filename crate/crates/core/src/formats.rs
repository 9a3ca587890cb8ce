//! File formats for spaces, measures, tuples and multisets.
//!
//! Spaces are JSON, either `{"kind":"matrix","dist":[[...],...]}` or
//! `{"kind":"euclidean","norm":"l1"|"l2"|"linf","points":[[...],...]}`, or
//! a headerless CSV square grid of distances. Measures are
//! `{"support":[i,...],"weights":[w,...]}` with an optional exact block
//! `"den": D, "num": [k,...]` that takes precedence over `weights`. Tuples
//! and multisets are JSON arrays of point indices.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::measures::DiscreteMeasure;
use crate::power::{MultiSet, Tuple};
use crate::spaces::{EuclideanSpace, FiniteMetricSpace, Norm};
use crate::TAU_METRIC;

/// Errors raised while reading inputs.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

impl FormatError {
    fn parse(what: &'static str, message: impl ToString) -> Self {
        FormatError::Parse {
            what,
            message: message.to_string(),
        }
    }

    /// Machine-readable error code such as `parse.measure` or `io.not_found`.
    pub fn code(&self) -> String {
        match self {
            FormatError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => "io.not_found".into(),
            FormatError::Io { .. } => "io.read".into(),
            FormatError::Parse { what, .. } => format!("parse.{what}"),
            FormatError::Invalid(e) => format!("invalid.{}", e.code()),
        }
    }
}

/// Reads a whole file, returning its contents and their SHA-256 digest.
pub fn read_input(path: &Path) -> Result<(String, String), FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let digest = sha256_hex(text.as_bytes());
    Ok((text, digest))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SpaceFile {
    Matrix {
        dist: Vec<Vec<f64>>,
        #[serde(default)]
        pseudometric: bool,
    },
    Euclidean {
        norm: Norm,
        points: Vec<Vec<f64>>,
    },
}

/// A parsed space; the point coordinates are kept when the input had them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceInput {
    pub space: Arc<FiniteMetricSpace>,
    pub euclidean: Option<EuclideanSpace>,
}

/// Parses a space from JSON, or from CSV when the text does not start with `{`.
pub fn parse_space(text: &str) -> Result<SpaceInput, FormatError> {
    if !text.trim_start().starts_with('{') {
        let space = FiniteMetricSpace::checked(parse_csv_grid(text)?, false, TAU_METRIC)?;
        return Ok(SpaceInput {
            space: Arc::new(space),
            euclidean: None,
        });
    }
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| FormatError::parse("space", e))?;
    match file {
        SpaceFile::Matrix { dist, pseudometric } => Ok(SpaceInput {
            space: Arc::new(FiniteMetricSpace::checked(dist, pseudometric, TAU_METRIC)?),
            euclidean: None,
        }),
        SpaceFile::Euclidean { norm, points } => {
            let dim = points.first().map(Vec::len).unwrap_or(0);
            let e = EuclideanSpace::new(dim, norm, points)?;
            Ok(SpaceInput {
                space: Arc::new(e.metric_space()),
                euclidean: Some(e),
            })
        }
    }
}

fn parse_csv_grid(text: &str) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FormatError::parse("space", e))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| FormatError::parse("space", format!("{f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    support: Vec<usize>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    den: Option<i64>,
    #[serde(default)]
    num: Option<Vec<i64>>,
}

/// Parses a measure on `space`.
pub fn parse_measure(text: &str, space: &Arc<FiniteMetricSpace>) -> Result<DiscreteMeasure, FormatError> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| FormatError::parse("measure", e))?;
    let m = match (file.den, file.num, file.weights) {
        (Some(den), Some(num), _) => DiscreteMeasure::from_rational(space.clone(), file.support, num, den)?,
        (None, None, Some(w)) => DiscreteMeasure::new(space.clone(), file.support, w)?,
        (None, None, None) => return Err(FormatError::parse("measure", "missing weights")),
        _ => {
            return Err(FormatError::parse(
                "measure",
                "\"den\" and \"num\" must appear together",
            ))
        }
    };
    Ok(m)
}

/// JSON form of a measure, with the exact block when available.
pub fn measure_to_json(p: &DiscreteMeasure) -> Value {
    let mut v = json!({ "support": p.support(), "weights": p.weights() });
    if let Some((den, num)) = p.rational_block() {
        v["den"] = json!(den);
        v["num"] = json!(num);
    }
    v
}

fn parse_indices(text: &str, what: &'static str) -> Result<Vec<usize>, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::parse(what, e))
}

pub fn parse_tuple(text: &str, space: &Arc<FiniteMetricSpace>) -> Result<Tuple, FormatError> {
    Ok(Tuple::new(space.clone(), parse_indices(text, "tuple")?)?)
}

/// Parses a multiset; entries are sorted on ingestion.
pub fn parse_multiset(text: &str, space: &Arc<FiniteMetricSpace>) -> Result<MultiSet, FormatError> {
    Ok(MultiSet::new(space.clone(), parse_indices(text, "multiset")?)?)
}
