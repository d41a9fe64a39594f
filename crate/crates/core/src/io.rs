//! JSON file formats for states, indicators and channels.
//!
//! Matrices are arrays of rows. A state file looks like
//!
//! ```json
//! { "lambda": 1.0, "means": [0, 0], "moments": [[0.5, 0], [0, 0.5]] }
//! ```
//!
//! with an optional `"convention": "gamma"` when the matrix is `γ = 2V`.
//! Indicator files add `"targetModes"` (and optionally `"outcomeMap"`,
//! `"baseMean"`); channel files carry `"X"`, `"N"` and optional `"delta"`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{channel_valid, GaussianChannel};
use crate::error::{Error, Result};
use crate::measurement::{indicator_valid, GaussianIndicator};
use crate::state::{GaussianState, ValidityReport};

/// Asymmetry accepted in files, relative to the largest entry.
pub const FILE_SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Plain covariance `V`.
    #[default]
    V,
    /// `γ = 2V`.
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StateFile {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    pub means: Vec<f64>,
    pub moments: Vec<Vec<f64>>,
    #[serde(default)]
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IndicatorFile {
    pub lambda: f64,
    pub target_modes: Vec<usize>,
    pub moments: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_map: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_mean: Option<Vec<f64>>,
    #[serde(default)]
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub lambda: f64,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub noise: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
}

/// Any of the three file kinds, told apart by their keys.
#[derive(Debug, Clone)]
pub enum Document {
    State(GaussianState),
    Indicator { indicator: GaussianIndicator, lambda: f64 },
    Channel(GaussianChannel),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::State(_) => "state",
            Document::Indicator { .. } => "indicator",
            Document::Channel(_) => "channel",
        }
    }

    pub fn validate(&self, tol: f64) -> ValidityReport {
        match self {
            Document::State(s) => s.validate(tol),
            Document::Indicator { indicator, lambda } => indicator_valid(indicator, *lambda, tol),
            Document::Channel(c) => channel_valid(c, tol),
        }
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse(format!("{what} must be a non-empty rectangular array of rows")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Parse(format!("lambda must be positive, got {lambda}")))
    }
}

fn to_v(m: DMatrix<f64>, convention: Convention) -> DMatrix<f64> {
    match convention {
        Convention::V => m,
        Convention::Gamma => m * 0.5,
    }
}

fn symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = crate::linalg::max_abs(m).max(1.0);
    if crate::linalg::asymmetry(m) > FILE_SYMMETRY_TOL * scale {
        return Err(Error::Parse(format!("{what} is not symmetric")));
    }
    Ok(())
}

impl StateFile {
    pub fn to_state(&self) -> Result<GaussianState> {
        check_lambda(self.lambda)?;
        let v = to_v(matrix(&self.moments, "moments")?, self.convention);
        symmetric(&v, "moments")?;
        if let Some(k) = self.modes {
            if 2 * k != v.nrows() {
                return Err(Error::Parse(format!("modes = {k} but moments are {0}x{0}", v.nrows())));
            }
        }
        GaussianState::with_symmetry_tol(
            self.lambda,
            DVector::from_vec(self.means.clone()),
            v,
            FILE_SYMMETRY_TOL,
        )
    }

    pub fn from_state(s: &GaussianState) -> Self {
        StateFile {
            lambda: s.lambda(),
            modes: Some(s.modes()),
            means: s.means().iter().copied().collect(),
            moments: rows(s.moments()),
            convention: Convention::V,
        }
    }
}

impl IndicatorFile {
    pub fn to_indicator(&self) -> Result<GaussianIndicator> {
        check_lambda(self.lambda)?;
        let v = to_v(matrix(&self.moments, "moments")?, self.convention);
        symmetric(&v, "moments")?;
        let k = v.nrows();
        let map = match &self.outcome_map {
            Some(m) => matrix(m, "outcomeMap")?,
            None => DMatrix::identity(k, k),
        };
        let base = DVector::from_vec(self.base_mean.clone().unwrap_or_else(|| vec![0.0; k]));
        GaussianIndicator::new(self.target_modes.clone(), map, base, crate::linalg::symmetrize(&v))
    }

    pub fn from_indicator(ind: &GaussianIndicator, lambda: f64) -> Self {
        IndicatorFile {
            lambda,
            target_modes: ind.target_modes().to_vec(),
            moments: rows(ind.moments()),
            outcome_map: Some(rows(ind.outcome_map())),
            base_mean: Some(ind.base_mean().iter().copied().collect()),
            convention: Convention::V,
        }
    }
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<GaussianChannel> {
        check_lambda(self.lambda)?;
        let x = matrix(&self.x, "X")?;
        let n = matrix(&self.noise, "N")?;
        symmetric(&n, "N")?;
        let n = crate::linalg::symmetrize(&n);
        let delta = self.delta.clone().map(DVector::from_vec).unwrap_or_else(|| DVector::zeros(x.ncols()));
        GaussianChannel::new(x, n, delta, self.lambda)
    }

    pub fn from_channel(ch: &GaussianChannel) -> Self {
        ChannelFile {
            lambda: ch.lambda(),
            x: rows(ch.x()),
            noise: rows(ch.noise()),
            delta: Some(ch.delta().iter().copied().collect()),
        }
    }
}

/// Parses any supported document from JSON text. Shape and parse
/// problems both come back as [`Error::Parse`].
pub fn parse_document(text: &str) -> Result<Document> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    let as_parse = |e: Error| match e {
        Error::Parse(_) => e,
        other => Error::Parse(other.to_string()),
    };
    if obj.contains_key("X") {
        let f: ChannelFile = serde_json::from_value(value)?;
        Ok(Document::Channel(f.to_channel().map_err(as_parse)?))
    } else if obj.contains_key("targetModes") {
        let f: IndicatorFile = serde_json::from_value(value)?;
        let indicator = f.to_indicator().map_err(as_parse)?;
        Ok(Document::Indicator { indicator, lambda: f.lambda })
    } else {
        let f: StateFile = serde_json::from_value(value)?;
        Ok(Document::State(f.to_state().map_err(as_parse)?))
    }
}

pub fn load_document(path: impl AsRef<Path>) -> Result<Document> {
    parse_document(&std::fs::read_to_string(path)?)
}

pub fn load_state(path: impl AsRef<Path>) -> Result<GaussianState> {
    match load_document(path)? {
        Document::State(s) => Ok(s),
        other => Err(Error::Parse(format!("expected a state file, found a {}", other.kind()))),
    }
}

pub fn state_to_json(s: &GaussianState) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(s)).expect("plain numbers serialize")
}

pub fn channel_to_json(ch: &GaussianChannel) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(ch)).expect("plain numbers serialize")
}
