use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::sampler::{z_score, SampleStats};

/// Where a checked number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Sampled,
}

/// How `observed` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|observed − expected| ≤ tolerance`
    Close,
    /// `|observed − expected| ≤ tolerance · max(|expected|, floor)` with the
    /// floor at the same value as the tolerance.
    Relative,
    /// `observed ≤ expected + tolerance`
    AtMost,
    /// `observed < expected`
    Below,
    /// `observed ≥ expected − tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub provenance: Provenance,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        expected: f64,
        observed: f64,
        tolerance: f64,
        relation: Relation,
        provenance: Provenance,
    ) -> Self {
        let pass = match relation {
            Relation::Close => (observed - expected).abs() <= tolerance,
            Relation::Relative => (observed - expected).abs() <= tolerance * expected.abs().max(tolerance),
            Relation::AtMost => observed <= expected + tolerance,
            Relation::Below => observed < expected,
            Relation::AtLeast => observed >= expected - tolerance,
        };
        Check { name: name.into(), expected, observed, tolerance, relation, provenance, pass }
    }
}

/// One engine-comparison statistic: `z = (sampled − analytic)/SE`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ZScore {
    pub statistic: String,
    pub analytic: f64,
    pub sampled: f64,
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EngineComparison {
    pub sample_count: usize,
    pub seed: u64,
    pub threshold: f64,
    pub z_scores: Vec<ZScore>,
    pub max_abs_z: f64,
    pub pass: bool,
}

impl EngineComparison {
    pub fn new(sample_count: usize, seed: u64, threshold: f64, z_scores: Vec<ZScore>) -> Self {
        let max_abs_z = z_scores.iter().map(|z| z.z.abs()).fold(0.0, f64::max);
        EngineComparison { sample_count, seed, threshold, pass: max_abs_z < threshold, z_scores, max_abs_z }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioReport {
    pub scenario_name: String,
    pub parameters: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_comparison: Option<EngineComparison>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl ScenarioReport {
    pub fn new(name: &str) -> Self {
        ScenarioReport {
            scenario_name: name.to_string(),
            parameters: BTreeMap::new(),
            statistics: BTreeMap::new(),
            checks: Vec::new(),
            engine_comparison: None,
            warnings: Vec::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, name: &str, value: f64) -> &mut Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn stat(&mut self, name: &str, value: f64) -> &mut Self {
        self.statistics.insert(name.to_string(), value);
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.checks.push(check);
        self
    }

    pub fn analytic(&mut self, name: &str, expected: f64, observed: f64, tol: f64, rel: Relation) -> &mut Self {
        self.check(Check::new(name, expected, observed, tol, rel, Provenance::Analytic))
    }

    /// Attaches the engine comparison and turns it into one sampled check
    /// on the largest `|z|`.
    pub fn compare(&mut self, cmp: EngineComparison) -> &mut Self {
        self.check(Check::new(
            "engine-max-abs-z",
            cmp.threshold,
            cmp.max_abs_z,
            0.0,
            Relation::Below,
            Provenance::Sampled,
        ));
        self.engine_comparison = Some(cmp);
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) -> &mut Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.get(name).copied()
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `scenario,check,expected,observed,tolerance,pass`, one row per check.
    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> Result<()> {
        write_checks_csv(std::slice::from_ref(self), w, header)
    }
}

pub fn write_checks_csv<W: Write>(reports: &[ScenarioReport], w: W, header: bool) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if header {
        out.write_record(["scenario", "check", "expected", "observed", "tolerance", "pass"])
            .map_err(csv_err)?;
    }
    for r in reports {
        for c in &r.checks {
            out.write_record([
                r.scenario_name.clone(),
                c.name.clone(),
                format!("{:e}", c.expected),
                format!("{:e}", c.observed),
                format!("{:e}", c.tolerance),
                c.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Parse(e.to_string())
}

/// z-scores for every mean component and upper-triangle moment entry.
pub fn moment_z_scores(
    label: &str,
    stats: &SampleStats,
    mean: Option<&DVector<f64>>,
    moments: &DMatrix<f64>,
) -> Vec<ZScore> {
    let mut out = Vec::new();
    if let Some(d) = mean {
        for i in 0..d.len() {
            let (obs, se) = (stats.empirical_mean[i], stats.mean_standard_errors[i]);
            out.push(ZScore {
                statistic: format!("{label}.mean[{i}]"),
                analytic: d[i],
                sampled: obs,
                standard_error: se,
                z: signed_z(obs, d[i], se),
            });
        }
    }
    for i in 0..moments.nrows() {
        for j in i..moments.ncols() {
            let (obs, se) = (stats.empirical_moments[(i, j)], stats.standard_errors[(i, j)]);
            out.push(ZScore {
                statistic: format!("{label}.V[{i},{j}]"),
                analytic: moments[(i, j)],
                sampled: obs,
                standard_error: se,
                z: signed_z(obs, moments[(i, j)], se),
            });
        }
    }
    out
}

fn signed_z(observed: f64, expected: f64, se: f64) -> f64 {
    z_score(observed, expected, se).copysign(observed - expected)
}
