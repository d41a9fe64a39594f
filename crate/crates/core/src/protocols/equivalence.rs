use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    conditional_z_scores, moment_z_scores, run_epr, run_noncommutativity, run_teleportation, run_von_neumann,
    EngineComparison, Relation, ScenarioReport, Z_THRESHOLD,
};
use crate::channel::{dilation_induced_channel, GaussianChannel};
use crate::error::{Error, Result};
use crate::measurement::GaussianIndicator;
use crate::random::{random_valid_state, rng};
use crate::sampler::{
    empirical_moments, push_channel, push_noisy_linear, push_symplectic, sample_states, simulate_measurement,
};
use crate::state::{epr_state, quadrature_state, GaussianState};
use crate::symplectic::{make_symplectic, random_symplectic, SymplecticKind};

/// Scenarios that can be run through both engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Vacuum-analogue state read out by a heterodyne-type indicator.
    PrepareMeasure,
    /// Symplectic evolution only.
    Deterministic,
    /// Thermal-loss channel on a squeezed, displaced state.
    Channel,
    Epr,
    Teleportation,
    Noncommutativity,
    VonNeumann,
    EntanglementSwap,
    /// The mixture counterexample; not Gaussian, so not supported.
    AppendixA,
    /// Negative control: [`Scenario::Channel`] with the sampled leg using
    /// half the channel noise. Expected to fail.
    CorruptedChannel,
}

impl Scenario {
    /// The default suite: every supported scenario, no negative control.
    pub const SUITE: [Scenario; 8] = [
        Scenario::PrepareMeasure,
        Scenario::Deterministic,
        Scenario::Channel,
        Scenario::Epr,
        Scenario::Teleportation,
        Scenario::Noncommutativity,
        Scenario::VonNeumann,
        Scenario::EntanglementSwap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::PrepareMeasure => "prepare-measure",
            Scenario::Deterministic => "deterministic",
            Scenario::Channel => "channel",
            Scenario::Epr => "epr",
            Scenario::Teleportation => "teleportation",
            Scenario::Noncommutativity => "noncommutativity",
            Scenario::VonNeumann => "von-neumann",
            Scenario::EntanglementSwap => "entanglement-swap",
            Scenario::AppendixA => "appendix-a",
            Scenario::CorruptedChannel => "corrupted-channel",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::SUITE
            .iter()
            .chain(&[Scenario::AppendixA, Scenario::CorruptedChannel])
            .find(|sc| sc.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Runs one scenario through the analytic and the sampled engine.
pub fn equivalence_report(scenario: Scenario, count: usize, seed: u64) -> Result<ScenarioReport> {
    if count < 3 {
        return Err(Error::Config("engine comparison needs at least 3 samples".into()));
    }
    let mut rep = match scenario {
        Scenario::PrepareMeasure => prepare_measure(count, seed)?,
        Scenario::Deterministic => deterministic(count, seed)?,
        Scenario::Channel => channel(count, seed, false)?,
        Scenario::CorruptedChannel => channel(count, seed, true)?,
        Scenario::Epr => run_epr(2.0, 0.4, 1.0, count, seed)?,
        Scenario::Teleportation => {
            let input = quadrature_state(0.7, 1.0, 0.5, 1.0)?;
            run_teleportation(&input, 4.0, count, seed)?.0
        }
        Scenario::Noncommutativity => run_noncommutativity(&quadrature_state(0.0, 0.5, 1.0, 1.0)?, 100.0, count, seed)?,
        Scenario::VonNeumann => run_von_neumann(1.0, 1.0, 1.0, count, seed)?,
        Scenario::EntanglementSwap => swap(count, seed)?,
        Scenario::AppendixA => {
            return Err(Error::UnsupportedScenario(
                "appendix-a prepares a non-Gaussian mixture; the engines are compared on Gaussian scenarios only"
                    .into(),
            ))
        }
    };
    rep.scenario_name = scenario.name().to_string();
    Ok(rep)
}

fn prepare_measure(count: usize, seed: u64) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("prepare-measure");
    let state = GaussianState::vacuum(1.0, 1)?;
    let ind = GaussianIndicator::heterodyne(0, 1.0)?;
    let set = sample_states(&state, count, seed)?;
    let outcomes = simulate_measurement(&set, &ind, 1.0, seed)?;
    let stats = empirical_moments(&outcomes.as_samples(seed))?;
    let expected = state.moments() + ind.moments();
    rep.stat("outcomeVarQ", stats.empirical_moments[(0, 0)]);
    let z = moment_z_scores("outcome", &stats, Some(state.means()), &expected);
    rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    Ok(rep)
}

fn deterministic(count: usize, seed: u64) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("deterministic");
    let state = random_valid_state(2, 1.0, 1.0, &mut rng(17))?;
    let map = random_symplectic(2, 23)?;
    let shift = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0]);
    let set = sample_states(&state, count, seed)?;
    let pushed = push_symplectic(&set, &map, Some(&shift))?;
    let before = empirical_moments(&set)?;
    let after = empirical_moments(&pushed)?;

    // The flow acts exactly on every point, so the pushed cloud's moments
    // are the transformed moments of the original cloud.
    let m = map.action();
    let exact_v = &m * &before.empirical_moments * m.transpose();
    let exact_d = &m * &before.empirical_mean + &shift;
    let exact = moment_z_scores("pushed-vs-transformed-cloud", &after, Some(&exact_d), &exact_v);
    let worst = exact.iter().map(|z| z.z.abs()).fold(0.0, f64::max);
    rep.stat("cloudIdentityMaxAbsZ", worst);
    rep.check(super::Check::new(
        "cloud-identity-z",
        0.0,
        worst,
        1e-6,
        Relation::Close,
        super::Provenance::Sampled,
    ));

    let analytic = state.transform(&map, Some(&shift))?;
    let mut z = moment_z_scores("pushed", &after, Some(analytic.means()), analytic.moments());
    z.extend(exact);
    rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    Ok(rep)
}

/// Loss `η = 1/2` into a thermal environment with `ν = 4`.
pub(crate) fn thermal_loss() -> Result<GaussianChannel> {
    let bs = make_symplectic(&SymplecticKind::BeamSplitter { theta: std::f64::consts::FRAC_PI_4 }, &[0, 1], 2)?;
    dilation_induced_channel(&bs, &GaussianState::thermal(1.0, 1, 4.0)?, 1)
}

fn channel(count: usize, seed: u64, corrupt: bool) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("channel");
    let ch = thermal_loss()?.with_delta(DVector::from_vec(vec![0.3, -0.2]))?;
    let input = quadrature_state(0.3, 1.0, 0.5, 1.0)?;
    let analytic = ch.apply(&input)?;
    let set = sample_states(&input, count, seed)?;
    let pushed = if corrupt {
        rep.warn("negative control: sampled leg uses half the channel noise");
        push_noisy_linear(&set, &ch.x().transpose(), ch.delta(), &(ch.noise() * 0.5), seed)?
    } else {
        push_channel(&set, &ch, seed)?
    };
    let stats = empirical_moments(&pushed)?;
    rep.param("corrupted", if corrupt { 1.0 } else { 0.0 });
    let z = moment_z_scores("output", &stats, Some(analytic.means()), analytic.moments());
    rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    Ok(rep)
}

fn swap(count: usize, seed: u64) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("entanglement-swap");
    let r = 1.0;
    let target = random_valid_state(2, 1.0, 1.0, &mut rng(31))?;
    let joint = epr_state(r, 1.0)?.tensor(&target)?;
    let ind = GaussianIndicator::correlated_pair([1, 2], r, 1.0)?;
    rep.param("r", r);
    let z = conditional_z_scores("swap", &joint, &ind, count, seed)?;
    rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceRow {
    pub scenario: String,
    pub seed: u64,
    pub max_abs_z: f64,
    pub worst_statistic: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceSummary {
    pub sample_count: usize,
    pub threshold: f64,
    pub rows: Vec<EquivalenceRow>,
    pub pass: bool,
}

impl EquivalenceSummary {
    pub fn failing(&self) -> impl Iterator<Item = &EquivalenceRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

/// Runs every `(scenario, seed)` pair; overall pass iff every report passes.
pub fn equivalence_suite(
    scenarios: &[Scenario],
    count: usize,
    seeds: &[u64],
) -> Result<(EquivalenceSummary, Vec<ScenarioReport>)> {
    if scenarios.is_empty() || seeds.is_empty() {
        return Err(Error::Config("equivalence suite needs at least one scenario and one seed".into()));
    }
    let jobs: Vec<(Scenario, u64)> = scenarios.iter().flat_map(|&s| seeds.iter().map(move |&k| (s, k))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(s, k)| equivalence_report(s, count, k))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<EquivalenceRow> = jobs
        .iter()
        .zip(&reports)
        .map(|(&(_, seed), rep)| {
            let cmp = rep.engine_comparison.as_ref().expect("every equivalence report carries a comparison");
            let worst = cmp
                .z_scores
                .iter()
                .max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
                .map(|z| z.statistic.clone())
                .unwrap_or_default();
            EquivalenceRow {
                scenario: rep.scenario_name.clone(),
                seed,
                max_abs_z: cmp.max_abs_z,
                worst_statistic: worst,
                pass: rep.pass,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok((EquivalenceSummary { sample_count: count, threshold: Z_THRESHOLD, rows, pass }, reports))
}
