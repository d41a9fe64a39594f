//! Executable scenarios. Each run returns a [`ScenarioReport`] with
//! analytic checks and, when a sample count is given, a comparison against
//! the ontic Monte Carlo engine.

mod appendix_a;
mod cloning;
mod concentration;
mod epr;
mod equivalence;
mod noncommutativity;
mod report;
mod swap;
mod teleportation;
mod von_neumann;

pub use appendix_a::{run_appendix_a, AppendixAParams};
pub use cloning::run_no_cloning;
pub use concentration::run_concentration_check;
pub use epr::run_epr;
pub use equivalence::{equivalence_report, equivalence_suite, EquivalenceSummary, Scenario};
pub use noncommutativity::run_noncommutativity;
pub use report::{
    moment_z_scores, write_checks_csv, Check, EngineComparison, Provenance, Relation, ScenarioReport, ZScore,
};
pub use swap::run_entanglement_swap;
pub use teleportation::{run_teleportation, run_teleportation_with, teleportation_excess_noise, TeleportationOutput};
pub use von_neumann::run_von_neumann;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{mode_indices, subvector};
use crate::measurement::{conditional_law, GaussianIndicator};
use crate::sampler::{row_stats, sample_states, simulate_readout, OnticSampleSet};
use crate::state::GaussianState;

/// Default `|z|` threshold for engine agreement.
pub const Z_THRESHOLD: f64 = 4.0;

/// Squeezing of the readout indicators used to emulate sharp quadrature
/// measurements.
pub const SHARP_READOUT: f64 = 12.0;

/// Default regularization of perfectly correlated states.
pub const DEFAULT_R: f64 = 8.0;

/// Sampled check of the linear-Gaussian conditioning law. For each point
/// the residual `z_B − d_B − K(e − d_A)` of the unmeasured modes is formed
/// from the simulated effective outcome `e`; jointly with `e` it must have
/// mean `(0, d_A)` and block-diagonal moments `(V'_B, V_A + V_ind)`.
pub(crate) fn conditional_z_scores(
    label: &str,
    state: &GaussianState,
    ind: &GaussianIndicator,
    count: usize,
    seed: u64,
) -> Result<Vec<ZScore>> {
    let set = sample_states(state, count, seed)?;
    conditional_z_scores_for(label, state, &set, ind, seed)
}

/// As [`conditional_z_scores`] for points already drawn from `state`'s law.
pub(crate) fn conditional_z_scores_for(
    label: &str,
    state: &GaussianState,
    set: &OnticSampleSet,
    ind: &GaussianIndicator,
    seed: u64,
) -> Result<Vec<ZScore>> {
    let law = conditional_law(state, ind)?;
    let outcomes = simulate_readout(set, ind, seed)?;
    let a_idx = mode_indices(ind.target_modes());
    let b_idx = mode_indices(&law.remaining);
    let d_a = subvector(state.means(), &a_idx);
    let d_b = subvector(state.means(), &b_idx);
    let (kb, ka) = (b_idx.len(), a_idx.len());
    let width = kb + ka;
    let mut rows = Vec::with_capacity(set.len() * width);
    for (z, y) in set.rows().zip(outcomes.rows()) {
        let e = ind.effective_outcome(y)?;
        let innov = &e - &d_a;
        let pred = &law.gain * &innov;
        for (i, &bi) in b_idx.iter().enumerate() {
            rows.push(z[bi] - d_b[i] - pred[i]);
        }
        rows.extend(e.iter());
    }
    let stats = row_stats(width, &rows)?;
    let mut mean = DVector::zeros(width);
    mean.rows_mut(kb, ka).copy_from(&d_a);
    let mut moments = DMatrix::zeros(width, width);
    moments.view_mut((0, 0), (kb, kb)).copy_from(&law.posterior_moments);
    moments.view_mut((kb, kb), (ka, ka)).copy_from(&law.outcome_moments);
    Ok(moment_z_scores(label, &stats, Some(&mean), &moments))
}
