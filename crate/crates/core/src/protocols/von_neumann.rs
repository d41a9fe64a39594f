use super::{conditional_z_scores_for, EngineComparison, Relation, ScenarioReport, SHARP_READOUT, Z_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_diff};
use crate::measurement::{conditional_law, GaussianIndicator};
use crate::sampler::{push_symplectic, sample_states};
use crate::state::{quadrature_state, GaussianState};
use crate::symplectic::{make_symplectic, SymplecticKind};

/// Von Neumann measurement model: the system (mode 0, vacuum-analogue)
/// couples to a position-squeezed probe (mode 1) through
/// `q_B ← q_B + κ q_A`, `p_A ← p_A − κ p_B`, `κ = χt`, and the probe
/// position is read out sharply.
pub fn run_von_neumann(kappa: f64, probe_r: f64, lambda: f64, count: usize, seed: u64) -> Result<ScenarioReport> {
    if !(kappa > 0.0) {
        return Err(Error::Config(format!("coupling strength must be positive, got {kappa}")));
    }
    let mut rep = ScenarioReport::new("von-neumann");
    rep.param("kappa", kappa).param("probeSqueezing", probe_r).param("lambda", lambda);

    let system = GaussianState::vacuum(lambda, 1)?;
    let probe = quadrature_state(0.0, 0.0, probe_r, lambda)?;
    let joint = system.tensor(&probe)?;
    let coupling = make_symplectic(&SymplecticKind::QpCoupling { strength: kappa }, &[0, 1], 2)?;
    let coupled = joint.transform(&coupling, None)?;
    let readout = GaussianIndicator::homodyne(1, 0.0, SHARP_READOUT, lambda)?;
    let law = conditional_law(&coupled, &readout)?;

    // (i) Effective response on the system: the readout of κq_A + q_B + ε
    // is a position readout of q_A with variance (Var q_B + Var ε)/κ².
    let probe_q = probe.moments()[(0, 0)];
    let readout_q = readout.moments()[(0, 0)];
    let effective = law.outcome_moments[(0, 0)] / (kappa * kappa) - system.moments()[(0, 0)];
    let effective_closed = (probe_q + readout_q) / (kappa * kappa);
    let direct = GaussianIndicator::homodyne(0, 0.0, SHARP_READOUT, lambda)?;
    let direct_q = {
        let v = system.moments()[(0, 0)];
        v - v * v / (v + direct.moments()[(0, 0)])
    };

    // (ii) Momentum disturbance.
    let marginal = coupled.marginal(&[0])?;
    let p_growth = marginal.moments()[(1, 1)] - system.moments()[(1, 1)];
    let p_growth_closed = kappa * kappa * probe.moments()[(1, 1)];

    // (iii) Cut invariance: averaging the conditioned system over outcomes
    // reproduces the unconditioned marginal of the coupled state.
    let averaged = &law.posterior_moments + &law.gain * &law.outcome_moments * law.gain.transpose();
    let cut_gap = max_abs_diff(&averaged, marginal.moments());

    rep.stat("effectiveIndicatorVarQ", effective)
        .stat("posteriorVarQ", law.posterior_moments[(0, 0)])
        .stat("posteriorVarP", law.posterior_moments[(1, 1)])
        .stat("directReadoutPosteriorVarQ", direct_q)
        .stat("momentumVarianceGrowth", p_growth)
        .stat("cutInvarianceGap", cut_gap);
    let scale = max_abs(marginal.moments()).max(1.0);
    rep.analytic("effective-indicator-variance", effective_closed, effective, 1e-6, Relation::Relative)
        .analytic("momentum-variance-growth", p_growth_closed, p_growth, 1e-12, Relation::Relative)
        .analytic("cut-invariance", 0.0, cut_gap, 1e-10 * scale, Relation::Close);

    if count > 0 {
        let before = sample_states(&joint, count, seed)?;
        let after = push_symplectic(&before, &coupling, None)?;
        // Each system momentum moves by exactly −κ times its own probe momentum.
        let mut worst: f64 = 0.0;
        for (z0, z1) in before.rows().zip(after.rows()) {
            worst = worst.max((z1[1] - z0[1] + kappa * z0[3]).abs() / (1.0 + z0[1].abs() + kappa * z0[3].abs()));
        }
        rep.stat("momentumShiftBookkeepingError", worst);
        rep.check(super::Check::new(
            "momentum-shift-equals-kappa-times-probe-momentum",
            0.0,
            worst,
            1e-14,
            Relation::Close,
            super::Provenance::Sampled,
        ));
        let z = conditional_z_scores_for("von-neumann", &coupled, &after, &readout, seed)?;
        rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    }
    Ok(rep)
}
