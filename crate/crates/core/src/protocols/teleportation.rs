use nalgebra::{DMatrix, DVector};

use super::{moment_z_scores, EngineComparison, Relation, ScenarioReport, SHARP_READOUT, Z_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, symmetrize};
use crate::measurement::{conditional_law, GaussianIndicator};
use crate::sampler::{empirical_moments, sample_states, simulate_readout, OnticSampleSet};
use crate::state::{epr_state, quadrature_state, GaussianState};
use crate::symplectic::{make_symplectic, SymplecticKind};

/// Bob's unconditional output and the pieces of the inference step.
#[derive(Debug, Clone)]
pub struct TeleportationOutput {
    pub output: GaussianState,
    /// `V_out − V_in`.
    pub excess_noise: DMatrix<f64>,
    /// Bob's moments conditioned on Alice's readout, before correction.
    pub conditional_moments: DMatrix<f64>,
}

/// Alice mixes the input `V` with her half `A` of the resource on a
/// balanced beam splitter, reads `q` of the first output port and `p` of
/// the second (that is, `q_V − q_A` and `p_V + p_A` up to `√2`), and Bob
/// displaces `B` by `√2` times the readouts (unit gain).
struct Protocol {
    joint: GaussianState,
    readout: GaussianIndicator,
    /// Bob's correction `G`: effective outcome ↦ displacement.
    correction: DMatrix<f64>,
}

impl Protocol {
    fn new(input: &GaussianState, r: f64, readout_r: f64) -> Result<Self> {
        if input.modes() != 1 {
            return Err(Error::Config("teleportation input must be a single mode".into()));
        }
        let lambda = input.lambda();
        let bs = make_symplectic(&SymplecticKind::BeamSplitter { theta: -std::f64::consts::FRAC_PI_4 }, &[0, 1], 3)?;
        let joint = input.tensor(&epr_state(r, lambda)?)?.transform(&bs, None)?;
        let q_read = quadrature_state(0.0, 0.0, readout_r, lambda)?;
        let p_read = quadrature_state(std::f64::consts::FRAC_PI_2, 0.0, readout_r, lambda)?;
        let readout = GaussianIndicator::displaced(vec![0, 1], direct_sum(q_read.moments(), p_read.moments()))?;
        let mut correction = DMatrix::zeros(2, 4);
        correction[(0, 0)] = std::f64::consts::SQRT_2;
        correction[(1, 3)] = std::f64::consts::SQRT_2;
        Ok(Protocol { joint, readout, correction })
    }

    /// `V_out = V'_B + (K + G) Σ_e (K + G)ᵀ`, `d_out = d_B + G d_A`.
    fn analytic(&self) -> Result<(GaussianState, DMatrix<f64>)> {
        let law = conditional_law(&self.joint, &self.readout)?;
        let kg = &law.gain + &self.correction;
        let v = symmetrize(&(&law.posterior_moments + &kg * &law.outcome_moments * kg.transpose()));
        let d = self.joint.means();
        let d_a = DVector::from_column_slice(&d.as_slice()[..4]);
        let d_b = DVector::from_column_slice(&d.as_slice()[4..]);
        let mean = d_b + &self.correction * d_a;
        Ok((GaussianState::new(self.joint.lambda(), mean, v)?, law.posterior_moments))
    }

    /// Ontic run: sample, read out, displace Bob's point.
    fn sampled(&self, count: usize, seed: u64) -> Result<OnticSampleSet> {
        let set = sample_states(&self.joint, count, seed)?;
        let outcomes = simulate_readout(&set, &self.readout, seed)?;
        let mut rows = Vec::with_capacity(2 * set.len());
        for (z, y) in set.rows().zip(outcomes.rows()) {
            let e = self.readout.effective_outcome(y)?;
            let shift = &self.correction * e;
            rows.push(z[4] + shift[0]);
            rows.push(z[5] + shift[1]);
        }
        OnticSampleSet::from_rows(2, rows, seed, "teleportation output")
    }
}

/// `E = diag(e^{−2r}, λ² e^{−2r}) + 2·ε·I` with readout variance
/// `ε = (λ/2) e^{−2 r_read}` along the measured quadratures.
pub fn teleportation_excess_noise(r: f64, readout_r: f64, lambda: f64) -> DMatrix<f64> {
    let e = (-2.0 * r).exp();
    let res = 2.0 * (lambda / 2.0) * (-2.0 * readout_r).exp();
    DMatrix::from_diagonal(&DVector::from_vec(vec![e + res, lambda * lambda * e + res]))
}

pub fn run_teleportation(input: &GaussianState, r: f64, count: usize, seed: u64) -> Result<(ScenarioReport, TeleportationOutput)> {
    run_teleportation_with(input, r, SHARP_READOUT, count, seed)
}

pub fn run_teleportation_with(
    input: &GaussianState,
    r: f64,
    readout_r: f64,
    count: usize,
    seed: u64,
) -> Result<(ScenarioReport, TeleportationOutput)> {
    let lambda = input.lambda();
    let tol = 1e-9;
    if !input.validate(tol).cup_satisfied {
        return Err(Error::Precondition("teleportation input violates the uncertainty constraint".into()));
    }
    let mut rep = ScenarioReport::new("teleportation");
    rep.param("r", r).param("readoutSqueezing", readout_r).param("lambda", lambda);

    let proto = Protocol::new(input, r, readout_r)?;
    let (output, conditional) = proto.analytic()?;
    let excess = output.moments() - input.moments();
    let closed = teleportation_excess_noise(r, readout_r, lambda);
    let fidelity = input.bhattacharyya_fidelity(&output)?;
    let scale = (2.0 * r).cosh();

    rep.stat("excessNoiseTrace", excess.trace())
        .stat("excessNoiseQ", excess[(0, 0)])
        .stat("excessNoiseP", excess[(1, 1)])
        .stat("fidelity", fidelity)
        .stat("bobConditionalVarQ", conditional[(0, 0)])
        .stat("bobConditionalVarP", conditional[(1, 1)]);

    // Bob's conditional moments cancel O(cosh 2r) entries, so double
    // precision leaves an absolute error of a few ε_mach·cosh 2r.
    let dev = (&excess - &closed).amax();
    rep.analytic("excess-noise-closed-form", 0.0, dev, 1e-14 + 1e-15 * scale, Relation::Close)
        .analytic(
            "output-mean-equals-input-mean",
            0.0,
            (output.means() - input.means()).amax(),
            1e-9 * (1.0 + input.means().amax()),
            Relation::Close,
        )
        .analytic("output-cup-min-eigenvalue", 0.0, output.validate(tol).min_eigenvalue, tol, Relation::AtLeast);

    if count > 0 {
        let set = proto.sampled(count, seed)?;
        let stats = empirical_moments(&set)?;
        let z = moment_z_scores("bob", &stats, Some(output.means()), output.moments());
        rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    }
    Ok((rep, TeleportationOutput { output, excess_noise: excess, conditional_moments: conditional }))
}
