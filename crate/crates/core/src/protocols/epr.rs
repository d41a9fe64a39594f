use nalgebra::DVector;

use super::{conditional_z_scores, EngineComparison, Relation, ScenarioReport, SHARP_READOUT, Z_THRESHOLD};
use crate::error::{Error, Result};
use crate::measurement::{condition, conditional_law, GaussianIndicator};
use crate::state::epr_state;
use crate::symplectic::{make_symplectic, SymplecticKind};

/// Measures the `θ`-quadrature of `A` in the regularized correlated state
/// and reports what is learned about `B` (no disturbance of `B` involved).
///
/// Because `q_A ≈ q_B` and `p_A ≈ −p_B`, reading `q_θ` on `A` localizes
/// `q_{−θ}` on `B`; that is the "correlated" quadrature below.
pub fn run_epr(r: f64, theta: f64, lambda: f64, count: usize, seed: u64) -> Result<ScenarioReport> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("squeezing must be non-negative, got {r}")));
    }
    let mut rep = ScenarioReport::new("epr");
    rep.param("r", r).param("theta", theta).param("lambda", lambda).param("readoutSqueezing", SHARP_READOUT);

    // Rotate A into the measured frame rather than rotating the sharp
    // readout: a rotated e^{±2r_read} covariance mixes entries of wildly
    // different size and the conditioning loses most of its precision.
    let to_frame = make_symplectic(&SymplecticKind::Rotation { theta }, &[0], 2)?;
    let state = epr_state(r, lambda)?.transform(&to_frame, None)?;
    let ind = GaussianIndicator::homodyne(0, 0.0, SHARP_READOUT, lambda)?;
    let law = conditional_law(&state, &ind)?;
    let post = condition(&state, &ind, &[0.0, 0.0])?;
    let post = post.posterior.as_gaussian().expect("Gaussian conditioning").clone();

    let u = DVector::from_vec(vec![(-theta).cos(), (-theta).sin()]);
    let w = DVector::from_vec(vec![-(-theta).sin(), (-theta).cos()]);
    let quad = |v: &DVector<f64>| (v.transpose() * &law.posterior_moments * v)[(0, 0)];
    let (corr, conj) = (quad(&u), quad(&w));
    let b = state.marginal(&[1])?;
    let prior_corr = (u.transpose() * b.moments() * &u)[(0, 0)];

    // Scalar oracle in the measured frame: with c = cosh 2r, s = sinh 2r and
    // readout variance ε (all in units of λ/2 along q, λ²/2 along p),
    // Var' = (c² − s² + cε)/(c + ε) · scale, with c² − s² = 1 taken exactly.
    let c = (2.0 * r).cosh();
    let eps = (-2.0 * SHARP_READOUT).exp();
    let closed = |scale: f64| scale * (1.0 + c * eps) / (2.0 * (c + eps));
    let expected_corr = if theta.sin().abs() < 1e-12 {
        Some(closed(1.0))
    } else if theta.cos().abs() < 1e-12 {
        Some(closed(lambda * lambda))
    } else {
        None
    };

    rep.stat("conditionalVarCorrelated", corr)
        .stat("conditionalVarConjugate", conj)
        .stat("marginalVarB", prior_corr)
        .stat("marginalVarBq", b.moments()[(0, 0)])
        .stat("marginalVarBp", b.moments()[(1, 1)]);

    rep.analytic("marginal-B-q-variance", c / 2.0, b.moments()[(0, 0)], 1e-12, Relation::Relative)
        .analytic("marginal-B-p-variance", c * lambda * lambda / 2.0, b.moments()[(1, 1)], 1e-12, Relation::Relative)
        .analytic("conditional-not-wider-than-prior", prior_corr, corr, 0.0, Relation::AtMost);
    if let Some(e) = expected_corr {
        // The Schur complement cancels two O(c) terms, so rounding is O(ε_mach · c).
        rep.analytic("conditional-variance-closed-form", e, corr, 1e-14 * c, Relation::Close);
    }
    let v = post.validate(1e-9 * c);
    rep.analytic("posterior-cup-min-eigenvalue", 0.0, v.min_eigenvalue, 1e-9 * c, Relation::AtLeast);

    if count > 0 {
        let z = conditional_z_scores("epr", &state, &ind, count, seed)?;
        rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    }
    Ok(rep)
}
