use nalgebra::{DMatrix, DVector};

use super::{Relation, ScenarioReport};
use crate::error::Result;
use crate::measurement::{condition, mixture_condition, GaussianIndicator};
use crate::mixture::MaxEntCounterexample;

/// Parameters of the counterexample showing why the max-ent condition is
/// needed: a four-peaked distribution satisfying the uncertainty
/// constraint, measured with a valid indicator, leaves `B` in a state that
/// violates it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixAParams {
    pub q0: f64,
    pub p0: f64,
    pub dq: f64,
    pub dp: f64,
    /// Indicator widths `δ′q`, `δ′p`.
    pub indicator_dq: f64,
    pub indicator_dp: f64,
    pub lambda: f64,
}

impl Default for AppendixAParams {
    fn default() -> Self {
        AppendixAParams { q0: 100.0, p0: 100.0, dq: 0.01, dp: 0.01, indicator_dq: 1.0, indicator_dp: 1.0, lambda: 1.0 }
    }
}

pub fn run_appendix_a(p: &AppendixAParams) -> Result<ScenarioReport> {
    let mut rep = ScenarioReport::new("appendix-a");
    rep.param("q0", p.q0)
        .param("p0", p.p0)
        .param("dq", p.dq)
        .param("dp", p.dp)
        .param("indicatorDq", p.indicator_dq)
        .param("indicatorDp", p.indicator_dp)
        .param("lambda", p.lambda);
    let ex = MaxEntCounterexample { q0: p.q0, p0: p.p0, dq: p.dq, dp: p.dp, lambda: p.lambda };
    if !ex.ordering_holds(p.indicator_dq, p.indicator_dp) {
        rep.warn("scale ordering q0 ≫ δ′q ≫ δq, p0 ≫ δ′p ≫ δp does not hold; the construction may not apply");
    }
    let tol = 1e-9;
    let mix = ex.correlated()?;
    let prior = mix.validate(tol);

    let ind = GaussianIndicator::displaced(
        vec![0],
        DMatrix::from_diagonal(&DVector::from_vec(vec![p.indicator_dq.powi(2), p.indicator_dp.powi(2)])),
    )?;
    let indicator = crate::measurement::indicator_valid(&ind, p.lambda, tol);
    let y = [p.q0, p.p0];

    let post = mixture_condition(&mix, &ind, &y)?;
    let (_, v_b) = post.posterior.moments();
    let product = (v_b[(0, 0)] * v_b[(1, 1)]).sqrt();
    let verdict = post.posterior.validate(tol);

    // Contrast: the max-ent state with the same total moments.
    let matched = mix.moment_matched()?;
    let contrast = condition(&matched, &ind, &y)?;
    let contrast_rep = contrast.posterior.validate(tol);

    rep.stat("priorCupMinEigenvalue", prior.min_eigenvalue)
        .stat("indicatorCupMinEigenvalue", indicator.min_eigenvalue)
        .stat("posteriorDqB", v_b[(0, 0)].sqrt())
        .stat("posteriorDpB", v_b[(1, 1)].sqrt())
        .stat("posteriorUncertaintyProduct", product)
        .stat("posteriorCupMinEigenvalue", verdict.min_eigenvalue)
        .stat("contrastCupMinEigenvalue", contrast_rep.min_eigenvalue)
        .stat("posteriorWeightDominant", post.posterior.as_mixture().map_or(1.0, |m| {
            m.weights().iter().copied().fold(0.0, f64::max)
        }));
    rep.analytic("prior-satisfies-cup", 0.0, prior.min_eigenvalue, tol, Relation::AtLeast)
        .analytic("indicator-is-valid", 0.0, indicator.min_eigenvalue, tol, Relation::AtLeast)
        .analytic("posterior-uncertainty-product-below-bound", p.lambda / 2.0, product, 0.0, Relation::Below)
        .analytic("posterior-violates-cup", 0.0, verdict.min_eigenvalue, 0.0, Relation::Below)
        .analytic("max-ent-contrast-posterior-valid", 0.0, contrast_rep.min_eigenvalue, tol, Relation::AtLeast);
    Ok(rep)
}
