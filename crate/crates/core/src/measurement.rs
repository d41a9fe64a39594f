//! Gaussian indicator (response) functions and Bayesian conditioning.
//!
//! An indicator on target modes `A` is the displaced family
//! `ξ_y(z_A) = w · N(z_A; L y + b, V_ind)` with `w = |det L|`, so that
//! `∫ dy ξ_y(z_A) = 1` for every `z_A`. The outcome label `y` has the same
//! dimension as the target phase space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{inverse_sym, mode_indices, submatrix, subvector, symmetrize};
use crate::mixture::GaussianMixture;
use crate::state::{
    cup_min_eigenvalue, gaussian_density, quadrature_state, quadrature_state_with_variances,
    GaussianState, ValidityReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianIndicator {
    target_modes: Vec<usize>,
    outcome_map: DMatrix<f64>,
    base_mean: DVector<f64>,
    moments: DMatrix<f64>,
    weight: f64,
}

impl GaussianIndicator {
    pub fn new(
        target_modes: Vec<usize>,
        outcome_map: DMatrix<f64>,
        base_mean: DVector<f64>,
        moments: DMatrix<f64>,
    ) -> Result<Self> {
        if target_modes.is_empty() {
            return Err(Error::Shape("indicator needs at least one target mode".into()));
        }
        for (i, m) in target_modes.iter().enumerate() {
            if target_modes[..i].contains(m) {
                return Err(Error::Shape(format!("target mode {m} listed twice")));
            }
        }
        let k = 2 * target_modes.len();
        if moments.shape() != (k, k) || outcome_map.shape() != (k, k) || base_mean.len() != k {
            return Err(Error::Shape(format!(
                "indicator on {} modes needs {k}x{k} moments and outcome map and a length-{k} offset",
                target_modes.len()
            )));
        }
        let scale = crate::linalg::max_abs(&moments).max(1.0);
        if crate::linalg::asymmetry(&moments) > 1e-10 * scale {
            return Err(Error::Shape("indicator moments are not symmetric".into()));
        }
        if crate::linalg::sym_eigenvalues(&moments)[0] < -1e-10 * scale {
            return Err(Error::Shape("indicator moments are not positive semidefinite".into()));
        }
        let weight = outcome_map.determinant().abs();
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::Shape("outcome map must be invertible".into()));
        }
        Ok(GaussianIndicator {
            target_modes,
            outcome_map,
            base_mean,
            moments: symmetrize(&moments),
            weight,
        })
    }

    /// Outcome labels are plain phase-space displacements of a centred indicator.
    pub fn displaced(target_modes: Vec<usize>, moments: DMatrix<f64>) -> Result<Self> {
        let k = moments.nrows();
        Self::new(target_modes, DMatrix::identity(k, k), DVector::zeros(k), moments)
    }

    /// Joint position/momentum readout at the saturating resolution `V = (λ/2)I`.
    pub fn heterodyne(mode: usize, lambda: f64) -> Result<Self> {
        Self::displaced(vec![mode], DMatrix::identity(2, 2) * (lambda / 2.0))
    }

    /// Readout of `q_θ` at variance `(λ/2)e^{-2r}` (conjugate at `(λ/2)e^{2r}`).
    pub fn homodyne(mode: usize, theta: f64, r: f64, lambda: f64) -> Result<Self> {
        let st = quadrature_state(theta, 0.0, r, lambda)?;
        Self::displaced(vec![mode], st.moments().clone())
    }

    /// Readout of `q_θ` with explicit variances along `q_θ` and its conjugate.
    pub fn quadrature(mode: usize, theta: f64, measured_var: f64, conjugate_var: f64) -> Result<Self> {
        let st = quadrature_state_with_variances(theta, 0.0, measured_var, conjugate_var, 1.0)?;
        Self::displaced(vec![mode], st.moments().clone())
    }

    /// Indicator proportional to the regularized perfectly correlated state
    /// on the two target modes.
    pub fn correlated_pair(modes: [usize; 2], r: f64, lambda: f64) -> Result<Self> {
        let epr = crate::state::epr_state(r, lambda)?;
        Self::displaced(modes.to_vec(), epr.moments().clone())
    }

    pub fn target_modes(&self) -> &[usize] {
        &self.target_modes
    }

    pub fn outcome_dim(&self) -> usize {
        2 * self.target_modes.len()
    }

    pub fn outcome_map(&self) -> &DMatrix<f64> {
        &self.outcome_map
    }

    pub fn base_mean(&self) -> &DVector<f64> {
        &self.base_mean
    }

    pub fn moments(&self) -> &DMatrix<f64> {
        &self.moments
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Phase-space point the indicator for outcome `y` is centred on.
    pub fn effective_outcome(&self, y: &[f64]) -> Result<DVector<f64>> {
        if y.len() != self.outcome_dim() {
            return Err(Error::Shape(format!(
                "outcome of length {} for a {}-dimensional outcome space",
                y.len(),
                self.outcome_dim()
            )));
        }
        Ok(&self.outcome_map * DVector::from_column_slice(y) + &self.base_mean)
    }

    /// Maps a phase-space point back to the outcome label centred on it.
    pub fn outcome_label(&self, effective: &DVector<f64>) -> DVector<f64> {
        let inv = self.outcome_map.clone().try_inverse().expect("outcome map is invertible");
        inv * (effective - &self.base_mean)
    }

    /// `ξ_y(z_A)` evaluated on the target-mode coordinates `z_a`.
    pub fn response(&self, y: &[f64], z_a: &[f64]) -> Result<f64> {
        let centre = self.effective_outcome(y)?;
        if z_a.len() != self.outcome_dim() {
            return Err(Error::Shape("target point has the wrong dimension".into()));
        }
        let dz = DVector::from_column_slice(z_a) - centre;
        Ok(self.weight * gaussian_density(&dz, &self.moments))
    }

    /// The normalized indicator with momenta inverted, as a state.
    pub fn momentum_inverted_state(&self, lambda: f64) -> Result<GaussianState> {
        let k = self.outcome_dim();
        let flip = DMatrix::from_diagonal(&DVector::from_fn(k, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }));
        GaussianState::new(lambda, DVector::zeros(k), &flip * &self.moments * &flip)
    }

    fn check_against(&self, modes: usize) -> Result<()> {
        if let Some(&m) = self.target_modes.iter().find(|&&m| m >= modes) {
            return Err(Error::Shape(format!("indicator targets mode {m} of a {modes}-mode state")));
        }
        Ok(())
    }
}

/// Validity of the normalized indicator as an epistemic state: `2V_ind + iλΣ ≥ 0`.
pub fn indicator_valid(ind: &GaussianIndicator, lambda: f64, tol: f64) -> ValidityReport {
    let min = cup_min_eigenvalue(&(ind.moments() * 2.0), lambda)
        .expect("indicator dimensions are checked on construction");
    ValidityReport::from_min_eigenvalue(min, tol, true)
}

/// `p(y) = ∫ ξ_y(z) μ(z) dz = w · N(L y + b; d_A, V_A + V_ind)`.
pub fn outcome_density(state: &GaussianState, ind: &GaussianIndicator, y: &[f64]) -> Result<f64> {
    ind.check_against(state.modes())?;
    let idx = mode_indices(ind.target_modes());
    let centre = ind.effective_outcome(y)?;
    let d_a = subvector(state.means(), &idx);
    let v = submatrix(state.moments(), &idx, &idx) + ind.moments();
    Ok(ind.weight() * gaussian_density(&(centre - d_a), &v))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    Gaussian(GaussianState),
    Mixture(GaussianMixture),
}

impl Posterior {
    pub fn as_gaussian(&self) -> Option<&GaussianState> {
        match self {
            Posterior::Gaussian(s) => Some(s),
            Posterior::Mixture(_) => None,
        }
    }

    pub fn as_mixture(&self) -> Option<&GaussianMixture> {
        match self {
            Posterior::Mixture(m) => Some(m),
            Posterior::Gaussian(_) => None,
        }
    }

    /// Total means and moments.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        match self {
            Posterior::Gaussian(s) => (s.means().clone(), s.moments().clone()),
            Posterior::Mixture(m) => m.moments(),
        }
    }

    pub fn validate(&self, tol: f64) -> ValidityReport {
        match self {
            Posterior::Gaussian(s) => s.validate(tol),
            Posterior::Mixture(m) => m.validate(tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: Vec<f64>,
    /// Outcome density `p(y)` under the prior.
    pub likelihood: f64,
    /// State of the unmeasured modes, in increasing mode order.
    pub posterior: Posterior,
    /// Set when `V_A + V_ind` was numerically singular and pseudo-inverted.
    pub pseudo_inverse_used: bool,
}

/// Gain `K = V_{·A}(V_A + V_ind)⁻¹` and the innovation covariance.
struct Update {
    gain: DMatrix<f64>,
    innovation: DMatrix<f64>,
    idx: Vec<usize>,
    singular: bool,
}

fn update_terms(state: &GaussianState, ind: &GaussianIndicator) -> Result<Update> {
    ind.check_against(state.modes())?;
    let idx = mode_indices(ind.target_modes());
    let all: Vec<usize> = (0..state.dim()).collect();
    let innovation = submatrix(state.moments(), &idx, &idx) + ind.moments();
    let (inv, singular) = inverse_sym(&innovation);
    let gain = submatrix(state.moments(), &all, &idx) * inv;
    Ok(Update { gain, innovation, idx, singular })
}

/// Full Bayesian update `μ'(z) ∝ ξ_y(z_A) μ(z)` over all modes, with the
/// pseudo-inverse flag.
pub fn bayes_update(
    state: &GaussianState,
    ind: &GaussianIndicator,
    y: &[f64],
) -> Result<(GaussianState, bool)> {
    let up = update_terms(state, ind)?;
    let centre = ind.effective_outcome(y)?;
    let innov = centre - subvector(state.means(), &up.idx);
    let all: Vec<usize> = (0..state.dim()).collect();
    let cross = submatrix(state.moments(), &up.idx, &all);
    let means = state.means() + &up.gain * innov;
    let moments = symmetrize(&(state.moments() - &up.gain * cross));
    let post = GaussianState::with_symmetry_tol(state.lambda(), means, moments, 1e-8)?;
    Ok((post, up.singular))
}

/// Conditions a joint state on outcome `y` of an indicator on some of its
/// modes and returns the posterior on the remaining modes:
/// `V'_B = V_B − V_BA(V_A + V_ind)⁻¹V_AB`,
/// `d'_B = d_B + V_BA(V_A + V_ind)⁻¹(Ly + b − d_A)`.
pub fn condition(state: &GaussianState, ind: &GaussianIndicator, y: &[f64]) -> Result<MeasurementRecord> {
    let rest = remaining_modes(state.modes(), ind)?;
    let likelihood = outcome_density(state, ind, y)?;
    let (joint, singular) = bayes_update(state, ind, y)?;
    Ok(MeasurementRecord {
        outcome: y.to_vec(),
        likelihood,
        posterior: Posterior::Gaussian(joint.marginal(&rest)?),
        pseudo_inverse_used: singular,
    })
}

fn remaining_modes(modes: usize, ind: &GaussianIndicator) -> Result<Vec<usize>> {
    ind.check_against(modes)?;
    let rest: Vec<usize> = (0..modes).filter(|m| !ind.target_modes().contains(m)).collect();
    if rest.is_empty() {
        return Err(Error::Config(
            "indicator covers every mode; use bayes_update or collapse_rule instead".into(),
        ));
    }
    Ok(rest)
}

/// Linear-Gaussian structure of conditioning: the posterior on the
/// unmeasured modes has fixed moments and a mean that is affine in the
/// effective outcome, `d'_B = d_B + K_B (y_eff − d_A)`.
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    pub remaining: Vec<usize>,
    pub posterior_moments: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    /// Covariance of the effective outcome `L y + b` under the prior.
    pub outcome_moments: DMatrix<f64>,
}

pub fn conditional_law(state: &GaussianState, ind: &GaussianIndicator) -> Result<ConditionalLaw> {
    let remaining = remaining_modes(state.modes(), ind)?;
    let up = update_terms(state, ind)?;
    let rest_idx = mode_indices(&remaining);
    let cols: Vec<usize> = (0..up.idx.len()).collect();
    let gain = submatrix(&up.gain, &rest_idx, &cols);
    let v_b = submatrix(state.moments(), &rest_idx, &rest_idx);
    let v_ab = submatrix(state.moments(), &up.idx, &rest_idx);
    let posterior_moments = symmetrize(&(v_b - &gain * v_ab));
    Ok(ConditionalLaw { remaining, posterior_moments, gain, outcome_moments: up.innovation })
}

/// Per-component conditioning of a mixture; the new weights are the old
/// weights times each component's outcome density, renormalized.
pub fn mixture_condition(
    mix: &GaussianMixture,
    ind: &GaussianIndicator,
    y: &[f64],
) -> Result<MeasurementRecord> {
    let mut weights = Vec::with_capacity(mix.components().len());
    let mut comps = Vec::with_capacity(mix.components().len());
    let mut singular = false;
    for (w, c) in mix.weights().iter().zip(mix.components()) {
        let rec = condition(c, ind, y)?;
        singular |= rec.pseudo_inverse_used;
        weights.push(w * rec.likelihood);
        match rec.posterior {
            Posterior::Gaussian(s) => comps.push(s),
            Posterior::Mixture(_) => unreachable!("component conditioning is Gaussian"),
        }
    }
    let likelihood: f64 = weights.iter().sum();
    if !(likelihood > 0.0) {
        return Err(Error::Underflow(
            "every component assigns zero density to the outcome; rescale the outcome or \
             the mixture so that it lies within the support"
                .into(),
        ));
    }
    // Drop components whose weight vanished so the posterior stays well formed.
    let (weights, comps): (Vec<f64>, Vec<GaussianState>) = weights
        .into_iter()
        .zip(comps)
        .filter(|(w, _)| *w > 0.0)
        .unzip();
    Ok(MeasurementRecord {
        outcome: y.to_vec(),
        likelihood,
        posterior: Posterior::Mixture(GaussianMixture::normalized(weights, comps)?),
        pseudo_inverse_used: singular,
    })
}

/// Post-measurement state for a reproducible readout of `q_θ` with outcome
/// `y`: `q_θ` is centred on `y` at variance `resolution`, and the conjugate
/// quadrature is left completely unknown at variance `cap`. Without an
/// explicit resolution the saturating value `λ²/(4·cap)` is used.
pub fn collapse_rule(
    state: &GaussianState,
    theta: f64,
    y: f64,
    cap: f64,
    resolution: Option<f64>,
) -> Result<GaussianState> {
    if state.modes() != 1 {
        return Err(Error::Config("collapse acts on a single mode".into()));
    }
    let lambda = state.lambda();
    if !(cap > lambda) {
        return Err(Error::Config(format!(
            "conjugate variance cap {cap} must exceed lambda = {lambda}"
        )));
    }
    let res = resolution.unwrap_or(lambda * lambda / (4.0 * cap));
    if !(res > 0.0) {
        return Err(Error::Config("collapse resolution must be positive".into()));
    }
    quadrature_state_with_variances(theta, y, res, cap, lambda)
}

/// Collapse using the indicator's own variance along the measured quadrature.
pub fn collapse_with_indicator(
    state: &GaussianState,
    ind: &GaussianIndicator,
    theta: f64,
    y: f64,
    cap: f64,
) -> Result<GaussianState> {
    if ind.outcome_dim() != 2 {
        return Err(Error::Config("collapse needs a single-mode indicator".into()));
    }
    let u = DVector::from_vec(vec![theta.cos(), theta.sin()]);
    let res = (u.transpose() * ind.moments() * &u)[(0, 0)];
    collapse_rule(state, theta, y, cap, Some(res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::state::epr_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn validity_examples() {
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        let rep = indicator_valid(&het, 1.0, 1e-10);
        assert!(rep.cup_satisfied && rep.saturating);

        let sharp = GaussianIndicator::displaced(vec![0], DMatrix::identity(2, 2) * 0.25).unwrap();
        assert!(!indicator_valid(&sharp, 1.0, 1e-10).cup_satisfied);

        let hom = GaussianIndicator::homodyne(0, 0.0, 6.0, 1.0).unwrap();
        assert!(indicator_valid(&hom, 1.0, 1e-9).cup_satisfied);

        for r in [0.0, 1.0, 4.0, 8.0] {
            let corr = GaussianIndicator::correlated_pair([0, 1], r, 1.0).unwrap();
            assert!(indicator_valid(&corr, 1.0, 1e-7).cup_satisfied, "r = {r}");
        }
    }

    #[test]
    fn outcome_density_examples() {
        let vac = GaussianState::vacuum(1.0, 1).unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        let p0 = outcome_density(&vac, &het, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p0, 1.0 / (2.0 * PI), epsilon = 1e-14);
        assert!(outcome_density(&vac, &het, &[0.1, 0.0]).unwrap() < p0);
        assert!(matches!(outcome_density(&vac, &het, &[0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn outcome_map_weight_normalizes() {
        // Outcome labels scaled by 2: the density over y picks up |det L| = 4.
        let l = DMatrix::identity(2, 2) * 2.0;
        let ind = GaussianIndicator::new(vec![0], l, DVector::zeros(2), DMatrix::identity(2, 2) * 0.5).unwrap();
        assert_abs_diff_eq!(ind.weight(), 4.0);
        let vac = GaussianState::vacuum(1.0, 1).unwrap();
        let direct = outcome_density(&vac, &ind, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(direct, 4.0 / (2.0 * PI), epsilon = 1e-14);
    }

    #[test]
    fn product_state_posterior_is_prior() {
        let a = GaussianState::thermal(1.0, 1, 1.3).unwrap();
        let b = quadrature_state(0.2, 1.5, 0.4, 1.0).unwrap();
        let ab = a.tensor(&b).unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        for y in [[0.0, 0.0], [3.0, -1.0]] {
            let rec = condition(&ab, &het, &y).unwrap();
            let post = rec.posterior.as_gaussian().unwrap();
            assert!(max_abs_diff(post.moments(), b.moments()) < 1e-14);
            assert!((post.means() - b.means()).amax() < 1e-14);
        }
    }

    #[test]
    fn epr_position_readout_localizes_partner() {
        let epr = epr_state(6.0, 1.0).unwrap();
        let hom = GaussianIndicator::homodyne(0, 0.0, 6.0, 1.0).unwrap();
        let a = 1.7;
        let rec = condition(&epr, &hom, &[a, 0.0]).unwrap();
        let post = rec.posterior.as_gaussian().unwrap();
        assert_abs_diff_eq!(post.means()[0], a, epsilon = 1e-4);
        assert!(post.moments()[(0, 0)] < (-10.0_f64).exp());
        assert!(post.moments()[(1, 1)] > 1e4);
        assert_abs_diff_eq!(rec.likelihood, outcome_density(&epr, &hom, &[a, 0.0]).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn invalid_indicator_yields_invalid_posterior() {
        let epr = epr_state(8.0, 1.0).unwrap();
        let sharp = GaussianIndicator::displaced(vec![0], DMatrix::identity(2, 2) * 0.25).unwrap();
        let rec = condition(&epr, &sharp, &[0.0, 0.0]).unwrap();
        let rep = rec.posterior.validate(1e-9);
        assert!(!rep.cup_satisfied);
        assert_abs_diff_eq!(rep.min_eigenvalue, -0.5, epsilon = 1e-3);
    }

    #[test]
    fn conditional_law_matches_condition() {
        let st = GaussianState::new(
            1.0,
            DVector::from_vec(vec![0.3, -0.2, 1.0, 0.5]),
            DMatrix::from_row_slice(4, 4, &[
                1.2, 0.1, 0.4, -0.2, 0.1, 0.9, 0.3, 0.1, 0.4, 0.3, 1.5, 0.2, -0.2, 0.1, 0.2, 1.1,
            ]),
        )
        .unwrap();
        let het = GaussianIndicator::heterodyne(1, 1.0).unwrap();
        let law = conditional_law(&st, &het).unwrap();
        let y = [0.4, -0.7];
        let rec = condition(&st, &het, &y).unwrap();
        let post = rec.posterior.as_gaussian().unwrap();
        assert!(max_abs_diff(&law.posterior_moments, post.moments()) < 1e-14);
        let mean = DVector::from_vec(vec![0.3, -0.2])
            + &law.gain * (DVector::from_vec(y.to_vec()) - DVector::from_vec(vec![1.0, 0.5]));
        assert!((mean - post.means()).amax() < 1e-14);
    }

    #[test]
    fn collapse_examples() {
        let st = quadrature_state(0.0, 0.0, 6.0, 1.0).unwrap();
        let cap = 1e6;
        let out = collapse_rule(&st, 0.0, 2.5, cap, None).unwrap();
        assert_abs_diff_eq!(out.moments()[(1, 1)], cap, epsilon = 1e-6);
        assert_abs_diff_eq!(out.means()[0], 2.5);
        assert!(out.validate(1e-9).saturating);

        // Repeating the same readout is concentrated at the first outcome.
        let hom = GaussianIndicator::homodyne(0, 0.0, 6.0, 1.0).unwrap();
        let again = collapse_with_indicator(&st, &hom, 0.0, 2.5, cap).unwrap();
        let res = hom.moments()[(0, 0)];
        assert_abs_diff_eq!(again.moments()[(0, 0)], res, epsilon = 1e-18);
        let spread = again.moments()[(0, 0)] + res;
        let peak = outcome_density(&again, &hom, &[2.5, 0.0]).unwrap();
        let off = outcome_density(&again, &hom, &[2.5 + 3.0 * spread.sqrt(), 0.0]).unwrap();
        assert!(off < peak * 0.02);

        assert!(matches!(collapse_rule(&st, 0.0, 0.0, 0.5, None), Err(Error::Config(_))));
    }

    #[test]
    fn mixture_single_component_agrees() {
        let st = epr_state(1.0, 1.0).unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        let y = [0.3, 0.9];
        let a = condition(&st, &het, &y).unwrap();
        let b = mixture_condition(&GaussianMixture::single(st), &het, &y).unwrap();
        assert_abs_diff_eq!(a.likelihood, b.likelihood, epsilon = 1e-15);
        let (d, v) = b.posterior.moments();
        let post = a.posterior.as_gaussian().unwrap();
        assert!(max_abs_diff(&v, post.moments()) < 1e-14);
        assert!((d - post.means()).amax() < 1e-14);
    }

    #[test]
    fn mixture_symmetric_outcome_keeps_balance() {
        let ex = crate::mixture::MaxEntCounterexample { q0: 3.0, p0: 3.0, dq: 0.5, dp: 0.5, lambda: 1.0 };
        let mix = ex.correlated().unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        let rec = mixture_condition(&mix, &het, &[0.0, 0.0]).unwrap();
        for w in rec.posterior.as_mixture().unwrap().weights() {
            assert_abs_diff_eq!(*w, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn mixture_underflow_is_reported() {
        let mix = crate::mixture::MaxEntCounterexample::default().correlated().unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        assert!(matches!(
            mixture_condition(&mix, &het, &[1e6, 1e6]),
            Err(Error::Underflow(_))
        ));
    }

    #[test]
    fn condition_needs_unmeasured_modes() {
        let vac = GaussianState::vacuum(1.0, 1).unwrap();
        let het = GaussianIndicator::heterodyne(0, 1.0).unwrap();
        assert!(matches!(condition(&vac, &het, &[0.0, 0.0]), Err(Error::Config(_))));
        let (post, _) = bayes_update(&vac, &het, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(post.means()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(post.moments()[(0, 0)], 0.25, epsilon = 1e-15);
    }
}
