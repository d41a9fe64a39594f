//! Gaussian channels `V ↦ XᵀVX + N`, `d ↦ Xᵀd + δ`, their validity
//! condition, environment dilations and the Choi-state correspondence.
//!
//! Noise is stored in the moment convention; the covariance-convention
//! noise is `Y = 2N`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, complexify, mode_indices, submatrix, subvector, symmetrize};
use crate::state::{correlation_blocks, epr_state_multi, GaussianState, ValidityReport};
use crate::symplectic::{sigma, SymplecticMap};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    x: DMatrix<f64>,
    noise: DMatrix<f64>,
    delta: DVector<f64>,
    lambda: f64,
}

impl GaussianChannel {
    pub fn new(x: DMatrix<f64>, noise: DMatrix<f64>, delta: DVector<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        let dim = x.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || !x.is_square() {
            return Err(Error::Shape(format!("channel matrix must be square of even size, got {:?}", x.shape())));
        }
        if noise.shape() != (dim, dim) || delta.len() != dim {
            return Err(Error::Shape("channel noise/displacement do not match X".into()));
        }
        let scale = linalg::max_abs(&noise).max(1.0);
        if linalg::asymmetry(&noise) > 1e-10 * scale {
            return Err(Error::Shape("channel noise is not symmetric".into()));
        }
        Ok(GaussianChannel { x, noise: symmetrize(&noise), delta, lambda })
    }

    pub fn identity(modes: usize, lambda: f64) -> Result<Self> {
        let d = 2 * modes;
        Self::new(DMatrix::identity(d, d), DMatrix::zeros(d, d), DVector::zeros(d), lambda)
    }

    /// Pure-loss channel mixing in a saturating environment: `X = √η·I`,
    /// `N = (1−η)(λ/2)I`.
    pub fn attenuation(eta: f64, modes: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Config(format!("transmissivity {eta} outside [0, 1]")));
        }
        let d = 2 * modes;
        Self::new(
            DMatrix::identity(d, d) * eta.sqrt(),
            DMatrix::identity(d, d) * ((1.0 - eta) * lambda / 2.0),
            DVector::zeros(d),
            lambda,
        )
    }

    /// `X = √g·I` with no added noise; invalid for `g > 1`.
    pub fn noiseless_amplifier(gain: f64, modes: usize, lambda: f64) -> Result<Self> {
        let d = 2 * modes;
        Self::new(DMatrix::identity(d, d) * gain.sqrt(), DMatrix::zeros(d, d), DVector::zeros(d), lambda)
    }

    /// Classical additive Gaussian noise `N` with `X = I`.
    pub fn additive_noise(noise: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let d = noise.nrows();
        Self::new(DMatrix::identity(d, d), noise, DVector::zeros(d), lambda)
    }

    pub fn from_symplectic(map: &SymplecticMap, lambda: f64) -> Result<Self> {
        let d = map.matrix().nrows();
        Self::new(map.matrix().clone(), DMatrix::zeros(d, d), DVector::zeros(d), lambda)
    }

    /// Momentum reversal `diag(1, −1, …)`: maps single-system states to
    /// valid states but is not a valid channel.
    pub fn momentum_inversion(modes: usize, lambda: f64) -> Result<Self> {
        let d = 2 * modes;
        let x = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }));
        Self::new(x, DMatrix::zeros(d, d), DVector::zeros(d), lambda)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    /// Noise in the covariance convention, `Y = 2N`.
    pub fn noise_gamma(&self) -> DMatrix<f64> {
        &self.noise * 2.0
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn modes(&self) -> usize {
        self.x.nrows() / 2
    }

    pub fn with_noise(&self, noise: DMatrix<f64>) -> Result<Self> {
        Self::new(self.x.clone(), noise, self.delta.clone(), self.lambda)
    }

    pub fn with_delta(&self, delta: DVector<f64>) -> Result<Self> {
        Self::new(self.x.clone(), self.noise.clone(), delta, self.lambda)
    }

    pub fn apply(&self, s: &GaussianState) -> Result<GaussianState> {
        if s.lambda() != self.lambda {
            return Err(Error::Config(format!(
                "lambda mismatch: channel {} vs state {}",
                self.lambda,
                s.lambda()
            )));
        }
        if s.dim() != self.x.nrows() {
            return Err(Error::Shape(format!(
                "{}-mode channel applied to {}-mode state",
                self.modes(),
                s.modes()
            )));
        }
        let xt = self.x.transpose();
        let moments = symmetrize(&(&xt * s.moments() * &self.x + &self.noise));
        GaussianState::new(self.lambda, &xt * s.means() + &self.delta, moments)
    }

    /// This channel acting on `targets` of a `total`-mode system, identity elsewhere.
    pub fn on_modes(&self, total: usize, targets: &[usize]) -> Result<Self> {
        if targets.len() != self.modes() {
            return Err(Error::Shape(format!(
                "{}-mode channel placed on {} modes",
                self.modes(),
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= total || targets[..i].contains(&t) {
                return Err(Error::Shape(format!("invalid target modes {targets:?}")));
            }
        }
        let d = 2 * total;
        let idx = mode_indices(targets);
        let mut x = DMatrix::identity(d, d);
        let mut noise = DMatrix::zeros(d, d);
        let mut delta = DVector::zeros(d);
        for &i in &idx {
            x[(i, i)] = 0.0;
        }
        for (a, &i) in idx.iter().enumerate() {
            delta[i] = self.delta[a];
            for (b, &j) in idx.iter().enumerate() {
                x[(i, j)] = self.x[(a, b)];
                noise[(i, j)] = self.noise[(a, b)];
            }
        }
        Self::new(x, noise, delta, self.lambda)
    }

    /// The Hermitian matrix `2N − iλΣ + iλXᵀΣX` whose positivity is the
    /// validity condition.
    pub fn validity_matrix(&self) -> DMatrix<nalgebra::Complex<f64>> {
        let s = sigma(self.modes());
        let im = (self.x.transpose() * &s * &self.x - &s) * self.lambda;
        complexify(&self.noise_gamma(), &im)
    }
}

/// Validity of a channel: `Y ≥ iλΣ − iλXᵀΣX` with `Y = 2N`.
pub fn channel_valid(ch: &GaussianChannel, tol: f64) -> ValidityReport {
    let min = linalg::hermitian_eigenvalues(&ch.validity_matrix())[0];
    ValidityReport::from_min_eigenvalue(min, tol, true)
}

/// The channel on `A` (the first `system_modes` modes) induced by a joint
/// symplectic map on `A ⊕ E` with environment `env` and tracing out `E`:
/// `X = S_AA`, `N = S_EAᵀ V_E S_EA`, `δ = S_EAᵀ d_E`.
pub fn dilation_induced_channel(
    map: &SymplecticMap,
    env: &GaussianState,
    system_modes: usize,
) -> Result<GaussianChannel> {
    let total = map.mode_count();
    if system_modes == 0 || system_modes + env.modes() != total {
        return Err(Error::Shape(format!(
            "{total}-mode dilation with {system_modes} system and {} environment modes",
            env.modes()
        )));
    }
    let scale = linalg::max_abs(map.matrix()).max(1.0).powi(2);
    if !map.is_symplectic(1e-8 * scale) {
        return Err(Error::Precondition("dilation map is not symplectic".into()));
    }
    let rep = env.validate(1e-8 * linalg::max_abs(env.moments()).max(1.0));
    if !rep.cup_satisfied {
        return Err(Error::Precondition(format!(
            "environment state is invalid (min eigenvalue {:e})",
            rep.min_eigenvalue
        )));
    }
    let k = 2 * system_modes;
    let s = map.matrix();
    let s_aa = s.view((0, 0), (k, k)).into_owned();
    let s_ea = s.view((k, 0), (s.nrows() - k, k)).into_owned();
    let noise = symmetrize(&(s_ea.transpose() * env.moments() * &s_ea));
    let delta = s_ea.transpose() * env.means();
    GaussianChannel::new(s_aa, noise, delta, env.lambda())
}

/// Result of the channel acting on the first half of the regularized
/// perfectly correlated state, built directly from the block formula
/// `[[XᵀV₊X + N, XᵀV₋], [V₋X, V₊]]` with `V± = D±(r)/2`.
pub fn choi_state(ch: &GaussianChannel, r: f64) -> Result<GaussianState> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("squeezing must be non-negative, got {r}")));
    }
    let k = ch.x.nrows();
    let (plus, minus) = correlation_blocks(r, ch.lambda, ch.modes());
    let (plus, minus) = (plus * 0.5, minus * 0.5);
    let xt = ch.x.transpose();
    let mut v = DMatrix::zeros(2 * k, 2 * k);
    v.view_mut((0, 0), (k, k)).copy_from(&(&xt * &plus * &ch.x + &ch.noise));
    v.view_mut((0, k), (k, k)).copy_from(&(&xt * &minus));
    v.view_mut((k, 0), (k, k)).copy_from(&(&minus * &ch.x));
    v.view_mut((k, k), (k, k)).copy_from(&plus);
    let mut means = DVector::zeros(2 * k);
    means.rows_mut(0, k).copy_from(&ch.delta);
    GaussianState::with_symmetry_tol(ch.lambda, means, symmetrize(&v), 1e-8)
}

/// Same state as [`choi_state`], computed by applying `ch ⊗ id` to the
/// correlated state.
pub fn choi_state_by_action(ch: &GaussianChannel, r: f64) -> Result<GaussianState> {
    let m = ch.modes();
    let epr = epr_state_multi(r, ch.lambda, m)?;
    let targets: Vec<usize> = (0..m).collect();
    ch.on_modes(2 * m, &targets)?.apply(&epr)
}

/// Recovers `(X, N, δ)` from a Choi state at squeezing `r > 0`:
/// `X = V₋⁻¹Cᵀ`, `N = V_A − C V₋⁻¹ V₊ V₋⁻¹ Cᵀ`.
pub fn channel_from_choi(choi: &GaussianState, r: f64) -> Result<GaussianChannel> {
    if !(r > 0.0) {
        return Err(Error::Singular(format!(
            "correlation block D₋(r) is singular at r = {r}"
        )));
    }
    if !choi.modes().is_multiple_of(2) {
        return Err(Error::Shape("Choi state must have an even number of modes".into()));
    }
    let m = choi.modes() / 2;
    let k = 2 * m;
    let a: Vec<usize> = (0..k).collect();
    let b: Vec<usize> = (k..2 * k).collect();
    let v_a = submatrix(choi.moments(), &a, &a);
    let c = submatrix(choi.moments(), &a, &b);
    let (plus, minus) = correlation_blocks(r, choi.lambda(), m);
    let (plus, minus) = (plus * 0.5, minus * 0.5);
    // D₋ is diagonal, so its inverse is exact.
    let minus_inv = DMatrix::from_diagonal(&minus.diagonal().map(|x| 1.0 / x));
    let x = &minus_inv * c.transpose();
    let noise = symmetrize(&(v_a - &c * &minus_inv * &plus * &minus_inv * c.transpose()));
    let delta = subvector(choi.means(), &a);
    GaussianChannel::new(x, noise, delta, choi.lambda())
}

/// The channel applying `first` and then `second`:
/// `X = X₁X₂`, `N = X₂ᵀN₁X₂ + N₂`, `δ = X₂ᵀδ₁ + δ₂`.
pub fn compose(second: &GaussianChannel, first: &GaussianChannel) -> Result<GaussianChannel> {
    if first.x.shape() != second.x.shape() {
        return Err(Error::Shape("composed channels act on different dimensions".into()));
    }
    if first.lambda != second.lambda {
        return Err(Error::Config("composed channels differ in lambda".into()));
    }
    let x2t = second.x.transpose();
    GaussianChannel::new(
        &first.x * &second.x,
        &x2t * &first.noise * &second.x + &second.noise,
        &x2t * &first.delta + &second.delta,
        first.lambda,
    )
}
