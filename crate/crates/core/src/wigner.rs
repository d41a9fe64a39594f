//! Gaussian quantum states, POVM elements and channels in the Wigner
//! representation, and their dictionary to epistemic states with `λ = ħ`.
//!
//! No Hilbert-space objects appear: a Gaussian Wigner function is fully
//! described by its means and covariance `γ`, and every quantity here is a
//! closed-form Gaussian integral.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{channel_valid, GaussianChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, log_det_spd, mode_indices, submatrix, subvector};
use crate::measurement::GaussianIndicator;
use crate::state::{cup_min_eigenvalue, gaussian_density, GaussianState};

/// A Gaussian quantum state: means of the canonical operators and the
/// symmetrized covariance `γ`, subject to `γ + iħΣ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumGaussianSpec {
    pub hbar: f64,
    pub means: Vec<f64>,
    /// Row-major `2n × 2n` covariance.
    pub gamma: Vec<Vec<f64>>,
}

impl QuantumGaussianSpec {
    pub fn new(hbar: f64, means: DVector<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        if !gamma.is_square() || !gamma.nrows().is_multiple_of(2) || gamma.nrows() == 0 || means.len() != gamma.nrows() {
            return Err(Error::Shape("quantum spec needs a 2n-vector of means and a 2n×2n covariance".into()));
        }
        if linalg::asymmetry(&gamma) > 1e-10 * linalg::max_abs(&gamma).max(1.0) {
            return Err(Error::Shape("covariance is not symmetric".into()));
        }
        let gamma = linalg::symmetrize(&gamma);
        Ok(QuantumGaussianSpec {
            hbar,
            means: means.as_slice().to_vec(),
            gamma: gamma.row_iter().map(|r| r.iter().copied().collect()).collect(),
        })
    }

    pub fn vacuum(hbar: f64, modes: usize) -> Result<Self> {
        let d = 2 * modes;
        Self::new(hbar, DVector::zeros(d), DMatrix::identity(d, d) * hbar)
    }

    pub fn mode_count(&self) -> usize {
        self.means.len() / 2
    }

    pub fn means_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.means)
    }

    pub fn gamma_matrix(&self) -> DMatrix<f64> {
        let d = self.gamma.len();
        DMatrix::from_fn(d, d, |i, j| self.gamma[i][j])
    }

    /// Minimum eigenvalue of `γ + iħΣ`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        cup_min_eigenvalue(&self.gamma_matrix(), self.hbar).expect("shape checked on construction")
    }

    pub fn is_quantum(&self, tol: f64) -> bool {
        self.uncertainty_min_eigenvalue() >= -tol
    }
}

const QUANTUM_TOL: f64 = 1e-9;

/// The epistemic state with the same Wigner function: `λ = ħ`, same means,
/// `V = γ/2`.
pub fn wigner_state(q: &QuantumGaussianSpec) -> Result<GaussianState> {
    let gamma = q.gamma_matrix();
    let min = q.uncertainty_min_eigenvalue();
    if min < -QUANTUM_TOL * linalg::max_abs(&gamma).max(1.0) {
        return Err(Error::NotQuantumState(format!(
            "γ + iħΣ has eigenvalue {min:e}"
        )));
    }
    GaussianState::new(q.hbar, q.means_vector(), gamma * 0.5)
}

/// Inverse of [`wigner_state`].
pub fn quantum_spec(s: &GaussianState) -> Result<QuantumGaussianSpec> {
    QuantumGaussianSpec::new(s.lambda(), s.means().clone(), s.gamma())
}

/// Wigner function of one element `E_y` of a Gaussian POVM on some modes:
/// `W_E(z_A) = weight · N(z_A; centre, γ_E/2)` (in units where the
/// density integrates against `W_ρ` to `Tr(ρE_y)`).
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElementSpec {
    pub target_modes: Vec<usize>,
    pub centre: DVector<f64>,
    pub gamma: DMatrix<f64>,
    pub weight: f64,
}

impl PovmElementSpec {
    /// The element for outcome `y` of a Gaussian indicator.
    pub fn from_indicator(ind: &GaussianIndicator, y: &[f64]) -> Result<Self> {
        Ok(PovmElementSpec {
            target_modes: ind.target_modes().to_vec(),
            centre: ind.effective_outcome(y)?,
            gamma: ind.moments() * 2.0,
            weight: ind.weight(),
        })
    }
}

/// `Tr(ρE) = ∫ W_ρ W_E = weight · N(d_A; centre, (γ_A + γ_E)/2)`.
pub fn born_overlap(state: &QuantumGaussianSpec, element: &PovmElementSpec) -> Result<f64> {
    let k = 2 * element.target_modes.len();
    if element.centre.len() != k || element.gamma.shape() != (k, k) {
        return Err(Error::Shape("POVM element dimensions do not match its target modes".into()));
    }
    if element.target_modes.iter().any(|&m| m >= state.mode_count()) {
        return Err(Error::Shape(format!(
            "POVM element on modes {:?} of a {}-mode state",
            element.target_modes,
            state.mode_count()
        )));
    }
    let idx = mode_indices(&element.target_modes);
    let d_a = subvector(&state.means_vector(), &idx);
    let g_a = submatrix(&state.gamma_matrix(), &idx, &idx);
    let cov = (g_a + &element.gamma) * 0.5;
    Ok(element.weight * gaussian_density(&(d_a - &element.centre), &cov))
}

/// `∫ N(z; a, A) N(z; b, B) dz = N(a; b, A + B)` for moment matrices `A`, `B`.
pub fn gaussian_overlap(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape("overlap of states of different dimension".into()));
    }
    Ok(gaussian_density(&(a.means() - b.means()), &(a.moments() + b.moments())))
}

/// `Tr ρ² = (2πħ)ⁿ ∫ W_ρ²`, which for a Gaussian is `ħⁿ / √det γ`.
pub fn purity(q: &QuantumGaussianSpec) -> Result<f64> {
    let w = wigner_state(q)?;
    let n = q.mode_count() as i32;
    let p = (2.0 * PI * q.hbar).powi(n) * gaussian_overlap(&w, &w)?;
    Ok(p.min(1.0))
}

/// Purity straight from the determinant, `ħⁿ/√det γ`.
pub fn purity_from_determinant(q: &QuantumGaussianSpec) -> Result<f64> {
    let g = q.gamma_matrix();
    let ld = log_det_spd(&g).ok_or_else(|| Error::Singular("covariance is not positive definite".into()))?;
    Ok((q.mode_count() as f64 * q.hbar.ln() - 0.5 * ld).exp())
}

/// Transition density `W(z | z′) = N(z; Xᵀz′ + δ, N)` of a Gaussian channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    pub mean_map: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub noise: DMatrix<f64>,
}

impl TransitionKernel {
    pub fn mean(&self, z_prime: &[f64]) -> DVector<f64> {
        &self.mean_map * DVector::from_column_slice(z_prime) + &self.offset
    }

    /// A zero-noise kernel is a point mass; it has no density, and `None`
    /// is returned.
    pub fn density(&self, z: &[f64], z_prime: &[f64]) -> Option<f64> {
        log_det_spd(&self.noise)?;
        Some(gaussian_density(&(DVector::from_column_slice(z) - self.mean(z_prime)), &self.noise))
    }

    /// The same kernel smeared by `eps·I`, turning point masses into densities.
    pub fn regularized(&self, eps: f64) -> Self {
        let d = self.noise.nrows();
        TransitionKernel { noise: &self.noise + DMatrix::identity(d, d) * eps, ..self.clone() }
    }

    /// `∫ dz W(z | z′)` by the composite Simpson rule on a one-mode grid of
    /// `±10` standard deviations with `points` nodes per axis.
    pub fn normalization(&self, z_prime: &[f64], points: usize) -> Result<f64> {
        if self.noise.nrows() != 2 {
            return Err(Error::Config("grid normalization is implemented for one mode".into()));
        }
        let centre = self.mean(z_prime);
        let sd = [self.noise[(0, 0)].sqrt(), self.noise[(1, 1)].sqrt()];
        if sd.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Singular("kernel has zero noise; regularize it first".into()));
        }
        let n = if points.is_multiple_of(2) { points + 1 } else { points.max(3) };
        let axis = |k: usize| -> (Vec<f64>, f64) {
            let h = 20.0 * sd[k] / (n - 1) as f64;
            ((0..n).map(|i| centre[k] - 10.0 * sd[k] + h * i as f64).collect(), h)
        };
        let ((xs, hx), (ys, hy)) = (axis(0), axis(1));
        let w = |i: usize| if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mut total = 0.0;
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                let d = self.density(&[*x, *y], z_prime).expect("noise checked above");
                total += w(i) * w(j) * d;
            }
        }
        Ok(total * hx * hy / 9.0)
    }
}

/// Phase-space transition kernel of a valid channel.
pub fn wigner_map(ch: &GaussianChannel) -> Result<TransitionKernel> {
    let rep = channel_valid(ch, 1e-9 * linalg::max_abs(ch.noise()).max(1.0));
    if !rep.cup_satisfied {
        return Err(Error::Precondition(format!(
            "channel violates the validity condition (min eigenvalue {:e})",
            rep.min_eigenvalue
        )));
    }
    Ok(TransitionKernel {
        mean_map: ch.x().transpose(),
        offset: ch.delta().clone(),
        noise: ch.noise().clone(),
    })
}
