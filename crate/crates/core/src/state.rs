//! Gaussian epistemic states.
//!
//! States store the actual symmetrized second central moments `V`
//! (`V_ij = ½⟨Δz_i Δz_j + Δz_j Δz_i⟩`). The conventional covariance matrix
//! carries an extra factor of two, `γ = 2V`, and is available through
//! [`GaussianState::gamma`]. The uncertainty constraint reads
//! `γ + iλΣ ≥ 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complexify, inverse_sym, log_det_spd, mode_indices, pinv_sym, pseudo_log_det,
    submatrix, subvector, symmetrize,
};
use crate::symplectic::{make_symplectic, sigma, SymplecticKind, SymplecticMap};

/// Default tolerance for validity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance (relative to the largest entry) for accepting a moment matrix as symmetric.
const SYMMETRY_TOL: f64 = 1e-10;

/// Outcome of an uncertainty-constraint check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub cup_satisfied: bool,
    /// Smallest eigenvalue of the Hermitian matrix `γ + iλΣ`.
    pub min_eigenvalue: f64,
    pub saturating: bool,
    pub max_ent_satisfied: bool,
}

impl ValidityReport {
    pub fn from_min_eigenvalue(min_eigenvalue: f64, tol: f64, max_ent_satisfied: bool) -> Self {
        ValidityReport {
            cup_satisfied: min_eigenvalue >= -tol,
            min_eigenvalue,
            saturating: min_eigenvalue.abs() <= tol,
            max_ent_satisfied,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.cup_satisfied && self.max_ent_satisfied
    }
}

/// Minimum eigenvalue of `γ + iλΣ` for a γ-convention covariance matrix.
pub fn cup_min_eigenvalue(gamma: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    let n = check_even_square(gamma)?;
    let h = complexify(gamma, &(sigma(n) * lambda));
    Ok(linalg::hermitian_eigenvalues(&h)[0])
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::Shape(format!(
            "expected a square matrix of positive even size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

/// A Gaussian distribution over `n`-mode phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    lambda: f64,
    means: DVector<f64>,
    moments: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from means and the second-moment matrix `V`.
    /// `V` must be symmetric to within `1e-10` relative to its largest entry;
    /// it is symmetrized on entry.
    pub fn new(lambda: f64, means: DVector<f64>, moments: DMatrix<f64>) -> Result<Self> {
        Self::with_symmetry_tol(lambda, means, moments, SYMMETRY_TOL)
    }

    pub(crate) fn with_symmetry_tol(
        lambda: f64,
        means: DVector<f64>,
        moments: DMatrix<f64>,
        rel_tol: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        let n = check_even_square(&moments)?;
        if means.len() != 2 * n {
            return Err(Error::Shape(format!(
                "means of length {} do not match {}x{} moments",
                means.len(),
                2 * n,
                2 * n
            )));
        }
        if moments.iter().chain(means.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite entry in state".into()));
        }
        let scale = linalg::max_abs(&moments).max(1.0);
        if linalg::asymmetry(&moments) > rel_tol * scale {
            return Err(Error::Shape("moment matrix is not symmetric".into()));
        }
        Ok(GaussianState { lambda, means, moments: symmetrize(&moments) })
    }

    /// Builds a state from the γ-convention covariance matrix.
    pub fn from_gamma(lambda: f64, means: DVector<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        Self::new(lambda, means, gamma * 0.5)
    }

    /// Saturating product state `V = (λ/2)I` centred at the origin.
    pub fn vacuum(lambda: f64, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidDimension("mode count must be at least 1".into()));
        }
        Self::new(
            lambda,
            DVector::zeros(2 * modes),
            DMatrix::identity(2 * modes, 2 * modes) * (lambda / 2.0),
        )
    }

    /// Product state with `V = ν(λ/2)I` per mode.
    pub fn thermal(lambda: f64, modes: usize, nu: f64) -> Result<Self> {
        let v = Self::vacuum(lambda, modes)?;
        Self::new(lambda, v.means, v.moments * nu)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn modes(&self) -> usize {
        self.means.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &DVector<f64> {
        &self.means
    }

    pub fn moments(&self) -> &DMatrix<f64> {
        &self.moments
    }

    /// Covariance matrix in the `γ = 2V` convention.
    pub fn gamma(&self) -> DMatrix<f64> {
        &self.moments * 2.0
    }

    pub fn with_means(&self, means: DVector<f64>) -> Result<Self> {
        Self::new(self.lambda, means, self.moments.clone())
    }

    pub fn displaced(&self, shift: &DVector<f64>) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::Shape("displacement length mismatch".into()));
        }
        Self::new(self.lambda, &self.means + shift, self.moments.clone())
    }

    /// Checks `2V + iλΣ ≥ 0`.
    pub fn validate(&self, tol: f64) -> ValidityReport {
        let min = cup_min_eigenvalue(&self.gamma(), self.lambda)
            .expect("state dimensions are checked on construction");
        ValidityReport::from_min_eigenvalue(min, tol, true)
    }

    /// Multivariate normal density at `z`. Singular moment matrices are
    /// handled with the pseudoinverse and pseudo-determinant, i.e. the density
    /// is taken relative to the support.
    pub fn density_at(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point of length {} for a {}-dimensional state",
                z.len(),
                self.dim()
            )));
        }
        let dz = DVector::from_column_slice(z) - &self.means;
        Ok(gaussian_density(&dz, &self.moments))
    }

    /// Differential entropy `½ ln((2πe)^{2n} det V)`; `-∞` for singular `V`.
    pub fn entropy(&self) -> f64 {
        match log_det_spd(&self.moments) {
            Some(ld) => 0.5 * (self.dim() as f64 * (2.0 * PI * std::f64::consts::E).ln() + ld),
            None => f64::NEG_INFINITY,
        }
    }

    /// Joint state of two independent systems, `self` first.
    pub fn tensor(&self, other: &GaussianState) -> Result<Self> {
        if self.lambda != other.lambda {
            return Err(Error::Config(format!(
                "lambda mismatch in tensor product ({} vs {})",
                self.lambda, other.lambda
            )));
        }
        let mut means = DVector::zeros(self.dim() + other.dim());
        means.rows_mut(0, self.dim()).copy_from(&self.means);
        means.rows_mut(self.dim(), other.dim()).copy_from(&other.means);
        Self::new(self.lambda, means, linalg::direct_sum(&self.moments, &other.moments))
    }

    /// Marginal on the listed modes, in the listed order.
    pub fn marginal(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("marginal needs at least one mode".into()));
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= self.modes() || modes[..i].contains(&m) {
                return Err(Error::Config(format!("invalid mode subset {modes:?}")));
            }
        }
        let idx = mode_indices(modes);
        Self::new(self.lambda, subvector(&self.means, &idx), submatrix(&self.moments, &idx, &idx))
    }

    /// Applies `z ↦ Sᵀz + c`.
    pub fn transform(&self, map: &SymplecticMap, shift: Option<&DVector<f64>>) -> Result<Self> {
        if map.mode_count() != self.modes() {
            return Err(Error::Shape(format!(
                "{}-mode map applied to {}-mode state",
                map.mode_count(),
                self.modes()
            )));
        }
        let scale = linalg::max_abs(map.matrix()).max(1.0).powi(2);
        if !map.is_symplectic(1e-8 * scale) {
            return Err(Error::Precondition("transform requires a symplectic map".into()));
        }
        let s = map.matrix();
        let mut means = s.transpose() * &self.means;
        if let Some(c) = shift {
            if c.len() != self.dim() {
                return Err(Error::Shape("displacement length mismatch".into()));
            }
            means += c;
        }
        let moments = symmetrize(&(s.transpose() * &self.moments * s));
        Self::with_symmetry_tol(self.lambda, means, moments, 1e-8)
    }

    /// Bhattacharyya coefficient `∫√μ₁√μ₂` against another state.
    pub fn bhattacharyya_fidelity(&self, other: &GaussianState) -> Result<f64> {
        Ok(bhattacharyya(self, other)?.0)
    }
}

/// Normal density of a displacement `dz` under moment matrix `v`.
pub(crate) fn gaussian_density(dz: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    let k = dz.len() as f64;
    match log_det_spd(v) {
        Some(ld) => {
            let (inv, _) = inverse_sym(v);
            let quad = (dz.transpose() * inv * dz)[(0, 0)];
            (-0.5 * quad - 0.5 * (k * (2.0 * PI).ln() + ld)).exp()
        }
        None => {
            let (inv, _) = pinv_sym(v);
            let (pld, rank) = pseudo_log_det(v);
            let quad = (dz.transpose() * inv * dz)[(0, 0)];
            (-0.5 * quad - 0.5 * (rank as f64 * (2.0 * PI).ln() + pld)).exp()
        }
    }
}

/// Bhattacharyya coefficient with a flag that is set when the averaged
/// moment matrix had to be pseudo-inverted.
pub fn bhattacharyya(a: &GaussianState, b: &GaussianState) -> Result<(f64, bool)> {
    if a.dim() != b.dim() {
        return Err(Error::Shape("fidelity between states of different dimension".into()));
    }
    let m = (a.moments() + b.moments()) * 0.5;
    let dd = b.means() - a.means();
    let (inv, singular) = inverse_sym(&m);
    let quad = (dd.transpose() * inv * &dd)[(0, 0)];
    let ld = |v: &DMatrix<f64>| log_det_spd(v).unwrap_or_else(|| pseudo_log_det(v).0);
    let log_bc = 0.25 * ld(a.moments()) + 0.25 * ld(b.moments()) - 0.5 * ld(&m) - quad / 8.0;
    Ok((log_bc.exp().min(1.0), singular))
}

/// One-mode state with `q_θ = cosθ·q + sinθ·p` centred on `a` with variance
/// `(λ/2)e^{-2r}` and the conjugate quadrature at variance `(λ/2)e^{2r}`.
pub fn quadrature_state(theta: f64, a: f64, r: f64, lambda: f64) -> Result<GaussianState> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("squeezing must be non-negative, got {r}")));
    }
    quadrature_state_with_variances(
        theta,
        a,
        0.5 * lambda * (-2.0 * r).exp(),
        0.5 * lambda * (2.0 * r).exp(),
        lambda,
    )
}

/// One-mode state with explicit variances along `q_θ` and its conjugate.
pub fn quadrature_state_with_variances(
    theta: f64,
    a: f64,
    measured_var: f64,
    conjugate_var: f64,
    lambda: f64,
) -> Result<GaussianState> {
    let frame = GaussianState::new(
        lambda,
        DVector::from_vec(vec![a, 0.0]),
        DMatrix::from_diagonal(&DVector::from_vec(vec![measured_var, conjugate_var])),
    )?;
    // Undo the rotation that takes (q, p) to (q_θ, p_θ).
    let back = make_symplectic(&SymplecticKind::Rotation { theta: -theta }, &[0], 1)?;
    frame.transform(&back, None)
}

/// The `D₊(r) = cosh(2r)·diag(1, λ², …)` and `D₋(r) = sinh(2r)·diag(1, −λ², …)`
/// blocks of the regularized perfectly correlated state, γ-convention.
pub fn correlation_blocks(r: f64, lambda: f64, modes: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let plus = DVector::from_fn(2 * modes, |i, _| if i % 2 == 0 { c } else { c * lambda * lambda });
    let minus = DVector::from_fn(2 * modes, |i, _| if i % 2 == 0 { s } else { -s * lambda * lambda });
    (DMatrix::from_diagonal(&plus), DMatrix::from_diagonal(&minus))
}

/// Regularized perfectly correlated state on `2·modes` modes: system `A` on
/// the first `modes` modes, `B` on the rest, `q_A ≈ q_B`, `p_A ≈ −p_B`.
pub fn epr_state_multi(r: f64, lambda: f64, modes: usize) -> Result<GaussianState> {
    if !(r >= 0.0) {
        return Err(Error::Config(format!("squeezing must be non-negative, got {r}")));
    }
    if modes == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    let (plus, minus) = correlation_blocks(r, lambda, modes);
    let k = 2 * modes;
    let mut gamma = DMatrix::zeros(2 * k, 2 * k);
    gamma.view_mut((0, 0), (k, k)).copy_from(&plus);
    gamma.view_mut((k, k), (k, k)).copy_from(&plus);
    gamma.view_mut((0, k), (k, k)).copy_from(&minus);
    gamma.view_mut((k, 0), (k, k)).copy_from(&minus);
    GaussianState::from_gamma(lambda, DVector::zeros(2 * k), gamma)
}

/// Two-mode regularized perfectly correlated state.
pub fn epr_state(r: f64, lambda: f64) -> Result<GaussianState> {
    epr_state_multi(r, lambda, 1)
}
