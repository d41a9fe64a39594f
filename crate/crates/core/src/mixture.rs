//! Finite Gaussian mixtures. These satisfy the moment constraint on their
//! total covariance but are not entropy-maximizing, which makes them the
//! natural counterexample family for dropping the max-ent requirement.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::{cup_min_eigenvalue, GaussianState, ValidityReport};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<GaussianState>,
}

impl GaussianMixture {
    /// Weights must be positive and sum to one within `1e-12`; every
    /// component must share the same dimension and λ.
    pub fn new(weights: Vec<f64>, components: Vec<GaussianState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Config("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("mixture weights sum to {total}, not 1")));
        }
        let first = &components[0];
        for c in &components[1..] {
            if c.dim() != first.dim() {
                return Err(Error::Shape("mixture components differ in dimension".into()));
            }
            if c.lambda() != first.lambda() {
                return Err(Error::Config("mixture components differ in lambda".into()));
            }
        }
        Ok(GaussianMixture { weights, components })
    }

    /// Normalizes arbitrary positive weights before building the mixture.
    pub fn normalized(weights: Vec<f64>, components: Vec<GaussianState>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Underflow("mixture weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect(), components)
    }

    pub fn single(state: GaussianState) -> Self {
        GaussianMixture { weights: vec![1.0], components: vec![state] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianState] {
        &self.components
    }

    pub fn lambda(&self) -> f64 {
        self.components[0].lambda()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    /// Total mean `Σ w_k d_k` and total moments `Σ w_k (V_k + d_k d_kᵀ) − d dᵀ`.
    pub fn moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.dim();
        let mut mean = DVector::zeros(dim);
        for (w, c) in self.weights.iter().zip(&self.components) {
            mean += c.means() * *w;
        }
        // Accumulate about the total mean to avoid cancellation for far-apart components.
        let mut v = DMatrix::zeros(dim, dim);
        for (w, c) in self.weights.iter().zip(&self.components) {
            let dd = c.means() - &mean;
            v += (c.moments() + &dd * dd.transpose()) * *w;
        }
        (mean, (&v + v.transpose()) * 0.5)
    }

    /// The entropy-maximizing Gaussian with the same first and second moments.
    pub fn moment_matched(&self) -> Result<GaussianState> {
        let (d, v) = self.moments();
        GaussianState::new(self.lambda(), d, v)
    }

    /// Number of components that differ in means or moments.
    pub fn distinct_components(&self) -> usize {
        let mut distinct: Vec<&GaussianState> = Vec::new();
        for c in &self.components {
            if !distinct.contains(&c) {
                distinct.push(c);
            }
        }
        distinct.len()
    }

    /// Uncertainty check on the total moments. The max-ent flag is false
    /// whenever more than one distinct component is present.
    pub fn validate(&self, tol: f64) -> ValidityReport {
        let (_, v) = self.moments();
        let min = cup_min_eigenvalue(&(v * 2.0), self.lambda())
            .expect("component dimensions are checked on construction");
        ValidityReport::from_min_eigenvalue(min, tol, self.distinct_components() == 1)
    }

    /// Marginal of every component on the listed modes.
    pub fn marginal(&self, modes: &[usize]) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| c.marginal(modes))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianMixture { weights: self.weights.clone(), components: comps })
    }
}

/// Parameters of the two-system max-ent counterexample: a four-peaked
/// distribution on `A` at `(±q0, ±p0)` with widths `(dq, dp)`, and `B`
/// tied to `A` by `q_B ≈ q_A`, `p_B ≈ −p_A` at the same widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntCounterexample {
    pub q0: f64,
    pub p0: f64,
    pub dq: f64,
    pub dp: f64,
    pub lambda: f64,
}

impl Default for MaxEntCounterexample {
    fn default() -> Self {
        MaxEntCounterexample { q0: 100.0, p0: 100.0, dq: 0.01, dp: 0.01, lambda: 1.0 }
    }
}

impl MaxEntCounterexample {
    /// The single-system four-peaked distribution on `A`.
    pub fn single(&self) -> Result<GaussianMixture> {
        let mut comps = Vec::with_capacity(4);
        for (sq, sp) in SIGNS {
            comps.push(GaussianState::new(
                self.lambda,
                DVector::from_vec(vec![sq * self.q0, sp * self.p0]),
                DMatrix::from_diagonal(&DVector::from_vec(vec![self.dq.powi(2), self.dp.powi(2)])),
            )?);
        }
        GaussianMixture::new(vec![0.25; 4], comps)
    }

    /// The correlated two-system version on modes `(A, B)`.
    pub fn correlated(&self) -> Result<GaussianMixture> {
        let (vq, vp) = (self.dq.powi(2), self.dp.powi(2));
        // q_B = q_A + e_q, p_B = −p_A + e_p with e ~ N(0, δ²)
        let mut v = DMatrix::zeros(4, 4);
        v[(0, 0)] = vq;
        v[(0, 2)] = vq;
        v[(2, 0)] = vq;
        v[(2, 2)] = 2.0 * vq;
        v[(1, 1)] = vp;
        v[(1, 3)] = -vp;
        v[(3, 1)] = -vp;
        v[(3, 3)] = 2.0 * vp;
        let mut comps = Vec::with_capacity(4);
        for (sq, sp) in SIGNS {
            let (q, p) = (sq * self.q0, sp * self.p0);
            comps.push(GaussianState::new(
                self.lambda,
                DVector::from_vec(vec![q, p, q, -p]),
                v.clone(),
            )?);
        }
        GaussianMixture::new(vec![0.25; 4], comps)
    }

    /// `q0 ≫ δ′q ≫ δq` and `p0 ≫ δ′p ≫ δp`, with "≫" read as a factor of ten.
    pub fn ordering_holds(&self, indicator_dq: f64, indicator_dp: f64) -> bool {
        let much = |a: f64, b: f64| a >= 10.0 * b;
        much(self.q0, indicator_dq)
            && much(indicator_dq, self.dq)
            && much(self.p0, indicator_dp)
            && much(indicator_dp, self.dp)
    }
}

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
