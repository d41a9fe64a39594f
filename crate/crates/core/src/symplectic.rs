//! Symplectic linear algebra on phase space.
//!
//! **Coordinate ordering is interleaved**: a vector over `n` modes is
//! `(q1, p1, q2, p2, …, qn, pn)`, and every matrix in this crate uses that
//! ordering. Much of the continuous-variable literature uses
//! `(q1…qn, p1…pn)` instead; convert before comparing.
//!
//! A [`SymplecticMap`] `S` acts on coordinates as `z ↦ Sᵀz`, so moment
//! matrices transform as `V ↦ SᵀVS`.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_abs_diff;

/// Default tolerance used when a constructed map is checked for symplecticity.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// A point in phase space with interleaved `(q, p)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(DVector<f64>);

impl PhaseVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidDimension(format!(
                "phase vector length {} is not a positive even number",
                coords.len()
            )));
        }
        Ok(PhaseVector(DVector::from_vec(coords)))
    }

    pub fn zeros(modes: usize) -> Self {
        PhaseVector(DVector::zeros(2 * modes))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }

    pub fn modes(&self) -> usize {
        self.0.len() / 2
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for PhaseVector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// The skew form `Σ = ⊕ [[0, -1], [1, 0]]` on `n` modes.
pub fn build_sigma(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    Ok(sigma(n))
}

pub(crate) fn sigma(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        s[(2 * i, 2 * i + 1)] = -1.0;
        s[(2 * i + 1, 2 * i)] = 1.0;
    }
    s
}

fn even_square(a: &DMatrix<f64>) -> Result<usize> {
    if !a.is_square() || a.nrows() == 0 || !a.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix of positive even size, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows() / 2)
}

/// `true` iff every entry of `AᵀΣA − Σ` is at most `tol` in magnitude.
pub fn is_symplectic(a: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = even_square(a)?;
    let s = sigma(n);
    Ok(max_abs_diff(&(a.transpose() * &s * a), &s) <= tol)
}

/// Linear Poisson bracket `{u·z, v·z} = Σᵢ (u_qᵢ v_pᵢ − u_pᵢ v_qᵢ) = uᵀΣᵀv`,
/// normalized so that `{q, p} = 1`. Zero iff the two linear variables are
/// jointly knowable.
pub fn poisson_bracket_linear(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!("length mismatch {} vs {}", u.len(), v.len())));
    }
    if u.is_empty() || !u.len().is_multiple_of(2) {
        return Err(Error::Shape(format!("length {} is not a positive even number", u.len())));
    }
    Ok(u.chunks(2)
        .zip(v.chunks(2))
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .sum())
}

/// Elementary symplectic generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymplecticKind {
    /// Phase rotation `exp(θΣ₁)` on every listed mode; `q ↦ cosθ·q + sinθ·p`.
    Rotation { theta: f64 },
    /// `q ↦ e^{-r}q`, `p ↦ e^{r}p` on every listed mode.
    Squeeze { r: f64 },
    /// Two-mode mixer: `q_a ↦ cosθ·q_a + sinθ·q_b`, `q_b ↦ −sinθ·q_a + cosθ·q_b`, same for `p`.
    BeamSplitter { theta: f64 },
    /// Evolution under `H = χ q_a p_b` for time `t`, with `strength = χt`:
    /// `q_b ↦ q_b + χt·q_a`, `p_a ↦ p_a − χt·p_b`.
    QpCoupling { strength: f64 },
    /// Mode relabelling: output mode `i` carries input mode `perm[i]`.
    Permutation { perm: Vec<usize> },
}

impl SymplecticKind {
    pub fn name(&self) -> &'static str {
        match self {
            SymplecticKind::Rotation { .. } => "rotation",
            SymplecticKind::Squeeze { .. } => "squeeze",
            SymplecticKind::BeamSplitter { .. } => "beam-splitter",
            SymplecticKind::QpCoupling { .. } => "qp-coupling",
            SymplecticKind::Permutation { .. } => "permutation",
        }
    }

    /// Build a kind from its name and a scalar parameter (ignored for
    /// permutations, which take their order from the mode list).
    pub fn from_name(name: &str, param: f64) -> Result<Self> {
        let kind = match name {
            "rotation" => SymplecticKind::Rotation { theta: param },
            "squeeze" => SymplecticKind::Squeeze { r: param },
            "beam-splitter" | "beamsplitter" => SymplecticKind::BeamSplitter { theta: param },
            "qp-coupling" => SymplecticKind::QpCoupling { strength: param },
            "permutation" => SymplecticKind::Permutation { perm: Vec::new() },
            other => return Err(Error::Config(format!("unknown symplectic kind '{other}'"))),
        };
        Ok(kind)
    }
}

impl FromStr for SymplecticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s, 0.0)
    }
}

/// A linear symplectic map on `n` modes, acting as `z ↦ Sᵀz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    /// Wraps `matrix` after checking `AᵀΣA = Σ` to `tol`.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !is_symplectic(&matrix, tol)? {
            return Err(Error::Precondition("matrix is not symplectic".into()));
        }
        Ok(SymplecticMap { matrix })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMap { matrix: DMatrix::identity(2 * n, 2 * n) }
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        SymplecticMap { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mode_count(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// The matrix applied to coordinates, `Sᵀ`.
    pub fn action(&self) -> DMatrix<f64> {
        self.matrix.transpose()
    }

    /// The map that applies `self` first and then `next`.
    pub fn then(&self, next: &SymplecticMap) -> SymplecticMap {
        // z ↦ nextᵀ selfᵀ z = (self · next)ᵀ z
        SymplecticMap { matrix: &self.matrix * &next.matrix }
    }

    pub fn inverse(&self) -> SymplecticMap {
        // S⁻¹ = −Σ Sᵀ Σ for symplectic S.
        let s = sigma(self.mode_count());
        SymplecticMap { matrix: -(&s * self.matrix.transpose() * &s) }
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        is_symplectic(&self.matrix, tol).unwrap_or(false)
    }
}

impl fmt::Display for SymplecticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

fn check_modes(modes: &[usize], n: usize) -> Result<()> {
    for (i, &m) in modes.iter().enumerate() {
        if m >= n {
            return Err(Error::Config(format!("mode {m} out of range for {n} modes")));
        }
        if modes[..i].contains(&m) {
            return Err(Error::Config(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Builds an elementary symplectic map on `n` modes acting on `modes`.
pub fn make_symplectic(kind: &SymplecticKind, modes: &[usize], n: usize) -> Result<SymplecticMap> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    check_modes(modes, n)?;
    let finite = match kind {
        SymplecticKind::Rotation { theta } | SymplecticKind::BeamSplitter { theta } => theta.is_finite(),
        SymplecticKind::Squeeze { r } => r.is_finite(),
        SymplecticKind::QpCoupling { strength } => strength.is_finite(),
        SymplecticKind::Permutation { .. } => true,
    };
    if !finite {
        return Err(Error::Config(format!("non-finite parameter for {}", kind.name())));
    }

    // Build the coordinate action M (z' = Mz), then store S = Mᵀ.
    let mut action = DMatrix::<f64>::identity(2 * n, 2 * n);
    match kind {
        SymplecticKind::Rotation { theta } => {
            if modes.is_empty() {
                return Err(Error::Config("rotation needs at least one mode".into()));
            }
            let (s, c) = theta.sin_cos();
            for &m in modes {
                let (q, p) = (2 * m, 2 * m + 1);
                action[(q, q)] = c;
                action[(q, p)] = s;
                action[(p, q)] = -s;
                action[(p, p)] = c;
            }
        }
        SymplecticKind::Squeeze { r } => {
            if modes.is_empty() {
                return Err(Error::Config("squeeze needs at least one mode".into()));
            }
            for &m in modes {
                action[(2 * m, 2 * m)] = (-r).exp();
                action[(2 * m + 1, 2 * m + 1)] = r.exp();
            }
        }
        SymplecticKind::BeamSplitter { theta } => {
            let [a, b] = two_modes(kind, modes)?;
            let (s, c) = theta.sin_cos();
            for off in 0..2 {
                let (i, j) = (2 * a + off, 2 * b + off);
                action[(i, i)] = c;
                action[(i, j)] = s;
                action[(j, i)] = -s;
                action[(j, j)] = c;
            }
        }
        SymplecticKind::QpCoupling { strength } => {
            let [a, b] = two_modes(kind, modes)?;
            action[(2 * b, 2 * a)] = *strength;
            action[(2 * a + 1, 2 * b + 1)] = -*strength;
        }
        SymplecticKind::Permutation { perm } => {
            let perm: Vec<usize> = if perm.is_empty() { modes.to_vec() } else { perm.clone() };
            if perm.len() != n {
                return Err(Error::Config(format!(
                    "permutation of length {} does not cover {n} modes",
                    perm.len()
                )));
            }
            check_modes(&perm, n)?;
            action.fill(0.0);
            for (out, &src) in perm.iter().enumerate() {
                action[(2 * out, 2 * src)] = 1.0;
                action[(2 * out + 1, 2 * src + 1)] = 1.0;
            }
        }
    }
    Ok(SymplecticMap { matrix: action.transpose() })
}

fn two_modes(kind: &SymplecticKind, modes: &[usize]) -> Result<[usize; 2]> {
    match modes {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Config(format!("{} needs exactly two modes", kind.name()))),
    }
}

/// Deterministic pseudo-random symplectic map `exp(ΣH)` with `H` symmetric,
/// entries i.i.d. standard normal scaled by `1/(2n)`.
pub fn random_symplectic(n: usize, seed: u64) -> Result<SymplecticMap> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    let scale = 1.0 / dim as f64;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = StandardNormal.sample(&mut rng);
            h[(i, j)] = x * scale;
            h[(j, i)] = x * scale;
        }
    }
    let generator = sigma(n) * h;
    Ok(SymplecticMap { matrix: generator.exp() })
}
