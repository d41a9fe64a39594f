//! Monte Carlo engine over ontic states: draws phase-space points from
//! epistemic states, pushes them through dynamics and simulates
//! measurement outcomes from response functions.
//!
//! Random numbers come from ChaCha8 streams keyed by `(seed, purpose)` with
//! one stream per fixed-size chunk of points, so results depend only on the
//! seed and never on the number of worker threads.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{channel_valid, GaussianChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, mode_indices};
use crate::measurement::{indicator_valid, GaussianIndicator};
use crate::mixture::GaussianMixture;
use crate::state::GaussianState;
use crate::symplectic::{PhaseVector, SymplecticMap};

/// Points per independent random stream.
pub const CHUNK: usize = 4096;

/// Relative size of a negative eigenvalue that is clamped to zero when
/// factoring a moment matrix; anything more negative is rejected.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Clone, Copy)]
#[repr(u64)]
enum Purpose {
    States = 1,
    Channel = 2,
    Measurement = 3,
    Noise = 4,
    Auxiliary = 5,
}

fn stream(seed: u64, purpose: Purpose, chunk: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(chunk as u64);
    rng
}

/// A `dim × count` cloud of points stored row-major (one point per row).
#[derive(Debug, Clone, PartialEq)]
pub struct OnticSampleSet {
    dim: usize,
    data: Vec<f64>,
    seed: u64,
    source: String,
}

impl OnticSampleSet {
    pub fn from_rows(dim: usize, data: Vec<f64>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!("{} values do not form rows of length {dim}", data.len())));
        }
        Ok(OnticSampleSet { dim, data, seed, source: source.into() })
    }

    pub fn from_points(points: &[PhaseVector], seed: u64, source: impl Into<String>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Shape("points differ in dimension".into()));
        }
        let data = points.iter().flat_map(|p| p.iter().copied()).collect();
        Self::from_rows(dim, data, seed, source)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn points(&self) -> Vec<PhaseVector> {
        self.rows()
            .map(|r| PhaseVector::new(r.to_vec()).expect("sample dimension is even"))
            .collect()
    }

    /// Coordinates of the listed modes for every point.
    pub fn select_modes(&self, modes: &[usize]) -> Result<Self> {
        if modes.iter().any(|&m| 2 * m >= self.dim) {
            return Err(Error::Shape(format!("modes {modes:?} outside a {}-dimensional set", self.dim)));
        }
        let idx = mode_indices(modes);
        let data = self.rows().flat_map(|r| idx.iter().map(move |&i| r[i])).collect();
        Self::from_rows(idx.len(), data, self.seed, format!("{} | modes {modes:?}", self.source))
    }

    /// Binary layout: `u64` count, `u64` dimension, then `count × dim`
    /// `f64` values row-major, everything little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, seed: u64, source: impl Into<String>) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let count = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word) as usize;
        let total = count
            .checked_mul(dim)
            .ok_or_else(|| Error::Parse("sample dump header overflows".into()))?;
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            r.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        Self::from_rows(dim, data, seed, source)
    }

    /// One row per point, header `z0,z1,…`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows_csv(w, "z", self.dim, &self.data)
    }
}

/// Measurement outcome labels, one row per simulated point.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeList {
    dim: usize,
    data: Vec<f64>,
}

impl OutcomeList {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// The outcomes viewed as a point cloud in outcome space.
    pub fn as_samples(&self, seed: u64) -> OnticSampleSet {
        OnticSampleSet { dim: self.dim, data: self.data.clone(), seed, source: "outcomes".into() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows_csv(w, "y", self.dim, &self.data)
    }
}

fn write_rows_csv<W: Write>(mut w: W, prefix: &str, dim: usize, data: &[f64]) -> Result<()> {
    let header: Vec<String> = (0..dim).map(|i| format!("{prefix}{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in data.chunks_exact(dim) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Either kind of epistemic state the sampler accepts.
#[derive(Debug, Clone, Copy)]
pub enum SampleSource<'a> {
    State(&'a GaussianState),
    Mixture(&'a GaussianMixture),
}

impl<'a> From<&'a GaussianState> for SampleSource<'a> {
    fn from(s: &'a GaussianState) -> Self {
        SampleSource::State(s)
    }
}

impl<'a> From<&'a GaussianMixture> for SampleSource<'a> {
    fn from(m: &'a GaussianMixture) -> Self {
        SampleSource::Mixture(m)
    }
}

/// `A` with `A Aᵀ = V`, from a symmetric eigendecomposition with small
/// negative eigenvalues clamped to zero.
pub fn factor_moments(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = linalg::symmetrize(v).symmetric_eigen();
    let top = eig.eigenvalues.amax().max(1.0);
    let mut scale = DVector::zeros(eig.eigenvalues.len());
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < -CLAMP_TOL * top {
            return Err(Error::Precondition(format!(
                "moment matrix has eigenvalue {ev:e}; it is not positive semidefinite"
            )));
        }
        scale[i] = ev.max(0.0).sqrt();
    }
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&scale))
}

fn fill_gaussian(out: &mut [f64], mean: &DVector<f64>, factor: &DMatrix<f64>, rng: &mut ChaCha8Rng) {
    let dim = mean.len();
    let mut xi = vec![0.0; factor.ncols()];
    for x in xi.iter_mut() {
        *x = StandardNormal.sample(rng);
    }
    for i in 0..dim {
        let mut acc = mean[i];
        for (j, x) in xi.iter().enumerate() {
            acc += factor[(i, j)] * x;
        }
        out[i] = acc;
    }
}

/// Draws `count` points from the exact law of the state or mixture.
pub fn sample_states<'a>(source: impl Into<SampleSource<'a>>, count: usize, seed: u64) -> Result<OnticSampleSet> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let source = source.into();
    let (weights, comps): (Vec<f64>, Vec<&GaussianState>) = match source {
        SampleSource::State(s) => (vec![1.0], vec![s]),
        SampleSource::Mixture(m) => (m.weights().to_vec(), m.components().iter().collect()),
    };
    let dim = comps[0].dim();
    let factors = comps.iter().map(|c| factor_moments(c.moments())).collect::<Result<Vec<_>>>()?;
    let picker = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;
    let mut data = vec![0.0; count * dim];
    data.par_chunks_mut(CHUNK * dim).enumerate().for_each(|(c, block)| {
        let mut rng = stream(seed, Purpose::States, c);
        for out in block.chunks_exact_mut(dim) {
            let k = if comps.len() == 1 { 0 } else { picker.sample(&mut rng) };
            fill_gaussian(out, comps[k].means(), &factors[k], &mut rng);
        }
    });
    let description = match source {
        SampleSource::State(_) => format!("gaussian state, {} modes", dim / 2),
        SampleSource::Mixture(m) => format!("gaussian mixture, {} components, {} modes", m.components().len(), dim / 2),
    };
    OnticSampleSet::from_rows(dim, data, seed, description)
}

/// Applies `z ↦ Mz + c` to every point.
pub fn push_affine(set: &OnticSampleSet, m: &DMatrix<f64>, c: Option<&DVector<f64>>) -> Result<OnticSampleSet> {
    let dim = set.dim;
    if m.ncols() != dim || c.is_some_and(|c| c.len() != m.nrows()) {
        return Err(Error::Shape(format!("{}x{} map on {dim}-dimensional points", m.nrows(), m.ncols())));
    }
    let out_dim = m.nrows();
    let mut data = vec![0.0; set.len() * out_dim];
    data.par_chunks_mut(out_dim)
        .zip(set.data.par_chunks(dim))
        .for_each(|(out, z)| {
            for i in 0..out_dim {
                let mut acc = c.map_or(0.0, |c| c[i]);
                for (j, zj) in z.iter().enumerate() {
                    acc += m[(i, j)] * zj;
                }
                out[i] = acc;
            }
        });
    Ok(OnticSampleSet { dim: out_dim, data, seed: set.seed, source: set.source.clone() })
}

/// Ontic Hamiltonian flow: `z ↦ Sᵀz + c` pointwise.
pub fn push_symplectic(set: &OnticSampleSet, map: &SymplecticMap, c: Option<&DVector<f64>>) -> Result<OnticSampleSet> {
    push_affine(set, &map.action(), c)
}

/// Ontic realization of a channel: `z ↦ Xᵀz + δ + w` with independent
/// `w ~ N(0, N)` per point.
pub fn push_channel(set: &OnticSampleSet, ch: &GaussianChannel, seed: u64) -> Result<OnticSampleSet> {
    let tol = 1e-9 * linalg::max_abs(ch.noise()).max(1.0);
    let rep = channel_valid(ch, tol);
    if !rep.cup_satisfied {
        return Err(Error::Precondition(format!(
            "channel violates the validity condition (min eigenvalue {:e})",
            rep.min_eigenvalue
        )));
    }
    push_noisy_linear(set, &ch.x().transpose(), ch.delta(), ch.noise(), seed)
}

/// `z ↦ Mz + c + w`, `w ~ N(0, noise)`, without any validity check.
pub fn push_noisy_linear(
    set: &OnticSampleSet,
    m: &DMatrix<f64>,
    c: &DVector<f64>,
    noise: &DMatrix<f64>,
    seed: u64,
) -> Result<OnticSampleSet> {
    let mut moved = push_affine(set, m, Some(c))?;
    add_noise(&mut moved, noise, seed, Purpose::Channel)?;
    Ok(moved)
}

fn add_noise(set: &mut OnticSampleSet, noise: &DMatrix<f64>, seed: u64, purpose: Purpose) -> Result<()> {
    let dim = set.dim;
    if noise.shape() != (dim, dim) {
        return Err(Error::Shape("noise does not match the point dimension".into()));
    }
    let factor = factor_moments(noise)?;
    let zero = DVector::zeros(dim);
    set.data.par_chunks_mut(CHUNK * dim).enumerate().for_each(|(c, block)| {
        let mut rng = stream(seed, purpose, c);
        let mut w = vec![0.0; dim];
        for z in block.chunks_exact_mut(dim) {
            fill_gaussian(&mut w, &zero, &factor, &mut rng);
            for (zi, wi) in z.iter_mut().zip(&w) {
                *zi += wi;
            }
        }
    });
    Ok(())
}

/// Adds independent Gaussian noise with the given moments to every point.
pub fn add_gaussian_noise(set: &OnticSampleSet, noise: &DMatrix<f64>, seed: u64) -> Result<OnticSampleSet> {
    let mut out = set.clone();
    add_noise(&mut out, noise, seed, Purpose::Noise)?;
    Ok(out)
}

/// Draws one outcome per point from the indicator: the effective outcome
/// is `z_A + ε` with `ε ~ N(0, V_ind)` and the label is `L⁻¹(· − b)`.
/// The indicator must be valid at `lambda`.
pub fn simulate_measurement(
    set: &OnticSampleSet,
    ind: &GaussianIndicator,
    lambda: f64,
    seed: u64,
) -> Result<OutcomeList> {
    let rep = indicator_valid(ind, lambda, 1e-9 * linalg::max_abs(ind.moments()).max(1.0));
    if !rep.cup_satisfied {
        return Err(Error::Precondition(format!(
            "indicator violates the uncertainty constraint (min eigenvalue {:e})",
            rep.min_eigenvalue
        )));
    }
    simulate_readout(set, ind, seed)
}

/// As [`simulate_measurement`] without the validity check, for arbitrary
/// Gaussian response functions.
pub fn simulate_readout(set: &OnticSampleSet, ind: &GaussianIndicator, seed: u64) -> Result<OutcomeList> {
    let targets = mode_indices(ind.target_modes());
    if targets.iter().any(|&i| i >= set.dim) {
        return Err(Error::Shape("indicator targets modes outside the sample set".into()));
    }
    let k = targets.len();
    let factor = factor_moments(ind.moments())?;
    let label = ind
        .outcome_map()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("outcome map is not invertible".into()))?;
    let label_shift = -(&label * ind.base_mean());
    let zero = DVector::zeros(k);
    let dim = set.dim;
    let mut data = vec![0.0; set.len() * k];
    data.par_chunks_mut(CHUNK * k)
        .zip(set.data.par_chunks(CHUNK * dim))
        .enumerate()
        .for_each(|(c, (out, pts))| {
            let mut rng = stream(seed, Purpose::Measurement, c);
            let mut eff = vec![0.0; k];
            for (y, z) in out.chunks_exact_mut(k).zip(pts.chunks_exact(dim)) {
                fill_gaussian(&mut eff, &zero, &factor, &mut rng);
                for (e, &t) in eff.iter_mut().zip(&targets) {
                    *e += z[t];
                }
                for i in 0..k {
                    let mut acc = label_shift[i];
                    for j in 0..k {
                        acc += label[(i, j)] * eff[j];
                    }
                    y[i] = acc;
                }
            }
        });
    Ok(OutcomeList { dim: k, data })
}

/// `count` independent standard normals from a stream reserved for
/// auxiliary noise, so they never coincide with state or readout draws.
pub fn standard_normals(count: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, block)| {
        let mut rng = stream(seed, Purpose::Auxiliary, c);
        for x in block.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
    });
    out
}

/// Empirical first and second moments with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub empirical_mean: DVector<f64>,
    /// Unbiased central second moments, symmetrized.
    pub empirical_moments: DMatrix<f64>,
    pub count: usize,
    /// Standard error of each mean component, `s/√n`.
    pub mean_standard_errors: DVector<f64>,
    /// Delete-one jackknife standard error of each moment entry.
    pub standard_errors: DMatrix<f64>,
}

pub fn empirical_moments(set: &OnticSampleSet) -> Result<SampleStats> {
    row_stats(set.dim, &set.data)
}

pub(crate) fn row_stats(dim: usize, data: &[f64]) -> Result<SampleStats> {
    let n = data.len() / dim;
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 points for moments, got {n}")));
    }
    let nf = n as f64;
    let mut mean = DVector::zeros(dim);
    for row in data.chunks_exact(dim) {
        for i in 0..dim {
            mean[i] += row[i];
        }
    }
    mean /= nf;

    // Second pass on centred data: column sums are (numerically) zero, so
    // the delete-one covariance is (S_ij − x_i x_j − x_i x_j/(n−1)) / (n−2).
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    let mut lin = DVector::<f64>::zeros(dim);
    for row in data.chunks_exact(dim) {
        for i in 0..dim {
            let xi = row[i] - mean[i];
            lin[i] += xi;
            for j in i..dim {
                s[(i, j)] += xi * (row[j] - mean[j]);
            }
        }
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = (s[(i, j)] - lin[i] * lin[j] / nf) / (nf - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let mut se = DMatrix::from_element(dim, dim, f64::INFINITY);
    if n >= 3 {
        let mut sum = DMatrix::<f64>::zeros(dim, dim);
        let mut sum_sq = DMatrix::<f64>::zeros(dim, dim);
        for row in data.chunks_exact(dim) {
            for i in 0..dim {
                let xi = row[i] - mean[i];
                for j in i..dim {
                    let xj = row[j] - mean[j];
                    let sx = lin[i] - xi;
                    let sy = lin[j] - xj;
                    let c = (s[(i, j)] - xi * xj - sx * sy / (nf - 1.0)) / (nf - 2.0);
                    sum[(i, j)] += c;
                    sum_sq[(i, j)] += c * c;
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let m = sum[(i, j)] / nf;
                let var = ((sum_sq[(i, j)] / nf - m * m) * (nf - 1.0)).max(0.0);
                se[(i, j)] = var.sqrt();
                se[(j, i)] = se[(i, j)];
            }
        }
    }
    let mean_se = DVector::from_fn(dim, |i, _| (cov[(i, i)].max(0.0) / nf).sqrt());
    Ok(SampleStats {
        empirical_mean: mean,
        empirical_moments: cov,
        count: n,
        mean_standard_errors: mean_se,
        standard_errors: se,
    })
}

impl SampleStats {
    /// Largest `|observed − expected| / SE` over moment entries (upper
    /// triangle) and, when given, mean components.
    pub fn max_z(&self, expected_moments: &DMatrix<f64>, expected_mean: Option<&DVector<f64>>) -> f64 {
        let mut worst: f64 = 0.0;
        let dim = self.empirical_moments.nrows();
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max(z_score(
                    self.empirical_moments[(i, j)],
                    expected_moments[(i, j)],
                    self.standard_errors[(i, j)],
                ));
            }
        }
        if let Some(d) = expected_mean {
            for i in 0..dim {
                worst = worst.max(z_score(self.empirical_mean[i], d[i], self.mean_standard_errors[i]));
            }
        }
        worst
    }
}

/// `|observed − expected| / se`; an exact match with zero error is 0 and a
/// mismatch with zero error is infinite.
pub fn z_score(observed: f64, expected: f64, se: f64) -> f64 {
    let diff = (observed - expected).abs();
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        // Exact engines agree to rounding; scale the floor to the magnitudes involved.
        let floor = 1e-12 * observed.abs().max(expected.abs()).max(1e-300);
        if diff <= floor { 0.0 } else { f64::INFINITY }
    }
}
