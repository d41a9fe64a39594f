//! Seeded generators of random valid (and deliberately invalid) objects,
//! used by the sweeps and property tests.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{dilation_induced_channel, GaussianChannel};
use crate::error::Result;
use crate::linalg::{self, symmetrize};
use crate::measurement::GaussianIndicator;
use crate::state::GaussianState;
use crate::symplectic::random_symplectic;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Product of thermal modes with `ν ∈ [1, 1 + spread]` pushed through a
/// random symplectic map, with standard-normal means. Always valid.
pub fn random_valid_state(modes: usize, lambda: f64, spread: f64, rng: &mut ChaCha8Rng) -> Result<GaussianState> {
    let moments = random_valid_moments(modes, lambda, spread, rng)?;
    let means = DVector::from_fn(2 * modes, |_, _| StandardNormal.sample(rng));
    GaussianState::new(lambda, means, moments)
}

/// A saturating state: a random symplectic image of `(λ/2)I`.
pub fn random_saturating_state(modes: usize, lambda: f64, rng: &mut ChaCha8Rng) -> Result<GaussianState> {
    random_valid_state(modes, lambda, 0.0, rng)
}

fn random_valid_moments(modes: usize, lambda: f64, spread: f64, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let mut diag = DVector::zeros(2 * modes);
    for m in 0..modes {
        let v = 1.0 + spread * rng.random::<f64>();
        diag[2 * m] = v * lambda / 2.0;
        diag[2 * m + 1] = v * lambda / 2.0;
    }
    let s = random_symplectic(modes, rng.random())?;
    Ok(symmetrize(&(s.matrix().transpose() * DMatrix::from_diagonal(&diag) * s.matrix())))
}

/// Displaced indicator on `modes` whose moments are a valid state's.
pub fn random_valid_indicator(
    target_modes: Vec<usize>,
    lambda: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GaussianIndicator> {
    let moments = random_valid_moments(target_modes.len(), lambda, 1.0, rng)?;
    GaussianIndicator::displaced(target_modes, moments)
}

/// Channel induced by a random dilation with a thermal environment, plus
/// `margin·I` extra noise so that it is strictly inside the valid set.
pub fn random_valid_channel(modes: usize, lambda: f64, margin: f64, rng: &mut ChaCha8Rng) -> Result<GaussianChannel> {
    let s = random_symplectic(2 * modes, rng.random())?;
    let env_moments = random_valid_moments(modes, lambda, 1.0, rng)?;
    let env = GaussianState::new(lambda, DVector::zeros(2 * modes), env_moments)?;
    let ch = dilation_induced_channel(&s, &env, modes)?;
    let d = 2 * modes;
    let delta = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    ch.with_noise(ch.noise() + DMatrix::identity(d, d) * margin)?.with_delta(delta)
}

/// A random channel whose validity matrix has minimum eigenvalue exactly
/// `−margin`: a valid channel with its noise lowered uniformly.
pub fn random_invalid_channel(modes: usize, lambda: f64, margin: f64, rng: &mut ChaCha8Rng) -> Result<GaussianChannel> {
    let ch = random_valid_channel(modes, lambda, 0.0, rng)?;
    let min = linalg::hermitian_eigenvalues(&ch.validity_matrix())[0];
    // The validity matrix contains 2N, so N − tI lowers every eigenvalue by 2t.
    let t = (min + margin) / 2.0;
    let d = 2 * modes;
    ch.with_noise(ch.noise() - DMatrix::identity(d, d) * t)
}
