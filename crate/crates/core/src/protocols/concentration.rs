use rand::Rng;

use super::{Relation, ScenarioReport};
use crate::error::{Error, Result};
use crate::random::{random_saturating_state, random_valid_state, rng};
use crate::symplectic::{make_symplectic, random_symplectic, SymplecticKind};

/// Uncertainty cannot be concentrated away from a subsystem: random valid
/// states under random symplectic maps, and under balanced beam-splitter
/// recombinations `(q_A ± q_B, p_A ± p_B)/√2`, keep every subsystem
/// marginal valid.
pub fn run_concentration_check(trials: usize, modes: usize, lambda: f64, seed: u64) -> Result<ScenarioReport> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if modes < 2 {
        return Err(Error::Config("concentration check needs at least two modes".into()));
    }
    let mut rep = ScenarioReport::new("concentration");
    rep.param("trials", trials as f64).param("modes", modes as f64).param("lambda", lambda);
    let subsets = subsystems(modes);
    let mut rng = rng(seed);
    let mut worst = f64::INFINITY;
    let mut forbidden = 0usize;
    let tol = 1e-8;
    for t in 0..trials {
        let state = if t % 2 == 0 {
            random_valid_state(modes, lambda, 2.0, &mut rng)?
        } else {
            // Saturating inputs are the ones closest to being squeezed out.
            let mut s = random_saturating_state(1, lambda, &mut rng)?;
            for _ in 1..modes {
                s = s.tensor(&random_saturating_state(1, lambda, &mut rng)?)?;
            }
            s
        };
        let map = random_symplectic(modes, rng.random())?;
        let a = rng.random_range(0..modes);
        let b = (a + 1 + rng.random_range(0..modes - 1)) % modes;
        let mix = make_symplectic(&SymplecticKind::BeamSplitter { theta: std::f64::consts::FRAC_PI_4 }, &[a, b], modes)?;
        for out in [state.transform(&map, None)?, state.transform(&mix, None)?, state.transform(&map.then(&mix), None)?] {
            let mut trial_worst = f64::INFINITY;
            for sub in &subsets {
                let m = out.marginal(sub)?.validate(tol).min_eigenvalue;
                trial_worst = trial_worst.min(m);
            }
            if trial_worst < -tol {
                forbidden += 1;
            }
            worst = worst.min(trial_worst);
        }
    }

    let mut product = random_saturating_state(1, lambda, &mut rng)?;
    for _ in 1..modes {
        product = product.tensor(&random_saturating_state(1, lambda, &mut rng)?)?;
    }
    let saturation = (0..modes)
        .map(|m| product.marginal(&[m]).map(|s| s.validate(tol).min_eigenvalue.abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    rep.stat("worstMarginalMinEigenvalue", worst)
        .stat("forbiddenCount", forbidden as f64)
        .stat("productMarginalSaturationGap", saturation);
    rep.analytic("all-marginals-valid", 0.0, worst, tol, Relation::AtLeast)
        .analytic("no-uncertainty-concentrating-map", 0.0, forbidden as f64, 0.0, Relation::Close)
        .analytic("product-marginals-saturate", 0.0, saturation, 1e-10, Relation::Close);
    Ok(rep)
}

/// Every proper nonempty subset of modes for up to four modes, single
/// modes and their complements beyond that.
fn subsystems(modes: usize) -> Vec<Vec<usize>> {
    if modes <= 4 {
        (1..(1usize << modes) - 1)
            .map(|mask| (0..modes).filter(|m| mask & (1 << m) != 0).collect())
            .collect()
    } else {
        let mut out = Vec::new();
        for m in 0..modes {
            out.push(vec![m]);
            out.push((0..modes).filter(|&k| k != m).collect());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let rep = run_concentration_check(40, 2, 1.0, 5).unwrap();
        assert!(rep.pass, "{:#?}", rep.checks);
    }

    #[test]
    fn subsets_of_three() {
        assert_eq!(subsystems(3).len(), 6);
    }
}
