use super::{Relation, ScenarioReport};
use crate::error::{Error, Result};
use crate::linalg::max_abs_diff;
use crate::measurement::{condition, GaussianIndicator};
use crate::state::{epr_state, GaussianState};

/// Prepares `μ_AC` (regularized correlated state) next to the target
/// `μ_DB`, conditions on the correlated-pair response of `(C, D)` at
/// outcome `0` and compares the resulting `AB` state with the target.
///
/// Mode order in the joint state is `(A, C, D, B)`. The outcome-0 response
/// enforces `q_C ≈ q_D`, `p_C ≈ −p_D`, which together with `q_A ≈ q_C`,
/// `p_A ≈ −p_C` identifies `z_A` with `z_D`.
pub fn run_entanglement_swap(target: &GaussianState, r: f64, tolerance: f64) -> Result<ScenarioReport> {
    if target.modes() != 2 {
        return Err(Error::Config("swap target must have two modes".into()));
    }
    let lambda = target.lambda();
    if !target.validate(1e-9).cup_satisfied {
        return Err(Error::Precondition("swap target violates the uncertainty constraint".into()));
    }
    let mut rep = ScenarioReport::new("entanglement-swap");
    rep.param("r", r).param("lambda", lambda).param("tolerance", tolerance);

    let joint = epr_state(r, lambda)?.tensor(target)?;
    let ind = GaussianIndicator::correlated_pair([1, 2], r, lambda)?;
    let rec = condition(&joint, &ind, &[0.0; 4])?;
    let ab = rec.posterior.as_gaussian().expect("Gaussian conditioning").clone();

    let dev_v = max_abs_diff(ab.moments(), target.moments());
    let dev_d = (ab.means() - target.means()).amax();
    // Conditioning cancels O(cosh 2r) entries; rounding sets the floor.
    let cup_tol = 1e-9 + 1e-14 * (2.0 * r).cosh();
    rep.stat("maxMomentDeviation", dev_v).stat("maxMeanDeviation", dev_d);
    rep.analytic("moment-deviation", 0.0, dev_v, tolerance, Relation::Close)
        .analytic("mean-deviation", 0.0, dev_d, tolerance * (1.0 + target.means().amax()), Relation::Close)
        .analytic("swapped-state-cup-min-eigenvalue", 0.0, ab.validate(cup_tol).min_eigenvalue, cup_tol, Relation::AtLeast);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn vacuum_target_at_r8() {
        let target = GaussianState::vacuum(1.0, 2).unwrap();
        let rep = run_entanglement_swap(&target, 8.0, 1e-3).unwrap();
        assert!(rep.pass, "{:#?}", rep.checks);
    }

    #[test]
    fn means_are_carried_over() {
        let target = GaussianState::vacuum(1.0, 2)
            .unwrap()
            .with_means(DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]))
            .unwrap();
        let rep = run_entanglement_swap(&target, 8.0, 1e-3).unwrap();
        assert!(rep.statistic("maxMeanDeviation").unwrap() < 1e-3);
    }
}
