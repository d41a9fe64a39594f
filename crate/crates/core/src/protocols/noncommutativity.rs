use nalgebra::{DMatrix, DVector};

use super::{moment_z_scores, EngineComparison, Relation, ScenarioReport, Z_THRESHOLD};
use crate::error::{Error, Result};
use crate::measurement::collapse_rule;
use crate::sampler::{row_stats, sample_states, standard_normals};
use crate::state::GaussianState;

/// Reads `q` then `p` and, separately, `p` then `q`, each readout
/// collapsing the state as in [`collapse_rule`] with conjugate variance
/// `cap` and resolution `λ²/(4·cap)`.
///
/// Ontically, a readout of `x` returns `x + ε` with `ε ~ N(0, resolution)`
/// and replaces the conjugate coordinate with a fresh `N(0, cap)` draw.
pub fn run_noncommutativity(initial: &GaussianState, cap: f64, count: usize, seed: u64) -> Result<ScenarioReport> {
    if initial.modes() != 1 {
        return Err(Error::Config("non-commutativity scenario acts on a single mode".into()));
    }
    let lambda = initial.lambda();
    let res = lambda * lambda / (4.0 * cap);
    let mut rep = ScenarioReport::new("noncommutativity");
    rep.param("cap", cap).param("resolution", res).param("lambda", lambda);

    // Outcome law of a readout: N(mean along u, uᵀVu + resolution).
    let v = initial.moments();
    let q_first = v[(0, 0)] + res;
    let p_first = v[(1, 1)] + res;
    // After the first readout the collapsed state fixes the conjugate at `cap`.
    let after_q = collapse_rule(initial, 0.0, 0.0, cap, None)?;
    let after_p = collapse_rule(initial, std::f64::consts::FRAC_PI_2, 0.0, cap, None)?;
    let p_second = after_q.moments()[(1, 1)] + res;
    let q_second = after_p.moments()[(0, 0)] + res;

    rep.stat("qOutcomeVarQFirst", q_first)
        .stat("qOutcomeVarPFirst", q_second)
        .stat("pOutcomeVarPFirst", p_first)
        .stat("pOutcomeVarQFirst", p_second)
        .stat("orderingVarianceRatioQ", q_second / q_first);
    rep.analytic("collapse-sets-conjugate-to-cap", cap, q_second - res, 1e-12, Relation::Relative)
        .analytic("collapse-sets-conjugate-to-cap-p", cap, p_second - res, 1e-12, Relation::Relative)
        .analytic(
            "collapsed-state-saturates",
            0.0,
            after_q.validate(1e-9 * cap).min_eigenvalue,
            1e-9 * cap,
            Relation::Close,
        );

    if count > 0 {
        let set = sample_states(initial, count, seed)?;
        let k = standard_normals(4 * count, seed);
        let (cap_sd, res_sd) = (cap.sqrt(), res.sqrt());
        let d = initial.means();
        let mut q_then_p = Vec::with_capacity(2 * count);
        let mut p_then_q = Vec::with_capacity(2 * count);
        for (z, k) in set.rows().zip(k.chunks_exact(4)) {
            q_then_p.extend([z[0] + res_sd * k[0], cap_sd * k[1] + res_sd * k[2]]);
            p_then_q.extend([z[1] + res_sd * k[0], cap_sd * k[3] + res_sd * k[2]]);
        }
        let diag = |a: f64, b: f64| DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]));
        let mut z = moment_z_scores(
            "q-then-p",
            &row_stats(2, &q_then_p)?,
            Some(&DVector::from_vec(vec![d[0], 0.0])),
            &diag(q_first, p_second),
        );
        z.extend(moment_z_scores(
            "p-then-q",
            &row_stats(2, &p_then_q)?,
            Some(&DVector::from_vec(vec![d[1], 0.0])),
            &diag(p_first, q_second),
        ));
        rep.compare(EngineComparison::new(count, seed, Z_THRESHOLD, z));
    }
    Ok(rep)
}
