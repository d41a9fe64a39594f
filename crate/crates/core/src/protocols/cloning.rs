use nalgebra::DMatrix;

use super::{Relation, ScenarioReport};
use crate::channel::{channel_valid, GaussianChannel};
use crate::error::{Error, Result};
use crate::symplectic::is_symplectic;
use crate::state::GaussianState;

/// Classical no-cloning: a cloner would have to map the pair
/// `(μ₁⊗a, μ₂⊗a)` with fidelity `F` to `(μ₁⊗μ₁, μ₂⊗μ₂)` with fidelity
/// `F² < F`, but valid dynamics never lowers the fidelity. Both numbers are
/// computed, and monotonicity is checked on every supplied channel.
pub fn run_no_cloning(s1: &GaussianState, s2: &GaussianState, channels: &[GaussianChannel]) -> Result<ScenarioReport> {
    if s1.dim() != s2.dim() {
        return Err(Error::Shape("no-cloning states differ in dimension".into()));
    }
    let mut rep = ScenarioReport::new("no-cloning");
    rep.param("lambda", s1.lambda()).param("channels", channels.len() as f64);

    let f = s1.bhattacharyya_fidelity(s2)?;
    let ancilla = GaussianState::vacuum(s1.lambda(), s1.modes())?;
    let f_anc = s1.tensor(&ancilla)?.bhattacharyya_fidelity(&s2.tensor(&ancilla)?)?;
    let f_clone = s1.tensor(s1)?.bhattacharyya_fidelity(&s2.tensor(s2)?)?;
    let gap = (f - f * f).abs();
    rep.stat("fidelity", f)
        .stat("fidelityWithAncilla", f_anc)
        .stat("fidelityOfClones", f_clone)
        .stat("cloningGap", gap)
        .stat("cloningConsistent", if gap <= 1e-12 { 1.0 } else { 0.0 });
    rep.analytic("ancilla-preserves-fidelity", f, f_anc, 1e-12, Relation::Close)
        .analytic("clones-square-fidelity", f * f, f_clone, 1e-12, Relation::Close);

    // (z, z′) ↦ (z, z) is linear with a rank-deficient Jacobian, so it is
    // never a symplectic flow.
    let d = s1.dim();
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        jac[(i, i)] = 1.0;
        jac[(d + i, i)] = 1.0;
    }
    let copier_symplectic = is_symplectic(&jac, 1e-9)?;
    rep.stat("copierIsSymplectic", if copier_symplectic { 1.0 } else { 0.0 });
    rep.analytic("copier-jacobian-determinant", 0.0, jac.determinant(), 0.0, Relation::Close);

    let mut worst = f64::INFINITY;
    for (i, ch) in channels.iter().enumerate() {
        let scale = crate::linalg::max_abs(ch.noise()).max(1.0);
        if !channel_valid(ch, 1e-9 * scale).cup_satisfied {
            return Err(Error::Precondition(format!("channel {i} violates the validity condition")));
        }
        let g = ch.apply(s1)?.bhattacharyya_fidelity(&ch.apply(s2)?)?;
        worst = worst.min(g - f);
    }
    if !channels.is_empty() {
        rep.stat("worstFidelityChange", worst);
        rep.analytic("fidelity-never-decreases", 0.0, worst, 1e-8, Relation::AtLeast);
    }
    Ok(rep)
}
