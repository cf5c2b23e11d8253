use crate::error::{invalid, Result};
use crate::radial::Spinor;

/// ‖1_S ψ‖ with S = {r ≤ radius}.
pub fn region_mass(psi: &Spinor, radius: f64) -> Result<f64> {
    let g = psi.grid();
    if radius > g.length() * (1.0 + 1e-12) {
        return Err(invalid(format!("region radius {radius} exceeds the box {}", g.length())));
    }
    let m = g.nodes_within(radius);
    Ok((g.h() * psi.data()[..m].iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt())
}

/// √Σ|⟨state_i, ψ⟩|² for orthonormal `states`.
pub fn subspace_overlap(psi: &Spinor, states: &[Spinor]) -> Result<f64> {
    for (a, sa) in states.iter().enumerate() {
        for (b, sb) in states.iter().enumerate().skip(a) {
            let want = if a == b { 1.0 } else { 0.0 };
            let dev = (sa.inner(sb) - want).norm();
            if dev > 1e-8 {
                return Err(invalid(format!("states are not orthonormal: Gram({a},{b}) deviates by {dev:.2e}")));
            }
        }
    }
    Ok(states.iter().map(|s| s.inner(psi).norm_sqr()).sum::<f64>().sqrt())
}
