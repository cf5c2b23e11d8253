use crate::exec::Exec;
use crate::gef::SpectralBasis;
use crate::radial::Spinor;
use crate::C64;

fn bump_tail(y: f64) -> f64 {
    if y > 0.0 {
        (-1.0 / y).exp()
    } else {
        0.0
    }
}

/// C^∞ ramp: 0 for x ≤ 1, 1 for x ≥ 2.
pub fn rho_hat(x: f64) -> f64 {
    let t = (x - 1.0).clamp(0.0, 1.0);
    let a = bump_tail(t);
    let b = bump_tail(1.0 - t);
    a / (a + b)
}

fn weight(momentum: Option<f64>, kappa: f64) -> f64 {
    momentum.map_or(0.0, |k| rho_hat(k / kappa))
}

/// ρ_κ ψ: transform, multiply by ρ̂(k/κ), transform back. Gap states carry
/// no momentum and are removed.
pub fn apply_mollifier(psi: &Spinor, kappa: f64, basis: &SpectralBasis, exec: Exec) -> Spinor {
    let mut c = basis.forward(psi, exec);
    for (z, m) in c.iter_mut().zip(basis.momenta()) {
        *z *= weight(*m, kappa);
    }
    basis.inverse(&c, exec)
}

/// ‖(1 − ρ_κ)ψ‖ from precomputed coefficients.
pub fn complement_norm(coeffs: &[C64], kappa: f64, basis: &SpectralBasis) -> f64 {
    coeffs
        .iter()
        .zip(basis.momenta())
        .map(|(z, m)| z.norm_sqr() * (1.0 - weight(*m, kappa)).powi(2))
        .sum::<f64>()
        .sqrt()
}
