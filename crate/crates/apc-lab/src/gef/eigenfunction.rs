use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::radial::{Channel, PotentialSpec};
use crate::spectral::lattice_solution;

/// Free solutions are matched on r ∈ [R_pot + MATCH_WINDOW.0, R_pot + MATCH_WINDOW.1].
pub const MATCH_WINDOW: (f64, f64) = (1.0, 5.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GefRecord {
    pub k: f64,
    pub energy: f64,
    pub mu: f64,
    /// Interleaved interior nodes r ≤ R_pot and the solution there, divided
    /// by the asymptotic amplitude.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub amplitude: f64,
    /// Largest interior |φ| of the plane-wave-normalized radial functions
    /// (component / (k r)), relative to the asymptotic amplitude.
    pub interior_supnorm: f64,
}

/// Regular and irregular free solutions (component value at k r) for the
/// upper (`upper = true`) or lower component.
pub fn free_pair(channel: Channel, upper: bool, k: f64, energy: f64, r: f64) -> (f64, f64) {
    let x = k * r;
    let (s, c) = x.sin_cos();
    let u0 = (s, -c);
    let u1 = (s / x - c, -c / x - s);
    let f = k / (energy + 1.0);
    match (channel, upper) {
        (Channel::Plus, true) => u1,
        (Channel::Plus, false) => (f * u0.0, f * u0.1),
        (Channel::Minus, true) => u0,
        (Channel::Minus, false) => (-f * u1.0, -f * u1.1),
    }
}

/// Least-squares coefficients (a, b) of `values ≈ a·regular + b·irregular`
/// over the matching window.
pub fn match_free(channel: Channel, k: f64, energy: f64, h: f64, values: &[f64], r_lo: f64, r_hi: f64) -> Result<(f64, f64)> {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let r = 0.5 * (i as f64 + 1.0) * h;
        if r < r_lo || r > r_hi {
            continue;
        }
        let upper = (i % 2 == 0) == channel.upper_on_even();
        let (p, q) = free_pair(channel, upper, k, energy, r);
        s11 += p * p;
        s12 += p * q;
        s22 += q * q;
        t1 += p * v;
        t2 += q * v;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * (s11 + s22).powi(2)) {
        return Err(LabError::MatchFailure { k });
    }
    Ok(((s22 * t1 - s12 * t2) / det, (s11 * t2 - s12 * t1) / det))
}

/// Regular continuum solution at E_k = √(k²+1), continued outward on the
/// lattice and matched to the free pair beyond the well.
pub fn compute_gef(h: f64, channel: Channel, pot: &PotentialSpec, mu: f64, k: f64) -> Result<GefRecord> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid(format!("momentum must be positive, got {k}")));
    }
    if !(mu >= 0.0) {
        return Err(invalid(format!("coupling must be >= 0, got {mu}")));
    }
    let energy = (k * k + 1.0).sqrt();
    let r_lo = pot.radius + MATCH_WINDOW.0;
    let r_hi = pot.radius + MATCH_WINDOW.1;
    let nodes = (2.0 * r_hi / h).ceil() as usize + 2;
    let x = lattice_solution(h, channel, pot, mu, energy, nodes);
    let (a, b) = match_free(channel, k, energy, h, &x, r_lo, r_hi)?;
    let amplitude = a.hypot(b);
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(LabError::MatchFailure { k });
    }
    let mut radii = Vec::new();
    let mut values = Vec::new();
    let mut sup = 0.0f64;
    for (i, v) in x.iter().enumerate() {
        let r = 0.5 * (i as f64 + 1.0) * h;
        if r > pot.radius {
            break;
        }
        radii.push(r);
        values.push(v / amplitude);
        sup = sup.max(v.abs() / (k * r));
    }
    Ok(GefRecord { k, energy, mu, radii, values, amplitude, interior_supnorm: sup / amplitude })
}
