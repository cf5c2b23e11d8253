use crate::error::{invalid, LabError, Result};
use crate::radial::{Channel, PotentialSpec, RadialGrid};
use crate::spectral::{assemble_operator, lattice_coeffs};

/// Couplings scanned (in units of the current rescale factor) before giving
/// up on criticality.
pub const CRITICAL_SCAN_MAX: f64 = 20.0;
const SCAN_STEPS: usize = 2000;

/// Regular lattice solution of (H − E)x = 0 on the first `nodes` interleaved
/// nodes, by forward recurrence from x₀ = 1. No box is involved.
pub fn lattice_solution(h: f64, channel: Channel, pot: &PotentialSpec, mu: f64, energy: f64, nodes: usize) -> Vec<f64> {
    let mut x = vec![0.0; nodes];
    if nodes == 0 {
        return x;
    }
    x[0] = 1.0;
    let mut e_prev = 0.0;
    for i in 0..nodes - 1 {
        let (d, e) = lattice_coeffs(h, channel, pot, mu, i);
        let prev = if i > 0 { e_prev * x[i - 1] } else { 0.0 };
        x[i + 1] = -(prev + (d - energy) * x[i]) / e;
        e_prev = e;
    }
    x
}

/// Index of the first lower-component node at or beyond the well radius.
fn matching_node(h: f64, channel: Channel, radius: f64) -> usize {
    let lower_parity = if channel.upper_on_even() { 1 } else { 0 };
    let mut i = lower_parity;
    while 0.5 * (i as f64 + 1.0) * h < radius {
        i += 2;
    }
    i
}

/// Lower component of the E = 1 regular solution just outside the well,
/// relative to the largest upper-component value. It vanishes exactly when
/// the threshold solution is the lattice's zero-mode-like edge state
/// (lower = 0 and upper ∝ r^(−κ) beyond the well).
pub fn threshold_residual(h: f64, channel: Channel, pot: &PotentialSpec, mu: f64) -> f64 {
    let j = matching_node(h, channel, pot.radius);
    let x = lattice_solution(h, channel, pot, mu, 1.0, j + 1);
    let upper_start = if channel.upper_on_even() { 0 } else { 1 };
    let scale = x[..=j].iter().skip(upper_start).step_by(2).fold(0.0f64, |m, v| m.max(v.abs()));
    x[j] / scale.max(f64::MIN_POSITIVE)
}

/// Smallest coupling at which the gap state reaches E = 1, found by a scan
/// and bisection on [`threshold_residual`]. The potential's rescale factor is
/// multiplied by μ_c, so μ = 1 is critical afterwards. Returns μ_c in units
/// of the incoming rescale factor.
pub fn find_critical_coupling(grid: &RadialGrid, channel: Channel, potential: &mut PotentialSpec, tol: f64) -> Result<f64> {
    potential.validate()?;
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let h = grid.h();
    let g = |mu: f64| threshold_residual(h, channel, potential, mu);
    let step = CRITICAL_SCAN_MAX / SCAN_STEPS as f64;
    let mut lo = 0.0;
    let mut g_lo = g(lo);
    let mut bracket = None;
    for k in 1..=SCAN_STEPS {
        let mu = k as f64 * step;
        let g_mu = g(mu);
        if g_mu == 0.0 {
            bracket = Some((mu, mu));
            break;
        }
        if g_mu.signum() != g_lo.signum() {
            bracket = Some((lo, mu));
            break;
        }
        lo = mu;
        g_lo = g_mu;
    }
    let (mut a, mut b) = bracket.ok_or(LabError::NoCriticalCoupling { scan_max: CRITICAL_SCAN_MAX * potential.rescale_factor })?;
    let mut g_a = g(a);
    while b - a > tol * b.max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let g_m = g(m);
        if g_m == 0.0 {
            a = m;
            b = m;
            break;
        }
        if g_m.signum() == g_a.signum() {
            a = m;
            g_a = g_m;
        } else {
            b = m;
        }
    }
    let mu_c = 0.5 * (a + b);
    let mut calibrated = *potential;
    calibrated.rescale_factor *= mu_c;

    // a second curve at the edge would show up as another eigenvalue hugging 1
    let op = assemble_operator(grid, channel, &calibrated, 1.0)?;
    let gap = (std::f64::consts::PI / grid.length()).powi(2);
    let window = (0.25 * gap).min(1e-6);
    let m = op.matrix();
    let count = m.count_below(1.0 + window) - m.count_below(1.0 - window);
    if count > 1 {
        return Err(LabError::DegenerateEdge { mu: mu_c, count });
    }
    *potential = calibrated;
    Ok(mu_c)
}
