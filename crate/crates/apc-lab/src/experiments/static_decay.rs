use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_static, PropagationConfig, BOX_MARGIN};
use crate::error::{invalid, LabError, Result};
use crate::experiments::{fit_loglog, Lab, ScalingFit};

/// Points kept for the fit, log-spaced over the window.
const FIT_SAMPLES: usize = 48;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaticDecay {
    pub mu: f64,
    pub fit: ScalingFit,
    /// Prefactor of ‖1_S ψ‖ with the slope held at −3/2.
    pub prefactor_fixed: f64,
    /// Largest m(t₂)/m(t₁) − 1 over t₁ < t₂ in the window.
    pub max_rebound: f64,
    pub t: Vec<f64>,
    pub region_mass: Vec<f64>,
}

/// Frozen evolution of Φ under D_μ (μ > 1); region mass fitted against t
/// over `t_window`, whose start must lie past (μ−1)^(−3/2).
pub fn static_decay_exponent(lab: &Lab, mu: f64, t_window: (f64, f64), cfg: &PropagationConfig) -> Result<StaticDecay> {
    if !(mu > 1.0) {
        return Err(invalid(format!("static decay needs mu > 1, got {mu}")));
    }
    let threshold = (mu - 1.0).powf(-1.5);
    if t_window.0 <= threshold {
        return Err(LabError::WindowBeforeThreshold { start: t_window.0, threshold });
    }
    if !(t_window.1 > t_window.0) {
        return Err(invalid("empty time window"));
    }
    let total = t_window.1;
    let grid = lab.grid(total + lab.potential.radius + BOX_MARGIN)?;
    let phi = lab.critical_state(&grid)?;
    let op = lab.operator(&grid, mu)?;
    let traj = propagate_static(&phi.vector, &op, total, cfg, None)?;

    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let m: Vec<f64> = traj.samples.iter().map(|s| s.region_mass).collect();
    let mut picks = Vec::new();
    for q in 0..FIT_SAMPLES {
        let target = t_window.0 * (t_window.1 / t_window.0).powf(q as f64 / (FIT_SAMPLES - 1) as f64);
        let j = t.partition_point(|&x| x < target).min(t.len() - 1);
        if picks.last() != Some(&j) {
            picks.push(j);
        }
    }
    let xs: Vec<f64> = picks.iter().map(|&j| t[j]).collect();
    let ys: Vec<f64> = picks.iter().map(|&j| m[j]).collect();
    let fit = fit_loglog(&xs, &ys, Some(t_window))?;
    let prefactor_fixed = 10f64.powf(fit.intercept_at_slope(-1.5));

    let mut max_rebound = 0.0f64;
    let mut running_min = f64::INFINITY;
    for (tt, mm) in t.iter().zip(&m) {
        if *tt < t_window.0 {
            continue;
        }
        if running_min.is_finite() {
            max_rebound = max_rebound.max(mm / running_min - 1.0);
        }
        running_min = running_min.min(*mm);
    }
    Ok(StaticDecay { mu, fit, prefactor_fixed, max_rebound, t: xs, region_mass: ys })
}
