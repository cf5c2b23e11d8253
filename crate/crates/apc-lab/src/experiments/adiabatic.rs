use serde::{Deserialize, Serialize};

use crate::dynamics::propagate::adiabatic_run;
use crate::dynamics::{FreeProjectors, PropagationConfig, BOX_MARGIN};
use crate::error::{invalid, LabError, Result};
use crate::experiments::{fit_loglog, Lab, ScalingFit, MIN_FIT_POINTS};
use crate::radial::SwitchingProfile;

fn run_cfg(cfg: &PropagationConfig, epsilon: f64) -> PropagationConfig {
    PropagationConfig { epsilon, record_stride: 1, ..cfg.clone() }
}

/// First microscopic time at which ‖1_S ψ‖² has dropped to half its initial
/// value, starting from Φ at s = 0 and switching with `profile`. The run ends
/// at the downward crossing μ = 1.
pub fn decay_halftime(lab: &Lab, profile: &SwitchingProfile, epsilon: f64, cfg: &PropagationConfig) -> Result<f64> {
    let s_end = profile.downcrossing_time();
    let cfg = run_cfg(cfg, epsilon);
    let grid = lab.grid(s_end / epsilon + lab.potential.radius + BOX_MARGIN)?;
    let phi = lab.critical_state(&grid)?;
    let m0 = crate::dynamics::region_mass(&phi.vector, cfg.region_radius)?.powi(2);
    let mut prev = (0.0, m0);
    let mut crossing = None;
    let mut stop = |smp: &crate::dynamics::Sample| {
        let m = smp.region_mass * smp.region_mass;
        if m <= 0.5 * m0 {
            let (t0, m_prev) = prev;
            let frac = if m_prev > m { (m_prev - 0.5 * m0) / (m_prev - m) } else { 1.0 };
            crossing = Some(t0 + frac * (smp.t - t0));
            return true;
        }
        prev = (smp.t, m);
        false
    };
    adiabatic_run(&phi.vector, &grid, &lab.potential, profile, 0.0, s_end, &cfg, None, &mut stop)?;
    crossing.ok_or(LabError::NoDecayBeforeDowncrossing { epsilon })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub epsilon: Vec<f64>,
    pub t_half: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    pub fit: ScalingFit,
    /// Same fit with the largest ε removed (robustness check).
    pub fit_without_largest: Option<ScalingFit>,
}

pub fn epsilon_scaling_sweep(lab: &Lab, profile: &SwitchingProfile, eps_list: &[f64], cfg: &PropagationConfig) -> Result<EpsilonSweep> {
    if eps_list.len() < MIN_FIT_POINTS {
        return Err(LabError::TooFewPoints { got: eps_list.len(), need: MIN_FIT_POINTS });
    }
    let results = lab.exec.map(eps_list, |&eps| decay_halftime(lab, profile, eps, cfg));
    let mut t_half = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(t) => {
                t_half.push(Some(t));
                errors.push(None);
            }
            Err(e) => {
                log::warn!("half-time run failed: {e}");
                t_half.push(None);
                errors.push(Some(e.to_string()));
            }
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = eps_list.iter().zip(&t_half).filter_map(|(e, t)| t.map(|t| (*e, t))).unzip();
    let fit = fit_loglog(&xs, &ys, None)?;
    let largest = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (xr, yr): (Vec<f64>, Vec<f64>) = xs.iter().zip(&ys).filter(|(x, _)| **x < largest).map(|(x, y)| (*x, *y)).unzip();
    let fit_without_largest = fit_loglog(&xr, &yr, None).ok();
    Ok(EpsilonSweep { epsilon: eps_list.to_vec(), t_half, errors, fit, fit_without_largest })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaplessRow {
    pub epsilon: f64,
    /// ‖P_N U^ε(0, s0) Φ_{μ(s0)}‖, NaN when the run failed.
    pub overlap: f64,
    pub error: Option<String>,
}

fn check_start(profile: &SwitchingProfile, s0: f64) -> Result<()> {
    let (lo, _) = profile.support();
    if !(s0 < 0.0 && s0 > lo) {
        return Err(invalid(format!("start time s0 = {s0} must lie in ({lo}, 0)")));
    }
    Ok(())
}

/// Adiabatic following of the gap state from s0 < 0 to the crossing s = 0.
pub fn adiabatic_gapless_check(
    lab: &Lab,
    profile: &SwitchingProfile,
    eps_list: &[f64],
    s0: f64,
    cfg: &PropagationConfig,
) -> Result<Vec<GaplessRow>> {
    check_start(profile, s0)?;
    let rows = lab.exec.map(eps_list, |&eps| -> Result<f64> {
        let cfg = run_cfg(cfg, eps);
        let grid = lab.grid(-s0 / eps + lab.potential.radius + BOX_MARGIN)?;
        let start = lab.state_at(&grid, profile.eval(s0))?;
        let phi = lab.critical_state(&grid)?;
        let traj = adiabatic_run(&start.vector, &grid, &lab.potential, profile, s0, 0.0, &cfg, Some(&phi.vector), &mut |_| false)?;
        Ok(traj.samples.last().map_or(f64::NAN, |s| s.crit_overlap))
    });
    Ok(eps_list
        .iter()
        .zip(rows)
        .map(|(&epsilon, r)| match r {
            Ok(overlap) => GaplessRow { epsilon, overlap, error: None },
            Err(e) => GaplessRow { epsilon, overlap: f64::NAN, error: Some(e.to_string()) },
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub epsilon: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// |⟨Φ, ψ(s=0)⟩|.
    pub crit_overlap: f64,
    /// Region mass at the freeze point σ and its maximum over [σ, s_f].
    pub sigma_mass: f64,
    pub max_mass_after_sigma: f64,
    pub no_return: bool,
    pub absorbed_norm: f64,
    /// ⟨ψ, P⁻ψ⟩ after evolving the start state backward out of the profile.
    pub p_minus_before: Option<f64>,
    pub box_length: f64,
    pub error: Option<String>,
}

pub struct PairSweepOptions {
    pub s0: f64,
    /// Freeze point σ for the no-return check; defaults to the profile peak.
    pub sigma: Option<f64>,
    pub projector_tol: f64,
    pub backward_check: bool,
}

/// Evolve Φ_{μ(s0)} through the whole profile and split the result into
/// free positive and negative energy parts once the well is off.
pub fn pair_creation_sweep(
    lab: &Lab,
    profile: &SwitchingProfile,
    eps_list: &[f64],
    opts: &PairSweepOptions,
    cfg: &PropagationConfig,
) -> Result<Vec<PairRow>> {
    check_start(profile, opts.s0)?;
    let (lo, hi) = profile.support();
    let sigma = opts.sigma.unwrap_or_else(|| profile.peak_time());
    if !(sigma >= 0.0 && sigma < hi) {
        return Err(invalid(format!("freeze point sigma = {sigma} must lie in [0, {hi})")));
    }
    let rows = lab.exec.map(eps_list, |&eps| pair_run(lab, profile, eps, opts, sigma, (lo, hi), cfg));
    Ok(eps_list
        .iter()
        .zip(rows)
        .map(|(&epsilon, r)| {
            r.unwrap_or_else(|e| PairRow {
                epsilon,
                p_plus: f64::NAN,
                p_minus: f64::NAN,
                crit_overlap: f64::NAN,
                sigma_mass: f64::NAN,
                max_mass_after_sigma: f64::NAN,
                no_return: false,
                absorbed_norm: f64::NAN,
                p_minus_before: None,
                box_length: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect())
}

fn pair_run(
    lab: &Lab,
    profile: &SwitchingProfile,
    eps: f64,
    opts: &PairSweepOptions,
    sigma: f64,
    (lo, hi): (f64, f64),
    cfg: &PropagationConfig,
) -> Result<PairRow> {
    let cfg = run_cfg(cfg, eps);
    let s0 = opts.s0;
    let mut span = hi - s0;
    if opts.backward_check {
        span = span.max(s0 - lo);
    }
    let grid = lab.grid(span / eps + lab.potential.radius + BOX_MARGIN)?;
    let start = lab.state_at(&grid, profile.eval(s0))?;
    let phi = lab.critical_state(&grid)?;
    let first = adiabatic_run(&start.vector, &grid, &lab.potential, profile, s0, 0.0, &cfg, Some(&phi.vector), &mut |_| false)?;
    let crit_overlap = first.samples.last().map_or(f64::NAN, |s| s.crit_overlap);
    let second = adiabatic_run(&first.final_state, &grid, &lab.potential, profile, 0.0, hi, &cfg, None, &mut |_| false)?;
    let after: Vec<f64> = second.samples.iter().filter(|s| s.s >= sigma).map(|s| s.region_mass).collect();
    let sigma_mass = *after.first().ok_or_else(|| invalid("no samples after sigma"))?;
    let max_after = after.iter().copied().fold(0.0, f64::max);
    let proj = FreeProjectors::with_tolerance(&grid, lab.channel, opts.projector_tol)?;
    let (p_plus, p_minus) = proj.energy_split(&second.final_state)?;
    let p_minus_before = if opts.backward_check {
        let back = adiabatic_run(&start.vector, &grid, &lab.potential, profile, s0, lo, &cfg, None, &mut |_| false)?;
        Some(proj.energy_split(&back.final_state)?.1)
    } else {
        None
    };
    Ok(PairRow {
        epsilon: eps,
        p_plus,
        p_minus,
        crit_overlap,
        sigma_mass,
        max_mass_after_sigma: max_after,
        no_return: max_after <= 1.1 * sigma_mass,
        absorbed_norm: first.absorbed_norm + second.absorbed_norm,
        p_minus_before,
        box_length: grid.length(),
        error: None,
    })
}
