mod common;

use apc_lab::dynamics::PropagationConfig;
use apc_lab::experiments::{
    adiabatic_gapless_check, decay_halftime, epsilon_scaling_sweep, fit_loglog, static_decay_exponent, Fingerprint, Lab, SweepReport, SCHEMA_VERSION,
};
use apc_lab::radial::SwitchingProfile;
use apc_lab::{Exec, LabError};
use common::raw;

fn profile() -> SwitchingProfile {
    SwitchingProfile::new(-1.0, 1.0, 1.5).unwrap()
}

fn cfg() -> PropagationConfig {
    PropagationConfig { dt: 0.05, region_radius: 0.5, ..Default::default() }
}

fn lab_with(exec: Exec) -> Lab {
    Lab::calibrate(0.05, apc_lab::radial::Channel::Plus, raw(), exec).unwrap()
}

#[test]
fn fit_recovers_exact_power_law() {
    let x: Vec<f64> = (1..=10).map(|j| j as f64).collect();
    let y: Vec<f64> = x.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
    let f = fit_loglog(&x, &y, None).unwrap();
    assert!((f.slope + 1.5).abs() < 1e-12);
    assert!((f.prefactor() - 3.0).abs() < 1e-10);
    assert!(f.residual_rms < 1e-12);
    assert!(f.slope_ci.0 <= f.slope && f.slope <= f.slope_ci.1);
    assert!((f.intercept_at_slope(-1.5) - 3f64.log10()).abs() < 1e-12);

    let w = fit_loglog(&x, &y, Some((3.0, 8.0))).unwrap();
    assert_eq!(w.used, 6);
    assert!(matches!(fit_loglog(&x, &y, Some((3.0, 5.0))), Err(LabError::TooFewPoints { got: 3, .. })));
    assert!(fit_loglog(&x, &y[1..], None).is_err());
}

#[test]
fn fit_interval_widens_with_noise() {
    let x: Vec<f64> = (1..=12).map(|j| j as f64).collect();
    let y: Vec<f64> = x.iter().enumerate().map(|(j, x)| x.powi(2) * if j % 2 == 0 { 1.1 } else { 0.9 }).collect();
    let f = fit_loglog(&x, &y, None).unwrap();
    assert!(f.slope_ci.0 < 2.0 && 2.0 < f.slope_ci.1);
    assert!(f.slope_ci.1 - f.slope_ci.0 > 1e-3);
}

#[test]
fn static_window_must_start_past_threshold() {
    let lab = lab_with(Exec::default());
    let r = static_decay_exponent(&lab, 1.05, (50.0, 400.0), &cfg());
    assert!(matches!(r, Err(LabError::WindowBeforeThreshold { .. })));
    assert!(matches!(static_decay_exponent(&lab, 0.95, (50.0, 400.0), &cfg()), Err(LabError::Invalid(_))));
}

#[test]
fn static_region_mass_envelope_decays() {
    let lab = lab_with(Exec::default());
    let sd = static_decay_exponent(&lab, 1.1, (160.0, 800.0), &cfg()).unwrap();
    let m = &sd.region_mass;
    assert!(m[m.len() - 1] < 0.2 * m[0], "{m:?}");
    assert!(sd.fit.slope < -1.0, "{}", sd.fit.slope);
    assert!(sd.max_rebound.is_finite() && sd.max_rebound >= 0.0);
}

#[test]
fn fast_switching_does_not_decay_before_downcrossing() {
    let lab = lab_with(Exec::default());
    assert!(matches!(decay_halftime(&lab, &profile(), 1.0, &cfg()), Err(LabError::NoDecayBeforeDowncrossing { .. })));
}

#[test]
fn half_time_grows_as_switching_slows() {
    let lab = lab_with(Exec::default());
    let a = decay_halftime(&lab, &profile(), 1.0 / 16.0, &cfg()).unwrap();
    let b = decay_halftime(&lab, &profile(), 1.0 / 128.0, &cfg()).unwrap();
    let ratio = b / a;
    assert!((2.8..=5.8).contains(&ratio), "{ratio}");
}

#[test]
fn sweep_fit_is_clean_and_stable() {
    let lab = lab_with(Exec::default());
    let eps: Vec<f64> = (3..=7).map(|j| 2f64.powi(-j)).collect();
    let sw = epsilon_scaling_sweep(&lab, &profile(), &eps, &cfg()).unwrap();
    assert!(sw.errors.iter().all(Option::is_none));
    assert!(sw.fit.residual_rms <= 0.1, "{}", sw.fit.residual_rms);
    let without = sw.fit_without_largest.as_ref().unwrap();
    assert!((without.slope - sw.fit.slope).abs() < 0.1, "{} vs {}", without.slope, sw.fit.slope);
    assert!(matches!(epsilon_scaling_sweep(&lab, &profile(), &eps[..3], &cfg()), Err(LabError::TooFewPoints { .. })));
}

#[test]
fn gapless_overlap_depends_on_epsilon() {
    let lab = lab_with(Exec::default());
    let rows = adiabatic_gapless_check(&lab, &profile(), &[0.125, 1.0 / 512.0], -0.1, &cfg()).unwrap();
    assert!(rows[0].overlap >= 0.3, "{}", rows[0].overlap);
    assert!(rows[1].overlap >= 0.95, "{}", rows[1].overlap);
    assert!(matches!(adiabatic_gapless_check(&lab, &profile(), &[0.1], 0.2, &cfg()), Err(LabError::Invalid(_))));
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let eps = [0.125, 0.0625, 1.0 / 32.0, 1.0 / 64.0];
    let a = epsilon_scaling_sweep(&lab_with(Exec::Serial), &profile(), &eps, &cfg()).unwrap();
    let b = epsilon_scaling_sweep(&lab_with(Exec::Parallel), &profile(), &eps, &cfg()).unwrap();
    assert_eq!(a.t_half, b.t_half);
    assert_eq!(a.fit, b.fit);
}

#[test]
fn report_round_trips_through_json() {
    let fp = Fingerprint { h: 0.05, dt: 0.05, seed: 7, channel: 1, mu_c: 0.123 };
    let mut rep = SweepReport::new("sweep-epsilon", serde_json::json!({"epsilon": [0.5, 0.25]}), fp);
    #[derive(serde::Serialize)]
    struct Row {
        epsilon: f64,
        t_half: Option<f64>,
    }
    rep.push_rows(&[Row { epsilon: 0.5, t_half: Some(3.0) }, Row { epsilon: 0.25, t_half: None }]).unwrap();
    let x: Vec<f64> = (1..=5).map(|j| j as f64).collect();
    rep.fits.insert("t_half".into(), fit_loglog(&x, &x, None).unwrap());
    let text = serde_json::to_string(&rep).unwrap();
    let back: SweepReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    assert_eq!(back.schema_version, SCHEMA_VERSION);
    assert!(back.rows[1]["t_half"].is_null());
}
