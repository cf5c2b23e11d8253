use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, LabError, Result};

pub const MIN_FIT_POINTS: usize = 4;

/// Least-squares line through (log10 x, log10 y) over a window of x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub window: (f64, f64),
    pub used: usize,
    pub slope: f64,
    /// log10 of the prefactor.
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: (f64, f64),
    /// RMS residual in log10 units.
    pub residual_rms: f64,
}

fn window_points(x: &[f64], y: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    x.iter()
        .zip(y)
        .filter(|(a, b)| **a >= window.0 && **a <= window.1 && **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.log10(), b.log10()))
        .collect()
}

/// Fits `y ∝ x^slope`. Without a window every positive point is used.
pub fn fit_loglog(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(invalid("abscissa and ordinate lengths differ"));
    }
    let window = match window {
        Some(w) => w,
        None => {
            let lo = x.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let pts = window_points(x, y, window);
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(LabError::TooFewPoints { got: n, need: MIN_FIT_POINTS });
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("degenerate abscissa in fit window"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (ss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| invalid(e.to_string()))?.inverse_cdf(0.975);
    Ok(ScalingFit {
        x: x.to_vec(),
        y: y.to_vec(),
        window,
        used: n,
        slope,
        intercept,
        slope_ci: (slope - t * se, slope + t * se),
        residual_rms: (ss / nf).sqrt(),
    })
}

impl ScalingFit {
    /// log10 prefactor when the slope is held at `slope` (mean offset over
    /// the window).
    pub fn intercept_at_slope(&self, slope: f64) -> f64 {
        let pts = window_points(&self.x, &self.y, self.window);
        pts.iter().map(|p| p.1 - slope * p.0).sum::<f64>() / pts.len().max(1) as f64
    }

    pub fn prefactor(&self) -> f64 {
        10f64.powf(self.intercept)
    }
}
