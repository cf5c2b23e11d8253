use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Switching profile μ(s) = mu_max·sin²(π(s + shift − s_i)/W), W = s_f − s_i.
///
/// The raw bump lives on [s_i, s_f]; the shift moves the upward crossing
/// μ = 1 to s = 0, so the profile is supported on
/// [s_i − shift, s_f − shift].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchingProfile {
    pub s_i: f64,
    pub s_f: f64,
    pub mu_max: f64,
    crossing_shift: f64,
}

impl SwitchingProfile {
    pub fn new(s_i: f64, s_f: f64, mu_max: f64) -> Result<Self> {
        if !(s_i < 0.0 && s_f > 0.0) {
            return Err(invalid(format!("need s_i < 0 < s_f, got [{s_i}, {s_f}]")));
        }
        if !(mu_max > 1.0) || !mu_max.is_finite() {
            return Err(invalid(format!("mu_max must exceed 1 for an upward crossing, got {mu_max}")));
        }
        let w = s_f - s_i;
        let theta = (1.0 / mu_max.sqrt()).asin();
        let p = SwitchingProfile { s_i, s_f, mu_max, crossing_shift: s_i + w * theta / PI };
        debug_assert!(p.derivative(0.0) > 0.0);
        Ok(p)
    }

    pub fn crossing_shift(&self) -> f64 {
        self.crossing_shift
    }

    fn width(&self) -> f64 {
        self.s_f - self.s_i
    }

    /// Interval outside of which μ vanishes.
    pub fn support(&self) -> (f64, f64) {
        (self.s_i - self.crossing_shift, self.s_f - self.crossing_shift)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let u = s + self.crossing_shift;
        if u <= self.s_i || u >= self.s_f {
            return 0.0;
        }
        let v = (PI * (u - self.s_i) / self.width()).sin();
        self.mu_max * v * v
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let u = s + self.crossing_shift;
        if u <= self.s_i || u >= self.s_f {
            return 0.0;
        }
        let w = self.width();
        self.mu_max * PI / w * (2.0 * PI * (u - self.s_i) / w).sin()
    }

    /// Time of the maximum μ = mu_max.
    pub fn peak_time(&self) -> f64 {
        0.5 * (self.s_i + self.s_f) - self.crossing_shift
    }

    /// Time of the downward crossing μ = 1 after the peak.
    pub fn downcrossing_time(&self) -> f64 {
        2.0 * self.peak_time()
    }
}

pub fn eval_switching(profile: &SwitchingProfile, s: f64) -> f64 {
    profile.eval(s)
}
