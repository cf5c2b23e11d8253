use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// `exp(1 − 1/(1 − x²))`, C^∞ with compact support.
    SmoothBump,
    /// `cos²(πx/2)`, C¹ at the rim.
    CosineWell,
}

/// Compactly supported, nonnegative well A(r). The coupling μ multiplies
/// `rescale_factor · A(r)`; calibration sets the factor so that μ = 1 is
/// critical.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub amplitude: f64,
    pub radius: f64,
    pub shape: Shape,
    pub rescale_factor: f64,
}

impl PotentialSpec {
    pub fn new(amplitude: f64, radius: f64, shape: Shape) -> Result<Self> {
        let p = PotentialSpec { amplitude, radius, shape, rescale_factor: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(invalid(format!("amplitude must be finite and >= 0, got {}", self.amplitude)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(invalid(format!("radius must be finite and > 0, got {}", self.radius)));
        }
        if !(self.rescale_factor > 0.0) || !self.rescale_factor.is_finite() {
            return Err(invalid(format!("rescale factor must be > 0, got {}", self.rescale_factor)));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let x = r / self.radius;
        if !(x < 1.0) {
            return 0.0;
        }
        let x = x.max(0.0);
        let base = match self.shape {
            Shape::SmoothBump => (1.0 - 1.0 / (1.0 - x * x)).exp(),
            Shape::CosineWell => {
                let c = (0.5 * std::f64::consts::PI * x).cos();
                c * c
            }
        };
        self.amplitude * self.rescale_factor * base
    }

    /// Largest value of the rescaled well.
    pub fn max_value(&self) -> f64 {
        self.amplitude * self.rescale_factor
    }
}

pub fn eval_potential(spec: &PotentialSpec, r: f64) -> f64 {
    spec.eval(r)
}
