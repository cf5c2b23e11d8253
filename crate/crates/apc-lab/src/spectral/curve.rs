use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::spectral::{DiscreteOperator, EDGE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub mu: f64,
    pub energy: f64,
    /// ∂_μ E by centered differences (one-sided at the ends of a run).
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Smallest tabulated μ with a gap eigenvalue above −1.
    pub mu_b: Option<f64>,
}

impl CurveTable {
    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].energy > w[0].energy)
    }

    /// (min, max) of the slope column.
    pub fn slope_band(&self) -> Option<(f64, f64)> {
        if self.rows.is_empty() {
            return None;
        }
        let lo = self.rows.iter().map(|r| r.slope).fold(f64::INFINITY, f64::min);
        let hi = self.rows.iter().map(|r| r.slope).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Linear interpolation of E at μ, inside the tabulated range.
    pub fn energy_at(&self, mu: f64) -> Option<f64> {
        let w = self.rows.windows(2).find(|w| w[0].mu <= mu && mu <= w[1].mu)?;
        let t = (mu - w[0].mu) / (w[1].mu - w[0].mu);
        Some(w[0].energy + t * (w[1].energy - w[0].energy))
    }
}

/// E(μ) of the branch that reaches the upper edge, on `steps` equally spaced
/// couplings. Past μ = 1 that branch has left the gap, so rows stop there;
/// couplings without a gap state are left out.
pub fn bound_state_curve(base: &DiscreteOperator, mu_lo: f64, mu_hi: f64, steps: usize, exec: Exec) -> Result<CurveTable> {
    if !(mu_lo >= 0.0 && mu_hi > mu_lo) || steps < 2 {
        return Err(invalid(format!("bad curve range [{mu_lo}, {mu_hi}] with {steps} steps")));
    }
    let mus: Vec<f64> = (0..steps).map(|k| mu_lo + (mu_hi - mu_lo) * k as f64 / (steps - 1) as f64).collect();
    let energies = exec.map(&mus, |&mu| {
        if mu > 1.0 + EDGE_TOL {
            return None;
        }
        let op = base.with_coupling(mu);
        let m = op.matrix();
        let hi = m.count_below(1.0 + EDGE_TOL);
        if hi == 0 || m.count_below(-1.0) >= hi {
            return None;
        }
        let e = m.eigenvalue(hi - 1);
        (e > -1.0).then_some(e)
    });
    let mut rows = Vec::new();
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |run: &mut Vec<(f64, f64)>, rows: &mut Vec<CurveRow>| {
        let n = run.len();
        for k in 0..n {
            let slope = if n < 2 {
                f64::NAN
            } else if k == 0 {
                (run[1].1 - run[0].1) / (run[1].0 - run[0].0)
            } else if k == n - 1 {
                (run[k].1 - run[k - 1].1) / (run[k].0 - run[k - 1].0)
            } else {
                (run[k + 1].1 - run[k - 1].1) / (run[k + 1].0 - run[k - 1].0)
            };
            rows.push(CurveRow { mu: run[k].0, energy: run[k].1, slope });
        }
        run.clear();
    };
    for (mu, e) in mus.iter().zip(energies) {
        match e {
            Some(e) => run.push((*mu, e)),
            None => flush(&mut run, &mut rows),
        }
    }
    flush(&mut run, &mut rows);
    let mu_b = rows.first().map(|r| r.mu);
    Ok(CurveTable { rows, mu_b })
}
