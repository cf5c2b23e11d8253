use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::exec::Exec;
use crate::gef::compute_gef;
use crate::radial::{Channel, PotentialSpec};

/// Fits with a relative RMS residual above this are rejected.
pub const FIT_RESIDUAL_MAX: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    pub amplitude: f64,
    pub nu: f64,
    pub c: f64,
    /// RMS of (model − data)/data.
    pub residual: f64,
}

impl ResonanceFit {
    pub fn model(&self, mu: f64, k: f64) -> f64 {
        self.amplitude * k / ((mu - 1.0 - self.nu * k * k).abs() + self.c * k.powi(3))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceProfile {
    pub mu: f64,
    pub k: Vec<f64>,
    pub supnorm: Vec<f64>,
    /// Grid peak refined by a parabola in log k.
    pub kstar: f64,
    pub peak: f64,
    /// Best fit found, kept even when its residual is too large.
    pub best_fit: Option<ResonanceFit>,
}

impl ResonanceProfile {
    /// The fit, or `FitDiverged` when the residual exceeds 50% of the signal.
    pub fn fit(&self) -> Result<ResonanceFit> {
        match self.best_fit {
            Some(f) if f.residual <= FIT_RESIDUAL_MAX => Ok(f),
            Some(f) => Err(LabError::FitDiverged { residual: f.residual }),
            None => Err(LabError::FitDiverged { residual: f64::INFINITY }),
        }
    }
}

/// Interior sup-norms over `k_grid` and the bound-shape fit.
pub fn resonance_scan(h: f64, channel: Channel, pot: &PotentialSpec, mu: f64, k_grid: &[f64], exec: Exec) -> Result<ResonanceProfile> {
    if k_grid.len() < 5 {
        return Err(invalid("resonance scan needs at least 5 momenta"));
    }
    let recs = exec.map(k_grid, |&k| compute_gef(h, channel, pot, mu, k).map(|r| r.interior_supnorm));
    let supnorm = recs.into_iter().collect::<Result<Vec<_>>>()?;
    let (kstar, peak) = refine_peak(k_grid, &supnorm);
    let best_fit = fit_resonance(mu, k_grid, &supnorm, kstar);
    Ok(ResonanceProfile { mu, k: k_grid.to_vec(), supnorm, kstar, peak, best_fit })
}

fn refine_peak(k: &[f64], s: &[f64]) -> (f64, f64) {
    let j = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap_or(0);
    if j == 0 || j + 1 >= s.len() {
        return (k[j], s[j]);
    }
    let x = [k[j - 1].ln(), k[j].ln(), k[j + 1].ln()];
    let y = [s[j - 1].ln(), s[j].ln(), s[j + 1].ln()];
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return (k[j], s[j]);
    }
    // vertex of the interpolating parabola
    let xv = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curv);
    let xv = xv.clamp(x[0], x[2]);
    let yv = y[1] + d1 * (xv - 0.5 * (x[0] + x[1])) + curv * (xv - x[0]) * (xv - x[1]);
    (xv.exp(), yv.exp().max(s[j]))
}

/// Levenberg–Marquardt on log residuals in the log-parameters
/// (ln amplitude, ln ν, ln c), from a small grid of starts.
pub fn fit_resonance(mu: f64, k: &[f64], s: &[f64], kstar: f64) -> Option<ResonanceFit> {
    let delta = mu - 1.0;
    let lk: Vec<f64> = k.iter().map(|v| v.ln()).collect();
    let ls: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let nu0 = if delta > 0.0 { delta / (kstar * kstar) } else { 0.1 };
    let mut best: Option<([f64; 3], f64)> = None;
    for fnu in [0.5, 1.0, 2.0] {
        for c0 in [1e-3, 1e-2, 1e-1] {
            let (lnu, lc) = ((nu0 * fnu).ln(), f64::ln(c0));
            // amplitude in closed form for the start
            let la = lk.iter().zip(&ls).map(|(&x, &y)| y - log_shape(delta, x, lnu, lc)).sum::<f64>() / k.len() as f64;
            let p = levenberg_marquardt([la, lnu, lc], delta, &lk, &ls);
            let cost = cost(&p, delta, &lk, &ls);
            if cost.is_finite() && best.is_none_or(|b| cost < b.1) {
                best = Some((p, cost));
            }
        }
    }
    let (p, _) = best?;
    let fit = ResonanceFit { amplitude: p[0].exp(), nu: p[1].exp(), c: p[2].exp(), residual: 0.0 };
    let rel: f64 = k.iter().zip(s).map(|(&kk, &ss)| ((fit.model(mu, kk) - ss) / ss).powi(2)).sum::<f64>() / k.len() as f64;
    Some(ResonanceFit { residual: rel.sqrt(), ..fit })
}

fn log_shape(delta: f64, lk: f64, lnu: f64, lc: f64) -> f64 {
    let k = lk.exp();
    lk - ((delta - lnu.exp() * k * k).abs() + (lc + 3.0 * lk).exp()).ln()
}

fn cost(p: &[f64; 3], delta: f64, lk: &[f64], ls: &[f64]) -> f64 {
    lk.iter().zip(ls).map(|(&x, &y)| (p[0] + log_shape(delta, x, p[1], p[2]) - y).powi(2)).sum()
}

fn levenberg_marquardt(mut p: [f64; 3], delta: f64, lk: &[f64], ls: &[f64]) -> [f64; 3] {
    let mut lambda = 1e-3;
    let mut c = cost(&p, delta, lk, ls);
    for _ in 0..500 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in lk.iter().zip(ls) {
            let k = x.exp();
            let nu = p[1].exp();
            let ck3 = (p[2] + 3.0 * x).exp();
            let gap = delta - nu * k * k;
            let den = gap.abs() + ck3;
            let r = p[0] + x - den.ln() - y;
            let j = [1.0, gap.signum() * nu * k * k / den, -ck3 / den];
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] = row[a] * (1.0 + lambda) + 1e-12;
            }
            let Some(step) = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            let ct = cost(&trial, delta, lk, ls);
            if ct.is_finite() && ct < c {
                let done = c - ct <= 1e-14 * c.max(1e-300);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if !(d.abs() > 1e-300) {
        return None;
    }
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        out[c] = det(&mc) / d;
    }
    Some(out)
}
