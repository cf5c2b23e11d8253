use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::exec::Exec;
use crate::experiments::{fit_loglog, ScalingFit};
use crate::linalg::TriLu;
use crate::spectral::{critical_state, principal_state, DiscreteOperator};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivativeScan {
    pub mu: Vec<f64>,
    /// ‖Φ_{μ+δμ} − Φ_μ‖/δμ after sign alignment.
    pub quotient: Vec<f64>,
    pub overlap: Vec<f64>,
    /// log–log fit of the quotient against 1 − μ; the growth exponent is −slope.
    pub fit: ScalingFit,
}

/// Forward difference quotients of the phase-aligned gap state along μ.
pub fn derivative_of_bound_state_scan(base: &DiscreteOperator, mu_list: &[f64], delta_mu: f64, exec: Exec) -> Result<DerivativeScan> {
    if !(delta_mu > 0.0) {
        return Err(invalid("delta_mu must be positive"));
    }
    if let Some(mu) = mu_list.iter().find(|&&m| !(m >= 0.0 && m + delta_mu <= 1.0)) {
        return Err(invalid(format!("mu = {mu} with step {delta_mu} leaves [0, 1]")));
    }
    let rows = exec.map(mu_list, |&mu| -> Result<(f64, f64)> {
        let missing = || invalid(format!("no gap state near mu = {mu}"));
        let a = principal_state(&base.with_coupling(mu))?.ok_or_else(missing)?;
        let b = principal_state(&base.with_coupling(mu + delta_mu))?.ok_or_else(missing)?;
        let overlap = a.vector.inner(&b.vector).re;
        if overlap.abs() < 0.5 {
            return Err(LabError::PhaseAlignmentFailure { mu, overlap });
        }
        let s = overlap.signum();
        let h = a.vector.grid().h();
        let diff: f64 = a.vector.data().iter().zip(b.vector.data()).map(|(x, y)| (s * y - x).norm_sqr()).sum::<f64>() * h;
        Ok((diff.sqrt() / delta_mu, overlap.abs()))
    });
    let mut quotient = Vec::new();
    let mut overlap = Vec::new();
    for r in rows {
        let (q, o) = r?;
        quotient.push(q);
        overlap.push(o);
    }
    let x: Vec<f64> = mu_list.iter().map(|m| 1.0 - m).collect();
    let fit = fit_loglog(&x, &quotient, None)?;
    Ok(DerivativeScan { mu: mu_list.to_vec(), quotient, overlap, fit })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventScan {
    pub mu: Vec<f64>,
    pub energy: Vec<f64>,
    pub norm: Vec<f64>,
    pub fit: ScalingFit,
}

const POWER_STEPS: usize = 200;

/// Power-iteration estimate of ‖R_μ‖ with R_μχ = (D₁ − E_μ)⁻¹ P⊥(Aχ) for χ
/// supported within `region_radius`, where P⊥ removes the edge state of D₁.
/// `base` must be the calibrated operator (any coupling).
pub fn resolvent_norm_scan(
    base: &DiscreteOperator,
    mu_list: &[f64],
    probe_count: usize,
    region_radius: f64,
    seed: u64,
    exec: Exec,
) -> Result<ResolventScan> {
    if probe_count == 0 {
        return Err(invalid("need at least one probe"));
    }
    let d1 = base.with_coupling(1.0);
    let phi = critical_state(&d1)?;
    let h = d1.grid().h();
    let phi_e: Vec<f64> = phi.vector.data().iter().map(|z| z.re * h.sqrt()).collect();
    let support = d1.grid().nodes_within(region_radius);
    let well = d1.well().to_vec();
    let project = |v: &mut [f64]| {
        let p: f64 = v.iter().zip(&phi_e).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&phi_e).for_each(|(a, b)| *a -= p * b);
    };
    let results = exec.map(mu_list, |&mu| -> Result<(f64, f64)> {
        let st = principal_state(&base.with_coupling(mu))?.ok_or_else(|| invalid(format!("no gap state at mu = {mu}")))?;
        let e_mu = st.energy;
        let m = d1.matrix();
        let diag: Vec<f64> = m.d.iter().map(|d| d - e_mu).collect();
        let lu = TriLu::factor(&m.e, &diag, &m.e).map_err(|e| LabError::SolveFailure(format!("mu = {mu}: {e}")))?;
        // R: χ ∈ ℝ^support ↦ y ∈ ℝ^n, and its transpose
        let forward = |chi: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; m.d.len()];
            for i in 0..support {
                v[i] = well[i] * chi[i];
            }
            project(&mut v);
            lu.solve_in_place(&mut v);
            project(&mut v);
            v
        };
        let backward = |y: &[f64]| -> Vec<f64> {
            let mut v = y.to_vec();
            project(&mut v);
            lu.solve_in_place(&mut v);
            project(&mut v);
            (0..support).map(|i| well[i] * v[i]).collect()
        };
        let mut best = 0.0f64;
        for p in 0..probe_count {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(p as u64));
            let mut chi: Vec<f64> = (0..support).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut lambda = 0.0;
            for _ in 0..POWER_STEPS {
                let nrm = chi.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(nrm > 0.0) || !nrm.is_finite() {
                    return Err(LabError::SolveFailure(format!("power iteration broke down at mu = {mu}")));
                }
                chi.iter_mut().for_each(|x| *x /= nrm);
                let next = backward(&forward(&chi));
                let l = next.iter().zip(&chi).map(|(a, b)| a * b).sum::<f64>();
                chi = next;
                if (l - lambda).abs() <= 1e-10 * l.abs() {
                    lambda = l;
                    break;
                }
                lambda = l;
            }
            best = best.max(lambda.max(0.0).sqrt());
        }
        Ok((e_mu, best))
    });
    let mut energy = Vec::new();
    let mut norm = Vec::new();
    for r in results {
        let (e, n) = r?;
        energy.push(e);
        norm.push(n);
    }
    let x: Vec<f64> = mu_list.iter().map(|m| 1.0 - m).collect();
    let fit = fit_loglog(&x, &norm, None)?;
    Ok(ResolventScan { mu: mu_list.to_vec(), energy, norm, fit })
}
