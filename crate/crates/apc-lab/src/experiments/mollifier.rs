use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::experiments::{fit_loglog, Lab, ScalingFit};
use crate::gef::{build_spectral_basis, complement_norm};
use crate::C64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MollifierCheck {
    pub mu: f64,
    pub kappa: Vec<f64>,
    /// ‖(1 − ρ_κ)χ‖ per κ.
    pub value: Vec<f64>,
    /// κ above the cut (near or past the resonance), excluded from the fit.
    pub flagged: Vec<bool>,
    pub monotone: bool,
    pub fit: ScalingFit,
}

/// ‖(1 − ρ_κ)χ‖ against κ, with ρ built from the box eigenbasis of D_μ on
/// `nodes` nodes. χ is the edge state Φ, optionally cut off at
/// `truncate_radius` and renormalized. Points with κ > `kappa_cut` are kept
/// but flagged and left out of the fit.
pub fn mollifier_decay_check(
    lab: &Lab,
    mu: f64,
    kappa_list: &[f64],
    nodes: usize,
    kappa_cut: f64,
    truncate_radius: Option<f64>,
) -> Result<MollifierCheck> {
    if !(mu > 1.0) {
        return Err(invalid(format!("mollifier check needs mu > 1, got {mu}")));
    }
    let grid = lab.grid_nodes(nodes)?;
    let basis = build_spectral_basis(&lab.operator(&grid, mu)?, lab.exec)?;
    let mut chi = lab.critical_state(&grid)?.vector;
    if let Some(r) = truncate_radius {
        let keep = grid.nodes_within(r);
        chi.data_mut()[keep..].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        chi = chi.normalized()?;
    }
    let coeffs = basis.forward(&chi, lab.exec);
    let mut kappa = kappa_list.to_vec();
    kappa.sort_by(f64::total_cmp);
    let value: Vec<f64> = kappa.iter().map(|&k| complement_norm(&coeffs, k, &basis)).collect();
    let flagged: Vec<bool> = kappa.iter().map(|&k| k > kappa_cut).collect();
    let monotone = value.windows(2).all(|w| w[1] >= w[0]);
    let lo = kappa.first().copied().unwrap_or(0.0);
    let fit = fit_loglog(&kappa, &value, Some((lo, kappa_cut)))?;
    Ok(MollifierCheck { mu, kappa, value, flagged, monotone, fit })
}
