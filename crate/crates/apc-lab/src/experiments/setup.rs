use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::radial::{Channel, PotentialSpec, RadialGrid};
use crate::spectral::{assemble_operator, critical_state, find_critical_coupling, principal_state, BoundState, DiscreteOperator};

/// Calibration box used for the degeneracy check during calibration.
const CALIBRATION_LENGTH: f64 = 40.0;

/// A calibrated well on a fixed lattice spacing. Critical couplings move
/// at O(h²), so every spacing gets its own calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lab {
    pub channel: Channel,
    pub potential: PotentialSpec,
    pub h: f64,
    /// Critical coupling relative to the uncalibrated well.
    pub mu_c: f64,
    pub exec: Exec,
}

impl Lab {
    pub fn calibrate(h: f64, channel: Channel, raw: PotentialSpec, exec: Exec) -> Result<Lab> {
        let grid = RadialGrid::with_spacing(h, CALIBRATION_LENGTH.max(2.0 * raw.radius))?;
        let mut potential = raw;
        let mu_c = find_critical_coupling(&grid, channel, &mut potential, 1e-14)?;
        Ok(Lab { channel, potential, h, mu_c: mu_c * raw.rescale_factor, exec })
    }

    pub fn grid(&self, min_length: f64) -> Result<RadialGrid> {
        RadialGrid::with_spacing(self.h, min_length.max(2.0 * self.potential.radius))
    }

    pub fn grid_nodes(&self, nodes: usize) -> Result<RadialGrid> {
        crate::radial::make_grid(nodes as f64 * self.h, nodes)
    }

    pub fn operator(&self, grid: &RadialGrid, mu: f64) -> Result<DiscreteOperator> {
        assemble_operator(grid, self.channel, &self.potential, mu)
    }

    pub fn critical_state(&self, grid: &RadialGrid) -> Result<BoundState> {
        critical_state(&self.operator(grid, 1.0)?)
    }

    /// Gap state on the edge-reaching branch at coupling μ.
    pub fn state_at(&self, grid: &RadialGrid, mu: f64) -> Result<BoundState> {
        principal_state(&self.operator(grid, mu)?)?.ok_or_else(|| invalid(format!("no gap state at mu = {mu}")))
    }
}
