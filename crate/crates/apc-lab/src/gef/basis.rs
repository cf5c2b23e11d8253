use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::radial::{Channel, RadialGrid, Spinor};
use crate::spectral::DiscreteOperator;
use crate::C64;

/// Largest node count accepted for a full eigendecomposition.
pub const BASIS_MAX_NODES: usize = 2048;

/// Full eigenbasis of a box operator: the discrete generalized transform.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    grid: RadialGrid,
    channel: Channel,
    mu: f64,
    energies: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    momenta: Vec<Option<f64>>,
}

pub fn build_spectral_basis(op: &DiscreteOperator, exec: Exec) -> Result<SpectralBasis> {
    let n = op.grid().nodes();
    if n > BASIS_MAX_NODES {
        return Err(LabError::BudgetExceeded { n, max: BASIS_MAX_NODES });
    }
    let pairs = op.matrix().eigenpairs(0..op.dim(), exec)?;
    let momenta = pairs.values.iter().map(|&e| (e.abs() > 1.0).then(|| (e * e - 1.0).sqrt())).collect();
    Ok(SpectralBasis {
        grid: *op.grid(),
        channel: op.channel(),
        mu: op.mu(),
        energies: pairs.values,
        vectors: pairs.vectors,
        momenta,
    })
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.energies.len()
    }
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    /// k_n = √(E_n² − 1) for continuum states, `None` for gap states.
    pub fn momenta(&self) -> &[Option<f64>] {
        &self.momenta
    }
    /// Unit-norm (Euclidean) eigenvector `n` in lattice order.
    pub fn vector(&self, n: usize) -> &[f64] {
        &self.vectors[n]
    }

    pub fn state(&self, n: usize) -> Spinor {
        let s = 1.0 / self.grid.h().sqrt();
        let v: Vec<f64> = self.vectors[n].iter().map(|x| x * s).collect();
        Spinor::from_real(self.grid, self.channel, &v).expect("basis vector has grid length")
    }

    /// Coefficients ⟨v_n, ψ⟩ in the spinor inner product; Σ|c_n|² = ‖ψ‖².
    pub fn forward(&self, psi: &Spinor, exec: Exec) -> Vec<C64> {
        let w = self.grid.h().sqrt();
        let data = psi.data();
        exec.map(&self.vectors, |v| v.iter().zip(data).map(|(a, z)| z * *a).sum::<C64>() * w)
    }

    pub fn inverse(&self, coeffs: &[C64], exec: Exec) -> Spinor {
        let w = 1.0 / self.grid.h().sqrt();
        let dim = self.grid.dim();
        let chunk = 256;
        let blocks = exec.map_range(dim.div_ceil(chunk), |b| {
            let lo = b * chunk;
            let hi = (lo + chunk).min(dim);
            let mut acc = vec![C64::new(0.0, 0.0); hi - lo];
            for (c, v) in coeffs.iter().zip(&self.vectors) {
                if *c == C64::new(0.0, 0.0) {
                    continue;
                }
                for (a, x) in acc.iter_mut().zip(&v[lo..hi]) {
                    *a += c * *x;
                }
            }
            acc
        });
        let data: Vec<C64> = blocks.into_iter().flatten().map(|z| z * w).collect();
        Spinor::from_vec(self.grid, self.channel, data).expect("basis reconstruction has grid length")
    }

    /// max |⟨v_a, v_b⟩ − δ_ab| over all pairs.
    pub fn orthonormality_defect(&self, exec: Exec) -> f64 {
        let n = self.vectors.len();
        exec.map_range(n, |a| {
            (a..n)
                .map(|b| {
                    let d: f64 = self.vectors[a].iter().zip(&self.vectors[b]).map(|(x, y)| x * y).sum();
                    (d - if a == b { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}
