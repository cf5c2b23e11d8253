use crate::error::{invalid, Result};
use crate::radial::{Channel, RadialGrid};
use crate::C64;

/// Two-component radial wavefunction, stored interleaved in lattice order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor {
    grid: RadialGrid,
    channel: Channel,
    data: Vec<C64>,
}

impl Spinor {
    pub fn zeros(grid: RadialGrid, channel: Channel) -> Self {
        Spinor { grid, channel, data: vec![C64::new(0.0, 0.0); grid.dim()] }
    }

    pub fn from_vec(grid: RadialGrid, channel: Channel, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.dim() {
            return Err(invalid(format!("spinor length {} != {}", data.len(), grid.dim())));
        }
        Ok(Spinor { grid, channel, data })
    }

    pub fn from_real(grid: RadialGrid, channel: Channel, data: &[f64]) -> Result<Self> {
        Self::from_vec(grid, channel, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Builds a spinor from separate upper/lower arrays of length N.
    pub fn from_components(grid: RadialGrid, channel: Channel, upper: &[C64], lower: &[C64]) -> Result<Self> {
        let n = grid.nodes();
        if upper.len() != n || lower.len() != n {
            return Err(invalid("component arrays must have length N"));
        }
        let (even, odd) = if channel.upper_on_even() { (upper, lower) } else { (lower, upper) };
        let mut data = Vec::with_capacity(2 * n);
        for j in 0..n {
            data.push(even[j]);
            data.push(odd[j]);
        }
        Ok(Spinor { grid, channel, data })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn channel(&self) -> Channel {
        self.channel
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    fn component(&self, even: bool) -> Vec<C64> {
        let start = if even { 0 } else { 1 };
        self.data.iter().skip(start).step_by(2).copied().collect()
    }
    pub fn upper(&self) -> Vec<C64> {
        self.component(self.channel.upper_on_even())
    }
    pub fn lower(&self) -> Vec<C64> {
        self.component(!self.channel.upper_on_even())
    }

    /// ⟨self, other⟩ = h Σ conj(self_i) other_i.
    pub fn inner(&self, other: &Spinor) -> C64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.h()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.h() * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, a: C64) {
        self.data.iter_mut().for_each(|z| *z *= a);
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite spinor"));
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(self)
    }

    /// self + a·other.
    pub fn axpy(&mut self, a: C64, other: &Spinor) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn memory_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<C64>()
    }
}
