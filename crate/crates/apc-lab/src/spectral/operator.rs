use crate::error::{invalid, Result};
use crate::linalg::SymTridiag;
use crate::radial::{Channel, PotentialSpec, RadialGrid, Spinor};
use crate::C64;

/// Diagonal entry and coupling to the next node for interleaved node `i`.
///
/// With D = d/dr + κ/r = r^(−κ) ∂_r r^κ the lattice derivative is a plain
/// difference of r^κ-weighted values, so the free lattice operator squares
/// to 1 + D†D on one component and 1 + DD† on the other: the discrete gap
/// (−1, 1) is exact.
#[inline]
pub fn lattice_coeffs(h: f64, channel: Channel, pot: &PotentialSpec, mu: f64, i: usize) -> (f64, f64) {
    let r = 0.5 * (i as f64 + 1.0) * h;
    let upper = i.is_multiple_of(2) == channel.upper_on_even();
    let mass = if upper { 1.0 } else { -1.0 };
    let d = mass + mu * pot.eval(r);
    let kappa = channel.kappa();
    let r_next = r + 0.5 * h;
    // ratio of the integer-node radius to the half-node radius
    let ratio = if i.is_multiple_of(2) { r_next / r } else { r / r_next };
    let sign = if i.is_multiple_of(2) { kappa } else { -kappa };
    (d, sign * ratio / h)
}

/// Symmetric tridiagonal lattice form of H_κ = [[1+μA, −D†], [D, −1+μA]].
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    grid: RadialGrid,
    channel: Channel,
    potential: PotentialSpec,
    mu: f64,
    matrix: SymTridiag,
    well: Vec<f64>,
}

pub fn assemble_operator(grid: &RadialGrid, channel: Channel, potential: &PotentialSpec, mu: f64) -> Result<DiscreteOperator> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid(format!("coupling must be finite and >= 0, got {mu}")));
    }
    potential.validate()?;
    if grid.length() < 2.0 * potential.radius {
        return Err(invalid(format!(
            "box length {} must be at least twice the well radius {}",
            grid.length(),
            potential.radius
        )));
    }
    let n = grid.dim();
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n - 1);
    let mut well = Vec::with_capacity(n);
    for i in 0..n {
        let (di, ei) = lattice_coeffs(grid.h(), channel, potential, mu, i);
        d.push(di);
        if i + 1 < n {
            e.push(ei);
        }
        well.push(potential.eval(grid.r(i)));
    }
    Ok(DiscreteOperator { grid: *grid, channel, potential: *potential, mu, matrix: SymTridiag { d, e }, well })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn channel(&self) -> Channel {
        self.channel
    }
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn dim(&self) -> usize {
        self.matrix.d.len()
    }
    pub fn matrix(&self) -> &SymTridiag {
        &self.matrix
    }
    pub fn diag(&self) -> &[f64] {
        &self.matrix.d
    }
    pub fn off_diag(&self) -> &[f64] {
        &self.matrix.e
    }
    /// Rescaled well A(r_i) at each interleaved node.
    pub fn well(&self) -> &[f64] {
        &self.well
    }

    /// Same lattice at another coupling; only the diagonal changes.
    pub fn with_coupling(&self, mu: f64) -> DiscreteOperator {
        let mut out = self.clone();
        out.mu = mu;
        for (i, d) in out.matrix.d.iter_mut().enumerate() {
            let upper = (i % 2 == 0) == self.channel.upper_on_even();
            *d = if upper { 1.0 } else { -1.0 } + mu * self.well[i];
        }
        out
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = &self.matrix.d;
        let e = &self.matrix.e;
        let n = d.len();
        for i in 0..n {
            let mut s = x[i] * d[i];
            if i > 0 {
                s += x[i - 1] * e[i - 1];
            }
            if i + 1 < n {
                s += x[i + 1] * e[i];
            }
            y[i] = s;
        }
    }

    pub fn apply_spinor(&self, psi: &Spinor) -> Spinor {
        let mut out = Spinor::zeros(self.grid, self.channel);
        self.apply(psi.data(), out.data_mut());
        out
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.matrix.norm_bound()
    }

    /// Row-major dense copy, for small oracle checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.matrix.d[i];
            if i + 1 < n {
                m[i][i + 1] = self.matrix.e[i];
                m[i + 1][i] = self.matrix.e[i];
            }
        }
        m
    }
}
