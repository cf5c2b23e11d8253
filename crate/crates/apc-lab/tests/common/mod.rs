#![allow(dead_code)]

use apc_lab::experiments::Lab;
use apc_lab::radial::{Channel, PotentialSpec, RadialGrid, Shape, Spinor};
use apc_lab::{Exec, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn raw() -> PotentialSpec {
    PotentialSpec::new(2.0, 0.5, Shape::SmoothBump).unwrap()
}

pub fn lab() -> Lab {
    Lab::calibrate(0.05, Channel::Plus, raw(), Exec::default()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized random spinor on the first `keep` interleaved nodes.
pub fn random_state(grid: RadialGrid, keep: usize, rng: &mut ChaCha8Rng) -> Spinor {
    let data = (0..grid.dim())
        .map(|i| if i < keep { C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) } else { C64::new(0.0, 0.0) })
        .collect();
    Spinor::from_vec(grid, Channel::Plus, data).unwrap().normalized().unwrap()
}

/// Smooth Gaussian packet centred at `r0`.
pub fn packet(grid: RadialGrid, r0: f64, width: f64) -> Spinor {
    let data = (0..grid.dim())
        .map(|i| {
            let r = grid.r(i);
            C64::new((-((r - r0) / width).powi(2)).exp(), 0.0)
        })
        .collect();
    Spinor::from_vec(grid, Channel::Plus, data).unwrap().normalized().unwrap()
}

pub fn dense(d: &[f64], e: &[f64]) -> DMatrix<f64> {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d[i]
        } else if i + 1 == j {
            e[i]
        } else if j + 1 == i {
            e[j]
        } else {
            0.0
        }
    })
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn diff_norm(a: &Spinor, b: &Spinor) -> f64 {
    let mut d = a.clone();
    d.axpy(C64::new(-1.0, 0.0), b);
    d.norm()
}
