use std::f64::consts::PI;

use crate::error::{invalid, LabError, Result};
use crate::exec::Exec;
use crate::gef::{build_spectral_basis, SpectralBasis};
use crate::linalg::SpdTridiag;
use crate::radial::{Channel, PotentialSpec, RadialGrid, Shape, Spinor};
use crate::spectral::assemble_operator;
use crate::C64;

/// Complete elliptic integral K(m) by the arithmetic–geometric mean.
pub fn elliptic_k(m: f64) -> f64 {
    let (mut a, mut b) = (1.0, (1.0 - m).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Jacobi sn(u|m), cn(u|m) by descending Landen transformations.
pub fn jacobi_sn_cn(u: f64, m: f64) -> (f64, f64) {
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 64 {
        let an = a[a.len() - 1];
        let a_next = 0.5 * (an + b);
        let c_next = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(a_next);
        c.push(c_next);
    }
    let n = a.len() - 1;
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (c[k] / a[k] * phi.sin()).asin());
    }
    (phi.sin(), phi.cos())
}

/// Zolotarev's best rational approximation of sign(x) on [ℓ, 1] ∪ [−1, −ℓ]
/// in partial fractions: r(x) = x Σ_j w_j/(x² + c_j).
#[derive(Clone, Debug, PartialEq)]
pub struct ZolotarevSign {
    pub shifts: Vec<f64>,
    pub weights: Vec<f64>,
    /// max |r(x) − 1| on [ℓ, 1], measured.
    pub error: f64,
}

impl ZolotarevSign {
    pub fn eval(&self, x: f64) -> f64 {
        x * self.shifts.iter().zip(&self.weights).map(|(c, w)| w / (x * x + c)).sum::<f64>()
    }
}

pub fn zolotarev(ell: f64, order: usize) -> Result<ZolotarevSign> {
    if !(ell > 0.0 && ell < 1.0) || order == 0 {
        return Err(invalid(format!("zolotarev needs 0 < l < 1 and order > 0 (l = {ell}, order = {order})")));
    }
    let m = 1.0 - ell * ell;
    let kk = elliptic_k(m);
    let c: Vec<f64> = (1..2 * order)
        .map(|j| {
            let (sn, cn) = jacobi_sn_cn(j as f64 * kk / (2 * order) as f64, m);
            ell * ell * sn * sn / (cn * cn)
        })
        .collect();
    let odd: Vec<f64> = c.iter().step_by(2).copied().collect();
    let even: Vec<f64> = c.iter().skip(1).step_by(2).copied().collect();
    let mut weights: Vec<f64> = (0..order)
        .map(|j| {
            let num: f64 = even.iter().map(|e| e - odd[j]).product();
            let den: f64 = odd.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, o)| o - odd[j]).product();
            num / den
        })
        .collect();
    let mut z = ZolotarevSign { shifts: odd, weights: weights.clone(), error: 0.0 };
    // normalize so the error equioscillates around 1
    let samples = 4000;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in 0..=samples {
        let x = ell.powf(1.0 - s as f64 / samples as f64);
        let v = z.eval(x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let scale = 2.0 / (lo + hi);
    weights.iter_mut().for_each(|w| *w *= scale);
    z.weights = weights;
    z.error = (hi - lo) / (hi + lo);
    Ok(z)
}

/// P₀^± = (1 ± sign(H₀))/2 for the free lattice operator.
#[derive(Clone, Debug)]
pub struct FreeProjectors {
    grid: RadialGrid,
    channel: Channel,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Rational { h0: crate::linalg::SymTridiag, e_max: f64, sign: ZolotarevSign, even: Vec<SpdTridiag>, odd: Vec<SpdTridiag> },
    Dense(Box<SpectralBasis>),
}

fn free_operator(grid: &RadialGrid, channel: Channel) -> Result<crate::linalg::SymTridiag> {
    let nothing = PotentialSpec { amplitude: 0.0, radius: 0.5 * grid.length(), shape: Shape::SmoothBump, rescale_factor: 1.0 };
    Ok(assemble_operator(grid, channel, &nothing, 0.0)?.matrix().clone())
}

impl FreeProjectors {
    /// Rational sign function of `order` poles, accurate to `tol` on
    /// [1 − 10h², E_max]. H₀² splits into two tridiagonal blocks (even and
    /// odd nodes), so each pole costs two real SPD solves.
    pub fn new(grid: &RadialGrid, channel: Channel, order: usize, tol: f64) -> Result<Self> {
        let h0 = free_operator(grid, channel)?;
        let e_max = h0.norm_bound();
        let ell = (1.0 - 10.0 * grid.h() * grid.h()) / e_max;
        let sign = zolotarev(ell, order)?;
        if sign.error > tol {
            return Err(LabError::OrderTooLow { order, err: sign.error, tol });
        }
        let n = h0.d.len();
        let e = |i: isize| if i < 0 || i as usize >= n - 1 { 0.0 } else { h0.e[i as usize] };
        let sq_diag: Vec<f64> = (0..n).map(|i| h0.d[i] * h0.d[i] + e(i as isize - 1).powi(2) + e(i as isize).powi(2)).collect();
        let block = |start: usize, shift: f64| -> Result<SpdTridiag> {
            let idx: Vec<usize> = (start..n).step_by(2).collect();
            let diag: Vec<f64> = idx.iter().map(|&i| sq_diag[i] + shift).collect();
            let off: Vec<f64> = idx.iter().take(idx.len() - 1).map(|&i| e(i as isize) * e(i as isize + 1)).collect();
            SpdTridiag::factor(&diag, &off)
        };
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for c in &sign.shifts {
            even.push(block(0, c * e_max * e_max)?);
            odd.push(block(1, c * e_max * e_max)?);
        }
        Ok(FreeProjectors { grid: *grid, channel, kind: Kind::Rational { h0, e_max, sign, even, odd } })
    }

    /// Smallest order in 4..=48 meeting `tol`.
    pub fn with_tolerance(grid: &RadialGrid, channel: Channel, tol: f64) -> Result<Self> {
        let mut last = None;
        for order in 4..=48 {
            match Self::new(grid, channel, order, tol) {
                Ok(p) => return Ok(p),
                Err(e @ LabError::OrderTooLow { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(LabError::OrderTooLow { order: 48, err: f64::NAN, tol }))
    }

    /// Exact projectors from a full eigendecomposition (small grids only).
    pub fn dense(grid: &RadialGrid, channel: Channel, exec: Exec) -> Result<Self> {
        let nothing = PotentialSpec { amplitude: 0.0, radius: 0.5 * grid.length(), shape: Shape::SmoothBump, rescale_factor: 1.0 };
        let op = assemble_operator(grid, channel, &nothing, 0.0)?;
        Ok(FreeProjectors { grid: *grid, channel, kind: Kind::Dense(Box::new(build_spectral_basis(&op, exec)?)) })
    }

    pub fn order(&self) -> usize {
        match &self.kind {
            Kind::Rational { sign, .. } => sign.shifts.len(),
            Kind::Dense(_) => 0,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match &self.kind {
            Kind::Rational { sign, .. } => sign.error,
            Kind::Dense(_) => 0.0,
        }
    }

    /// sign(H₀)ψ.
    pub fn apply_sign(&self, psi: &Spinor) -> Result<Spinor> {
        if psi.grid() != &self.grid || psi.channel() != self.channel {
            return Err(invalid("spinor lives on a different grid or channel"));
        }
        match &self.kind {
            Kind::Dense(basis) => {
                let mut c = basis.forward(psi, Exec::Serial);
                for (z, e) in c.iter_mut().zip(basis.energies()) {
                    *z *= e.signum();
                }
                Ok(basis.inverse(&c, Exec::Serial))
            }
            Kind::Rational { h0, e_max, sign, even, odd } => {
                let x = psi.data();
                let n = x.len();
                let mut acc = vec![C64::new(0.0, 0.0); n];
                for (j, w) in sign.weights.iter().enumerate() {
                    let mut xe: Vec<C64> = x.iter().step_by(2).copied().collect();
                    let mut xo: Vec<C64> = x.iter().skip(1).step_by(2).copied().collect();
                    even[j].solve_in_place(&mut xe);
                    odd[j].solve_in_place(&mut xo);
                    for (p, z) in xe.into_iter().enumerate() {
                        acc[2 * p] += z * *w;
                    }
                    for (p, z) in xo.into_iter().enumerate() {
                        acc[2 * p + 1] += z * *w;
                    }
                }
                let mut out = vec![C64::new(0.0, 0.0); n];
                for i in 0..n {
                    let mut s = acc[i] * h0.d[i];
                    if i > 0 {
                        s += acc[i - 1] * h0.e[i - 1];
                    }
                    if i + 1 < n {
                        s += acc[i + 1] * h0.e[i];
                    }
                    out[i] = s * *e_max;
                }
                Spinor::from_vec(self.grid, self.channel, out)
            }
        }
    }

    /// (P⁺ψ, P⁻ψ).
    pub fn split(&self, psi: &Spinor) -> Result<(Spinor, Spinor)> {
        let s = self.apply_sign(psi)?;
        let mut plus = psi.clone();
        plus.axpy(C64::new(1.0, 0.0), &s);
        plus.scale(C64::new(0.5, 0.0));
        let mut minus = psi.clone();
        minus.axpy(C64::new(-1.0, 0.0), &s);
        minus.scale(C64::new(0.5, 0.0));
        Ok((plus, minus))
    }

    /// (⟨ψ, P⁺ψ⟩, ⟨ψ, P⁻ψ⟩); the two add up to ‖ψ‖² by construction.
    pub fn energy_split(&self, psi: &Spinor) -> Result<(f64, f64)> {
        let s = self.apply_sign(psi)?;
        let n2 = psi.norm_sqr();
        let q = psi.inner(&s).re;
        Ok((0.5 * (n2 + q), 0.5 * (n2 - q)))
    }
}
