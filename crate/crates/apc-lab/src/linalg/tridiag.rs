use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{LabError, Result};
use crate::C64;

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// LU factorization of a general tridiagonal matrix with partial pivoting
/// (the gttrf/gtts2 scheme). Fill-in lands on a second superdiagonal.
#[derive(Clone, Debug)]
pub struct TriLu<T: Scalar> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swap: Vec<bool>,
}

impl<T: Scalar> TriLu<T> {
    /// `sub[i]` is A[i+1][i], `sup[i]` is A[i][i+1].
    pub fn factor(sub: &[T], diag: &[T], sup: &[T]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(LabError::Invalid("tridiagonal band lengths do not match".into()));
        }
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] = d[i + 1] - fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -(fact * du[i + 1]);
                }
                swap[i] = true;
            }
        }
        if let Some(i) = d.iter().position(|x| *x == T::zero()) {
            return Err(LabError::SolveFailure(format!("zero pivot at row {i}")));
        }
        Ok(TriLu { dl, d, du, du2, swap })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        debug_assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// LDLᵀ factorization of a real symmetric positive definite tridiagonal
/// matrix, applied to real or complex right-hand sides.
#[derive(Clone, Debug)]
pub struct SpdTridiag {
    l: Vec<f64>,
    dinv: Vec<f64>,
}

impl SpdTridiag {
    pub fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(LabError::Invalid("tridiagonal band lengths do not match".into()));
        }
        let mut l = vec![0.0; n - 1];
        let mut dinv = vec![0.0; n];
        let mut dk = diag[0];
        for k in 0..n {
            if k > 0 {
                l[k - 1] = off[k - 1] / dk;
                dk = diag[k] - l[k - 1] * off[k - 1];
            }
            if !(dk > 0.0) {
                return Err(LabError::SolveFailure(format!("matrix not positive definite at row {k}")));
            }
            dinv[k] = 1.0 / dk;
        }
        Ok(SpdTridiag { l, dinv })
    }

    pub fn solve_in_place<T: Scalar>(&self, b: &mut [T]) {
        let n = self.dinv.len();
        for k in 1..n {
            b[k] = b[k] - b[k - 1] * self.l[k - 1];
        }
        for (x, d) in b.iter_mut().zip(&self.dinv) {
            *x = *x * *d;
        }
        for k in (0..n - 1).rev() {
            b[k] = b[k] - b[k + 1] * self.l[k];
        }
    }
}
