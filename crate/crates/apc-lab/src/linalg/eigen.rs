use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TriLu;
use crate::error::{LabError, Result};
use crate::exec::Exec;

/// Real symmetric tridiagonal matrix: diagonal `d` (n) and off-diagonal `e` (n−1).
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

/// Eigenvalues in ascending order with unit-norm eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

// relative gap below which inverse-iteration vectors are explicitly
// reorthogonalized inside a cluster
const CLUSTER_GAP: f64 = 1e-5;
const INVERSE_STEPS: usize = 3;

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(LabError::Invalid("tridiagonal band lengths do not match".into()));
        }
        Ok(SymTridiag { d, e })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.e[i - 1].abs();
            }
            if i + 1 < n {
                r += self.e[i].abs();
            }
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let emax = self.e.iter().fold(1.0f64, |m, x| m.max(x * x));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin();
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalue indices in the half-open interval [a, b).
    pub fn index_range(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        self.count_below(a)..self.count_below(b)
    }

    pub fn eigenvalues(&self, idx: std::ops::Range<usize>, exec: Exec) -> Vec<f64> {
        let start = idx.start;
        exec.map_range(idx.len(), |i| self.eigenvalue(start + i))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n {
            let mut s = self.d[i] * x[i];
            if i > 0 {
                s += self.e[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.e[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let mut y = vec![0.0; v.len()];
        self.matvec(v, &mut y);
        y.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }

    /// Eigenpairs for the index range, vectors by inverse iteration.
    /// Clusters with relative gaps below 1e-5 are reorthogonalized.
    pub fn eigenpairs(&self, idx: std::ops::Range<usize>, exec: Exec) -> Result<EigenPairs> {
        let values = self.eigenvalues(idx.clone(), exec);
        let vectors = self.eigenvectors(&values, idx.start, exec)?;
        Ok(EigenPairs { values, vectors })
    }

    /// Inverse iteration for sorted eigenvalues; `first_index` seeds the
    /// start vectors so results do not depend on scheduling.
    pub fn eigenvectors(&self, values: &[f64], first_index: usize, exec: Exec) -> Result<Vec<Vec<f64>>> {
        let scale = self.norm_bound().max(f64::MIN_POSITIVE);
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for j in 1..=values.len() {
            if j == values.len() || values[j] - values[j - 1] > CLUSTER_GAP * scale {
                clusters.push((start, j));
                start = j;
            }
        }
        let blocks = exec.map(&clusters, |&(a, b)| self.cluster_vectors(&values[a..b], first_index + a, scale));
        let mut out = Vec::with_capacity(values.len());
        for b in blocks {
            out.extend(b?);
        }
        Ok(out)
    }

    fn cluster_vectors(&self, values: &[f64], seed: usize, scale: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.d.len();
        let sub = &self.e;
        let sep = 10.0 * f64::EPSILON * scale;
        let mut shifted: Vec<f64> = values.to_vec();
        for j in 1..shifted.len() {
            if shifted[j] - shifted[j - 1] < sep {
                shifted[j] = shifted[j - 1] + sep;
            }
        }
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for (j, &lam) in shifted.iter().enumerate() {
            let diag: Vec<f64> = self.d.iter().map(|x| x - lam).collect();
            let lu = match TriLu::factor(sub, &diag, sub) {
                Ok(lu) => lu,
                Err(_) => {
                    let diag: Vec<f64> = diag.iter().map(|x| x - sep).collect();
                    TriLu::factor(sub, &diag, sub)?
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (seed + j) as u64);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut v);
            for _ in 0..INVERSE_STEPS {
                lu.solve_in_place(&mut v);
                for _ in 0..2 {
                    for u in &vecs {
                        let p = dot(u, &v);
                        v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
                    }
                }
                if !normalize(&mut v) {
                    return Err(LabError::SolveFailure(format!("inverse iteration collapsed at eigenvalue {lam}")));
                }
            }
            fix_sign(&mut v);
            vecs.push(v);
        }
        Ok(vecs)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = dot(v, v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Largest-magnitude entry made positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
