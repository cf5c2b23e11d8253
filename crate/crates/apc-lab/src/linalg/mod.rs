//! Tridiagonal kernels: pivoted LU, SPD factorization and the symmetric
//! eigensolver (Sturm bisection plus inverse iteration).

mod eigen;
mod tridiag;

pub use eigen::{EigenPairs, SymTridiag};
pub use tridiag::{Scalar, SpdTridiag, TriLu};
