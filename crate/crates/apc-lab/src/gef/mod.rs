//! Continuum eigenfunctions, the box eigenbasis standing in for the
//! generalized Fourier transform, momentum mollifiers and the resonance scan.

mod basis;
mod eigenfunction;
mod mollifier;
mod resonance;

pub use basis::{build_spectral_basis, SpectralBasis, BASIS_MAX_NODES};
pub use eigenfunction::{compute_gef, free_pair, match_free, GefRecord, MATCH_WINDOW};
pub use mollifier::{apply_mollifier, complement_norm, rho_hat};
pub use resonance::{fit_resonance, resonance_scan, ResonanceFit, ResonanceProfile, FIT_RESIDUAL_MAX};
