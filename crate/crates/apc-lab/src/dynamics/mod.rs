//! Crank–Nicolson propagation (frozen and slowly switched couplings), free
//! energy projectors and the region/overlap observables.

mod observables;
mod projectors;
pub(crate) mod propagate;

pub use observables::{region_mass, subspace_overlap};
pub use projectors::{elliptic_k, jacobi_sn_cn, zolotarev, FreeProjectors, ZolotarevSign};
pub use propagate::{
    evolve, propagate_adiabatic, propagate_static, Method, PropagationConfig, Sample, Trajectory, BOX_MARGIN,
};
