//! Lattice Dirac operator, gap bound states, criticality and coupling scans.

mod bound;
mod critical;
mod curve;
mod operator;
mod scans;

pub use bound::{critical_state, gap_eigenpairs, principal_state, BoundState, EDGE_TOL};
pub use critical::{find_critical_coupling, lattice_solution, threshold_residual, CRITICAL_SCAN_MAX};
pub use curve::{bound_state_curve, CurveRow, CurveTable};
pub use operator::{assemble_operator, lattice_coeffs, DiscreteOperator};
pub use scans::{derivative_of_bound_state_scan, resolvent_norm_scan, DerivativeScan, ResolventScan};
