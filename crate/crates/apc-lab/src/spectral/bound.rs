use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::radial::Spinor;
use crate::spectral::DiscreteOperator;

/// Tolerance above E = 1 inside which an eigenvalue still counts as a gap
/// (edge) state. The free lattice gap is exact, so no O(h²) margin is needed;
/// this only absorbs rounding in the calibrated coupling.
pub const EDGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BoundState {
    pub energy: f64,
    pub vector: Spinor,
    pub mu: f64,
    /// ‖(D_μ − E)Φ‖ in the spinor norm.
    pub residual: f64,
}

/// All eigenpairs with E ∈ (−1, 1 + EDGE_TOL], sorted by energy.
pub fn gap_eigenpairs(op: &DiscreteOperator) -> Result<Vec<BoundState>> {
    let m = op.matrix();
    let idx = m.index_range(-1.0, 1.0 + EDGE_TOL);
    // −1 itself is never an eigenvalue of the lattice, but keep it open
    let pairs = m.eigenpairs(idx, Exec::Serial)?;
    let h = op.grid().h();
    let mut out = Vec::with_capacity(pairs.values.len());
    for (e, v) in pairs.values.iter().zip(&pairs.vectors) {
        if *e <= -1.0 {
            continue;
        }
        let scaled: Vec<f64> = v.iter().map(|x| x / h.sqrt()).collect();
        let vector = Spinor::from_real(*op.grid(), op.channel(), &scaled)?;
        out.push(BoundState { energy: *e, vector, mu: op.mu(), residual: m.residual(*e, v) });
    }
    if out.len() > 1 {
        log::warn!("{} gap eigenvalues at mu = {} (a single gap state is expected)", out.len(), op.mu());
    }
    Ok(out)
}

/// The state on the branch that reaches the upper edge: the highest gap state.
pub fn principal_state(op: &DiscreteOperator) -> Result<Option<BoundState>> {
    let m = op.matrix();
    let hi = m.count_below(1.0 + EDGE_TOL);
    if hi == 0 || m.count_below(-1.0) >= hi {
        return Ok(None);
    }
    let k = hi - 1;
    let e = m.eigenvalue(k);
    if e <= -1.0 {
        return Ok(None);
    }
    let v = m.eigenvectors(&[e], k, Exec::Serial)?.remove(0);
    let h = op.grid().h();
    let scaled: Vec<f64> = v.iter().map(|x| x / h.sqrt()).collect();
    let vector = Spinor::from_real(*op.grid(), op.channel(), &scaled)?;
    Ok(Some(BoundState { energy: e, vector, mu: op.mu(), residual: m.residual(e, &v) }))
}

/// Φ: the edge state of the calibrated operator at μ = 1.
pub fn critical_state(op_at_one: &DiscreteOperator) -> Result<BoundState> {
    let st = principal_state(op_at_one)?.ok_or_else(|| LabError::Invalid("no edge state at mu = 1; calibrate the potential first".into()))?;
    if (st.energy - 1.0).abs() > 1e-6 {
        return Err(LabError::Invalid(format!(
            "state at mu = 1 has E = {} (not at the edge); calibrate on this spacing",
            st.energy
        )));
    }
    Ok(st)
}
