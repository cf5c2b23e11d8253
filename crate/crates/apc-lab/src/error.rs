use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no critical coupling up to mu = {scan_max}")]
    NoCriticalCoupling { scan_max: f64 },
    #[error("{count} eigenvalues reach the edge together at mu = {mu}")]
    DegenerateEdge { mu: f64, count: usize },
    #[error("eigenvector phase alignment failed at mu = {mu} (overlap {overlap:.3e})")]
    PhaseAlignmentFailure { mu: f64, overlap: f64 },
    #[error("singular shifted solve: {0}")]
    SolveFailure(String),
    #[error("free-solution match failed at k = {k}")]
    MatchFailure { k: f64 },
    #[error("resonance fit diverged (relative residual {residual:.3})")]
    FitDiverged { residual: f64 },
    #[error("dense budget exceeded: N = {n} > {max}")]
    BudgetExceeded { n: usize, max: usize },
    #[error("box too small: L = {have} but reflection-free evolution needs {need}")]
    BoxTooSmall { have: f64, need: f64 },
    #[error("rational sign approximation of order {order} reaches {err:.2e} > tol {tol:.2e}")]
    OrderTooLow { order: usize, err: f64, tol: f64 },
    #[error("fit window starts at {start} but the validity threshold is {threshold}")]
    WindowBeforeThreshold { start: f64, threshold: f64 },
    #[error("no half decay before the downcrossing (epsilon = {epsilon})")]
    NoDecayBeforeDowncrossing { epsilon: f64 },
    #[error("not enough points for a fit: {got} < {need}")]
    TooFewPoints { got: usize, need: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Invalid(msg.into())
}
