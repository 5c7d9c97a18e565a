use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error("loss profile exhausted: requested cell {n}, table holds {len} values")]
    ProfileExhausted { n: usize, len: usize },
    #[error("cell index {0} out of range")]
    InvalidIndex(usize),
    #[error("matrix contains NaN or infinite entries")]
    NonFiniteInput,
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("QR iteration did not converge for eigenvalue index {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },
    #[error("state is in the {found:?} basis, expected {expected:?}")]
    BasisMismatch {
        expected: crate::model::Basis,
        found: crate::model::Basis,
    },
    #[error("state dimension {found} does not match lattice dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transfer matrix singular at cell {n}: t1 + gamma_n/2 vanishes")]
    SingularCell { n: usize },
    #[error("hopping t2 must be nonzero")]
    ZeroInterCellHopping,
    #[error("transfer matrix at cell {n} is defective (repeated eigenvalue)")]
    DefectiveCell { n: usize },
    #[error("degenerate perturbation: decoupled levels {i} and {j} coincide")]
    DegeneratePerturbation { i: usize, j: usize },
    #[error("loss profile has no closed-form derivative")]
    NotDifferentiable,
    #[error("perturbation bound diverges: derivative of the loss vanishes at cell {j}")]
    DivergentBound { j: usize },
    #[error("branch is empty")]
    EmptyBranch,
    #[error("input list is empty")]
    EmptyInput,
    #[error("convergence ratio diverges: cos(kappa) vanishes")]
    DivergentRatio,
    #[error("geometric mean does not converge under refinement")]
    DivergentMean,
    #[error("region segmentation degenerate: {0}")]
    DegenerateSegmentation(&'static str),
    #[error("fit range needs at least {needed} usable cells, got {got}")]
    InsufficientRange { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
