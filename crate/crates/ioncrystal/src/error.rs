use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice size {got} is below the minimum of {min}")]
    LatticeTooSmall { got: usize, min: usize },

    #[error("wavevector ({n1}, {n2}) is off the {l}x{l} grid")]
    OffGrid { n1: usize, n2: usize, l: usize },

    #[error("pair tensor requested for a zero displacement")]
    ZeroDisplacement,

    #[error("unstable crystal: dynamical matrix eigenvalue {0:e} is negative")]
    UnstableCrystal(f64),

    #[error("unstable chain: 1 + beta_x * V_min = {0:e} is not positive")]
    UnstableChain(f64),

    #[error("blue-detuned mode {index}: delta = {delta:e}")]
    BlueDetunedMode { index: usize, delta: f64 },

    #[error("invalid basis label {0:?}, expected one of 00, 01, 10, 11")]
    InvalidBasisLabel(String),

    #[error("truncation insufficient for mode {mode}: thermal weight {weight:e} above the cutoff")]
    TruncationInsufficient { mode: usize, weight: f64 },

    #[error("time step not converged: halving the step changed the result by {0:e}")]
    StepNotConverged(f64),

    #[error("quadrature did not converge: last refinement changed the result by {0:e}")]
    QuadratureNotConverged(f64),
}
