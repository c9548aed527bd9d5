use thiserror::Error;

/// Errors raised by table construction, norm computation, sampling and decoding.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("p^n does not fit the index width (p = {p}, n = {n})")]
    SpaceTooLarge { p: u32, n: usize },

    #[error("residue {value} is out of range for p = {p}")]
    ResidueOutOfRange { value: u64, p: u32 },

    #[error("index {index} is out of range for a space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different spaces: F_{p1}^{n1} vs F_{p2}^{n2}")]
    SpaceMismatch { p1: u32, n1: usize, p2: u32, n2: usize },

    #[error("table has {found} values but p^n = {expected}")]
    TableLength { expected: usize, found: usize },

    #[error("value at index {index} has modulus {modulus}, outside the unit disk")]
    NotBounded { index: usize, modulus: f64 },

    #[error("value at index {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("{what} needs {required} evaluations, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("rigidity calibration failed: integral {integral} <= {epsilon} but the phase is not constant (spread {spread})")]
    Rigidity {
        integral: f64,
        epsilon: f64,
        spread: f64,
    },

    #[error("decode failed: {0}")]
    Decode(#[from] DecodeFailure),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Ways the polynomiality decoder can give up.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeFailure {
    #[error("only {found} good shifts among {drawn} draws at order {order}; need a spanning set")]
    InsufficientGoodShifts {
        order: usize,
        found: usize,
        drawn: usize,
    },

    #[error("cocycle vote {agreement:.3} below threshold {threshold:.3} at order {order}")]
    VoteBelowThreshold {
        order: usize,
        agreement: f64,
        threshold: f64,
    },

    #[error("mean of the residual has modulus {modulus:.3e}; no phase can be read off")]
    MeanVanishes { modulus: f64 },

    #[error("snap of {distance:.3} exceeds tolerance {tolerance:.3} at order {order}")]
    SnapOutOfTolerance {
        order: usize,
        distance: f64,
        tolerance: f64,
    },

    #[error("output failed phase-polynomial verification at degree {degree}")]
    Unverified { degree: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
