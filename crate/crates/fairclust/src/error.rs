use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point set must contain at least one point")]
    EmptyPointSet,

    #[error("points must have at least one coordinate")]
    ZeroDimension,

    #[error("non-finite coordinate at point {point}, column {col}")]
    NonFiniteCoord { point: usize, col: usize },

    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("center set must be nonempty")]
    EmptyCenters,

    #[error("ell must lie in [1, {n}], got {ell}")]
    EllOutOfRange { ell: usize, n: usize },

    #[error("alpha must be >= 1, got {0}")]
    InvalidAlpha(f64),

    #[error("cover multiplier must be >= 1, got {0}")]
    InvalidCoverMult(f64),

    #[error("k = {k} is invalid for {n} points")]
    InvalidK { k: usize, n: usize },

    #[error("k = {k} is smaller than the number of critical balls ({ell})")]
    KBelowBallCount { k: usize, ell: usize },

    #[error("p must be >= 1, got {0}")]
    InvalidNorm(f64),

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("swap size t must lie in 1..=4, got {0}")]
    InvalidSwapSize(usize),

    #[error("invalid swap: {0}")]
    InvalidSwap(String),

    #[error("initial solution is not feasible with respect to the critical balls")]
    InfeasibleInitial,

    #[error("{candidates} candidate center sets exceed the enumeration cap of {cap}")]
    OracleCapExceeded { candidates: u128, cap: u64 },

    #[error("no {alpha}-fair center set of the requested size exists for this instance")]
    OracleInfeasible { alpha: f64 },

    #[error("file has {rows} usable rows, need at least {need}")]
    TooFewRows { rows: usize, need: usize },

    #[error("cell at row {row}, column {col} does not parse as a number: {value:?}")]
    NonNumericCell { row: usize, col: usize, value: String },

    #[error("column {0:?} not found in header")]
    UnknownColumn(String),

    #[error("column index {index} out of range for {cols} columns")]
    ColumnOutOfRange { index: usize, cols: usize },

    #[error("column selection by name requires a header row")]
    HeaderRequired,

    #[error("infeasible generator parameters: {0}")]
    BadGeneratorParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
