use thiserror::Error;

/// Errors raised by the geometry, audit and file-format layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported field order {0}: q must be a prime power with q <= 16")]
    UnsupportedField(u32),

    #[error("field mismatch: element of GF({found}) used with GF({expected})")]
    FieldMismatch { expected: u8, found: u8 },

    #[error("element code {code} out of range for GF({q})")]
    InvalidElement { code: u8, q: u8 },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("unsupported ambient dimension {0}: need 1 <= n <= 10")]
    UnsupportedDimension(usize),

    #[error("ambient mismatch: PG({left_n},{left_q}) vs PG({right_n},{right_q})")]
    AmbientMismatch {
        left_n: usize,
        left_q: u8,
        right_n: usize,
        right_q: u8,
    },

    #[error("dimension {dim} out of range: {reason}")]
    DimensionOutOfRange { dim: isize, reason: String },

    #[error("invalid coordinates: {0}")]
    InvalidCoordinates(String),

    #[error("degenerate line basis: the two vectors are dependent")]
    DegenerateLine,

    #[error("line is not totally isotropic on the quadric")]
    NotIsotropic,

    #[error("k = {0} out of range: need 2 <= k <= 6")]
    PolygonSize(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
