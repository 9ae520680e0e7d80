use std::path::PathBuf;

/// Crate-wide error type. The CLI maps each variant onto a stable process
/// exit code, so variants are grouped by failure class rather than by module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation
    /// (non-positive digamma argument, alpha with a negative entry, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data: bad CSV row, bad flag value, bad config line.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally valid input with inconsistent shape (vector lengths,
    /// class counts, index out of range).
    #[error("shape error: {0}")]
    Shape(String),

    /// A computation produced NaN or an infinity where a finite value is
    /// required (exploding training loss, non-finite fixed-point iterate).
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Every class of a sample batch fell below the degeneracy threshold,
    /// so no Dirichlet fit exists.
    #[error("estimation failed: all {classes} classes degenerate (epsilon {epsilon:e})")]
    AllDegenerate { classes: usize, epsilon: f64 },

    /// An oracle/self-check run found a violated identity or tolerance.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// IDX file with an unexpected magic number.
    #[error("{path}: bad IDX magic 0x{found:08x}, expected 0x{expected:08x}")]
    IdxMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    /// IDX file shorter than its header promises.
    #[error("{path}: truncated IDX payload, expected {expected} bytes, found {found}")]
    IdxTruncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    /// Image and label IDX files that disagree on the record count.
    #[error("IDX pair mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },
}

impl Error {
    /// Process exit code contract: 0 success, 1 verification failure,
    /// 2 input/parse error, 3 domain error, 4 degenerate estimation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification(_) => 1,
            Error::Parse(_)
            | Error::Io { .. }
            | Error::IdxMagic { .. }
            | Error::IdxTruncated { .. }
            | Error::IdxCountMismatch { .. } => 2,
            Error::Domain(_) | Error::Shape(_) | Error::NonFinite(_) => 3,
            Error::AllDegenerate { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
