//! Error type shared across the library.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Word size outside the supported `2..=26` range.
    WordSize(u32),
    /// Bounds, step, or point count that do not form a usable grid.
    InvalidRange(String),
    /// A first draw sitting on a rejected edge of its range.
    RejectedBoundary(f64),
    /// A grid index outside the band the composition accepts.
    IndexOutOfBand { index: u64, m: u64 },
    /// A lattice index past the end of the composed lattice.
    IndexOutOfRange { j: u64, m: u64 },
    /// Seed material that would leave a generator in a forbidden state.
    InvalidSeed(String),
    /// A finite source ran out of values mid-composition.
    SourceExhausted,
    /// Too few samples for the requested statistic.
    InsufficientData { got: usize, needed: usize },
    /// Exhaustive enumeration request past the supported size.
    EnumerationTooLarge { m: u64, limit: u64 },
    /// Bin count unusable for the requested test.
    InvalidBins(usize),
    /// A p-value band with inverted or out-of-range edges.
    InvalidBand { lo: f64, hi: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::WordSize(w) => write!(f, "word size {w} outside the supported range 2..=26"),
            Error::InvalidRange(msg) => write!(f, "invalid range: {msg}"),
            Error::RejectedBoundary(x1) => {
                write!(f, "first draw {x1} lies on a rejected range edge")
            }
            Error::IndexOutOfBand { index, m } => {
                write!(f, "index {index} outside the accepted band for modulus {m}")
            }
            Error::IndexOutOfRange { j, m } => {
                write!(f, "lattice index {j} out of range for modulus {m}")
            }
            Error::InvalidSeed(msg) => write!(f, "invalid seed: {msg}"),
            Error::SourceExhausted => write!(f, "source exhausted"),
            Error::InsufficientData { got, needed } => {
                write!(f, "insufficient data: got {got} samples, need at least {needed}")
            }
            Error::EnumerationTooLarge { m, limit } => {
                write!(f, "enumeration for m={m} exceeds the guard limit {limit}")
            }
            Error::InvalidBins(bins) => write!(f, "unusable bin count {bins}"),
            Error::InvalidBand { lo, hi } => {
                write!(f, "invalid p-value band [{lo}, {hi}]")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
