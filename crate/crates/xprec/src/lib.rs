//! Extended-precision uniform pseudorandom numbers built from pairs of
//! lower-precision draws.
//!
//! A base generator emits values on a grid with step `2^-w`. Two draws
//! `x1` and `x2` are merged as `x1 + 2^-w * x2`, which squares the grid
//! resolution. The merged value is uniformly dense only on the middle
//! part of its range, so first draws landing on either edge of their
//! range are rejected and the surviving pairs are rescaled onto
//! `[0, 1 - 2^-2w]`. The construction is exactly uniform: every
//! attainable output value is hit by exactly one accepted input pair.
//!
//! Modules:
//!
//! * [`grid`] - the word-size parameter and aligned value ranges
//! * [`combine`] - the merging step, acceptance rule, and rescaling maps
//! * [`generate`] - drivers pulling draws from sources into outputs
//! * [`sources`] - base generators and adapters
//! * [`stats`] - exhaustive uniformity oracle and goodness-of-fit tests
//! * [`stream`] - lossless sample stream serialization

pub mod combine;
pub mod error;
pub mod generate;
pub mod grid;
pub mod sources;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use grid::{GridRange, Resolution};
