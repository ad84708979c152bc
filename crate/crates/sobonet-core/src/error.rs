//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A layer's column count does not match the previous layer's row count,
    /// or an input vector has the wrong length.
    DimensionMismatch { expected: usize, got: usize, context: &'static str },
    /// Operation requires equal depth (parallelization of unequal-depth
    /// networks is not defined).
    DepthMismatch { left: usize, right: usize },
    /// The activation does not satisfy the precondition of a construction,
    /// e.g. multiplication gadgets need a point with nonvanishing second
    /// derivative, which rules out piecewise linear activations.
    UnsuitableActivation(String),
    /// Name not present in the activation catalog.
    UnknownActivation(String),
    /// A parameter is outside its documented range.
    InvalidParameter { name: &'static str, message: String },
    /// The adaptive step-size search exhausted its budget without meeting
    /// the requested accuracy.
    AccuracyNotReached { target: f64, achieved: f64, context: &'static str },
    /// Encoding found a weight that is not representable by the scheme's
    /// dictionary and grid.
    UnencodableWeight { layer: usize, row: usize, col: usize, value: f64 },
    /// A bitstream failed structural validation during decoding.
    MalformedStream(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got, context } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {got}")
            }
            Error::DepthMismatch { left, right } => {
                write!(f, "depth mismatch: {left} vs {right} layers")
            }
            Error::UnsuitableActivation(msg) => write!(f, "unsuitable activation: {msg}"),
            Error::UnknownActivation(name) => write!(f, "unknown activation: {name}"),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter {name}: {message}")
            }
            Error::AccuracyNotReached { target, achieved, context } => {
                write!(f, "accuracy not reached in {context}: target {target:e}, achieved {achieved:e}")
            }
            Error::UnencodableWeight { layer, row, col, value } => {
                write!(f, "weight at layer {layer}, row {row}, col {col} not encodable: {value:e}")
            }
            Error::MalformedStream(msg) => write!(f, "malformed stream: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
