//! Gate constructors, controlled-gate structure analysis, and numerical
//! two-qubit-gate synthesis for three-qubit targets such as the Toffoli gate.

pub mod error;
pub mod gates;
pub mod matrix;
pub mod random;
pub mod structure;
pub mod synthesis;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ComplexVector};
