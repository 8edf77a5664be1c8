//! Exact second-order differentiation substrate: jets, Taylor polynomials
//! and smooth expression fields.

pub mod field;
pub mod jet;
pub mod taylor;

pub use field::{FieldError, SmoothField, VectorField};
pub use jet::{Jet1, Jet2, JetArithmetic, JetError};
pub use taylor::Taylor;
