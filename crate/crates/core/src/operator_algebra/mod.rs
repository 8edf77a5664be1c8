//! Differential operators with matrix coefficients, Poincaré generator sets
//! and numerical verification of their algebra.

pub mod generators;
pub mod operator;
pub mod verify;

pub use generators::*;
pub use operator::*;
pub use verify::*;
