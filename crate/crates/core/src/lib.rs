//! Generators of the Poincaré-type algebra P(1,n) as differential operators
//! in momentum space, little-group spin matrices, Casimir checks, and
//! square-root Hamiltonian evolution with mass-spectrum extraction.

pub mod jet_calculus;
pub mod spin_reps;
pub mod evolution;
pub mod operator_algebra;
pub mod cli;
