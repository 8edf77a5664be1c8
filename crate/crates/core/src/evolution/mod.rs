//! Grid wave functions, square-root Hamiltonian evolution, expectation values and
//! mass-spectrum observables.

pub mod dynamics;
pub mod grid;
pub mod mass;
pub mod snapshot;
pub mod wavefunction;

pub use dynamics::*;
pub use grid::*;
pub use mass::*;
pub use snapshot::*;
pub use wavefunction::*;

use crate::operator_algebra::OperatorError;
use crate::spin_reps::SpinError;

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid, representation or space mismatch: {0}")]
    Mismatch(String),
    #[error("expected a {expected}-space wave function, got {got}-space")]
    WrongSpace { expected: Space, got: Space },
    #[error("nonzero amplitude {amplitude:.3e} on tachyonic grid point {point:?}")]
    TachyonicAmplitude { point: Vec<f64>, amplitude: f64 },
    #[error("singular operator coefficient at grid point {point:?} carrying amplitude {amplitude:.3e}")]
    Singular { point: Vec<f64>, amplitude: f64 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("requested m^2 = {m2} below threshold kappa^2 = {threshold}")]
    BelowThreshold { m2: f64, threshold: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
