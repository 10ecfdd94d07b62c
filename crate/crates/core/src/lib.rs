//! Steady-state and time-resolved magnon statistics of a driven, dissipative
//! magnon-qubit system in a truncated Fock ⊗ two-level space.
//!
//! All rates and detunings are in units of a common linewidth γ.

pub mod analytic;
pub mod correlations;
pub mod error;
pub mod evolve;
pub mod liouvillian;
pub mod model;
pub mod operators;
pub mod scan;
pub mod state;

pub use error::{Error, Result};
pub use model::SystemParams;
pub use operators::HilbertSpec;
pub use state::DensityMatrix;
