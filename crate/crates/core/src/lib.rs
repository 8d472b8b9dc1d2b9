//! Numerics for the mass-critical nonlinear Schrödinger equation
//! iu_t + Δu = μ|u|^{4/d}u in one and two dimensions on a periodic box.

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod profiles;
pub mod propagator;
pub mod resample;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use exec::{configure_threads, Exec};
pub use grid::{make_grid, Field, Grid};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
