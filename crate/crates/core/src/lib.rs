//! Spectral solvers for the intermediate long wave (ILW) and Benjamin-Ono
//! (B-O) two-layer internal-wave systems.
//!
//! * [`spectral`]: grids, transforms, nonlocal symbols and alias-free products.
//! * [`evolution`]: Fourier-Galerkin semidiscretization and RK4 time stepping.
//! * [`solitary`]: Petviashvili iteration for solitary waves.
//! * [`accel`]: minimal polynomial extrapolation in cycling mode.
//! * [`harness`]: convergence, round-trip, tail-decay and acceleration studies.
//! * [`cli`]: file-configured commands behind the `ilwbo` binary.

pub mod accel;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod io;
pub mod solitary;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, EvolutionRecord, SemiDiscrete};
pub use solitary::{FixedPointSystem, IterationTrace, SolitaryConfig};
pub use spectral::{ModelParams, Regime, SpectralGrid};
pub use state::StatePair;
