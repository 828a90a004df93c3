//! Pseudo-spectral toolkit for the Kadomtsev-Petviashvili equations
//! `u_t + u_xxx + γ ∂x⁻¹∂y² u + β ∂x(u²) = 0` on a periodic box.

pub mod counterexample;
pub mod config;
pub mod cutoff;
pub mod error;
pub mod estimates;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod fit;
pub mod grid;
pub mod kpf2;
pub mod norms;
pub mod plot;
pub mod presets;
pub mod report;
pub mod rng;
pub mod run;
pub mod shells;
pub mod spacetime;
pub mod symbol;

pub use error::{KpError, Result};
pub use field::Field2D;
pub use grid::{Grid2D, ZeroModePolicy};
pub use spacetime::FieldST;
pub use symbol::DispersionParams;
