//! Time evolution: linear group, nonlinearity, IF-RK4, Picard iteration and scaling.

pub mod picard;
pub mod propagate;
pub mod scaling;
pub mod stepper;

pub use picard::{picard_solve, PicardOutcome};
pub use propagate::{linear_propagate, nonlinear_term, omega_table, Dealias};
pub use scaling::{badrescal_check, critical_indices, scaling_transform, scaling_transform_onto};
pub use stepper::{
    conserved_diagnostics, evolve, hamiltonian, step, ConservedDiagnostics, SolverConfig, Stepper,
    Trajectory,
};
