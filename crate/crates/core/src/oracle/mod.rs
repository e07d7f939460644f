//! Independent reference computations used by tests and calibration:
//! exact 1D kernels, a finite-difference Hamiltonian with an iterative
//! eigensolver, implicit time stepping, direct Lagrangian quadrature and
//! time-sliced kernel composition.

mod calibrate;
mod compose;
mod crank_nicolson;
mod eigen;
mod hamiltonian;
mod lagrangian;
mod mehler;

pub use calibrate::{
    calibrate_spectrum, default_calibration_configs, CalibrationReport, CandidateResiduals, ConfigSpectrum, Timestamps,
    CALIBRATION_LEVELS, CALIBRATION_POINTS, CALIBRATION_SPAN, CALIBRATION_TOLERANCE,
};
pub use compose::{composed_short_time_kernel, CompositionGrid};
pub use crank_nicolson::{evolve_reference, evolve_reference_with, MAX_STEP_TIMES_OMEGA};
pub use eigen::{
    eigensolve, eigensolve_with, lowest, oscillator_length, resolved_grid, EigenOptions, Eigenpairs, MAX_ITERATIONS,
    POINTS_PER_LENGTH,
};
pub use hamiltonian::SparseHamiltonian;
pub use lagrangian::{lagrangian, lagrangian_action, ActionQuadrature};
pub use mehler::{free_kernel, mehler_kernel};
