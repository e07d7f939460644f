//! Wave packets, exact-kernel propagation and observables.

mod grid;
pub mod io;
mod observables;
mod propagate;
mod states;

pub use grid::{Grid2D, WaveField, MIN_POINTS};
pub use observables::{observables, Observables};
pub(crate) use propagate::apply_kernel;
pub use propagate::{
    propagate, propagate_with, Propagation, PropagationOptions, PropagationReport, ESCAPE_FRAME, ESCAPE_THRESHOLD,
};
pub use states::{cat_state, gaussian, CatState1DSpec, GaussianSpec, FIT_SIGMAS};
