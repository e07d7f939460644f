pub mod action;
pub mod calibration;
pub mod classical;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod spectrum;
pub mod stencil;
pub mod verify;
