//! Numerical core for an isothermal binary mixture of incompressible fluids.
//!
//! The model couples a Navier-Stokes equation for the mean velocity with a
//! viscous Cahn-Hilliard equation whose chemical potential depends on the
//! velocity magnitude. The velocity dependence requires an extra constitutive
//! body force `λ φ φ̇ v` in the momentum balance; without it the dissipation
//! inequality fails.
//!
//! Everything here is `no_std` + `alloc`: fields live on a MAC staggered grid,
//! linear solves are preconditioned conjugate gradients, and time stepping is
//! first-order semi-implicit with a pressure projection. File formats and the
//! command line live in the companion `binmix` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod grid;
pub mod init;
pub mod linsolve;
pub mod model;
mod spectral;
pub mod stepper;
pub mod verify;

pub use diagnostics::{AprioriMonitor, DiagnosticsRecord, MonitorVerdict};
pub use error::{Error, Result};
pub use forcing::{BodyForce, Forcing};
pub use grid::{BcMode, Grid, Norms, ScalarField, VectorField};
pub use linsolve::{NullspaceFix, Preconditioner, SolverConfig};
pub use model::{ProcessSample, SimParams, Stabilization};
pub use stepper::{State, StepReport, Stepper};
