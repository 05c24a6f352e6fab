//! External body force and optional source terms.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid, VectorField};

/// Space-time forcing of the momentum balance and, for manufactured
/// solutions, of the two phase-field equations.
pub trait Forcing {
    fn body_force(&self, _grid: &Grid, _x: f64, _y: f64, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Added to the right-hand side of the chemical potential equation.
    fn phi_source(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }

    /// Added to the right-hand side of the transport-diffusion equation.
    fn mu_source(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }

    fn has_sources(&self) -> bool {
        false
    }

    /// Body force on the faces at time `t`.
    fn body_force_field(&self, grid: Grid, t: f64) -> VectorField {
        VectorField::from_fn(grid, |x, y| self.body_force(&grid, x, y, t))
    }
}

/// Configurable analytic body force.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BodyForce {
    #[default]
    Zero,
    Constant {
        fx: f64,
        fy: f64,
    },
    /// `a·cos(ωt)·(sin(2πk y/ly), sin(2πk x/lx))`.
    Trig {
        amplitude: f64,
        wavenumber: f64,
        omega: f64,
    },
}

impl BodyForce {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BodyForce::Zero => true,
            BodyForce::Constant { fx, fy } => fx.is_finite() && fy.is_finite(),
            BodyForce::Trig {
                amplitude,
                wavenumber,
                omega,
            } => amplitude.is_finite() && wavenumber.is_finite() && omega.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation("force", "force parameters must be finite"))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BodyForce::Zero)
    }
}

impl Forcing for BodyForce {
    fn body_force(&self, grid: &Grid, x: f64, y: f64, t: f64) -> [f64; 2] {
        match *self {
            BodyForce::Zero => [0.0, 0.0],
            BodyForce::Constant { fx, fy } => [fx, fy],
            BodyForce::Trig {
                amplitude,
                wavenumber,
                omega,
            } => {
                let a = amplitude * libm::cos(omega * t);
                [
                    a * libm::sin(2.0 * PI * wavenumber * y / grid.ly),
                    a * libm::sin(2.0 * PI * wavenumber * x / grid.lx),
                ]
            }
        }
    }
}

/// Body force sampled on the faces at time `t`.
pub fn sample_body_force(f: &dyn Forcing, grid: Grid, t: f64) -> VectorField {
    f.body_force_field(grid, t)
}
