//! Monte-Carlo check of the pointwise thermodynamic balance.

use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::init::unit_uniform;
use crate::model::{thermo_consistency_residual, ProcessSample, SimParams, Traceless};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSummary {
    pub samples: usize,
    /// Largest relative cancellation residual.
    pub max_residual: f64,
    pub min_entropy: f64,
}

impl ThermoSummary {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual <= tol && self.min_entropy >= 0.0
    }
}

/// Draws `samples` random process states and coefficient sets and evaluates
/// the balance for each.
pub fn thermo_monte_carlo(samples: usize, seed: u64) -> ThermoSummary {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut r = move |scale: f64| scale * unit_uniform(&mut rng);
    let mut out = ThermoSummary {
        samples,
        max_residual: 0.0,
        min_entropy: f64::INFINITY,
    };
    for _ in 0..samples {
        let p = SimParams {
            beta: 1e-3 + r(1.0).abs(),
            gamma: 1e-3 + r(1.0).abs(),
            nu: 1e-3 + r(1.0).abs(),
            lambda: r(2.0).abs(),
            u: r(2.0),
            ..Default::default()
        };
        let s = ProcessSample {
            phi: r(1.5),
            phi_dot: r(10.0),
            v: [r(5.0), r(5.0)],
            h: [r(10.0), r(10.0)],
            d_tilde: Traceless { a: r(5.0), b: r(5.0) },
            grad_mu: [r(10.0), r(10.0)],
        };
        let (res, ent) = thermo_consistency_residual(&s, &p);
        out.max_residual = out.max_residual.max(res.abs());
        out.min_entropy = out.min_entropy.min(ent);
    }
    out
}
