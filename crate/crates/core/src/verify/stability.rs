//! Continuous dependence on initial data: growth of the difference between a
//! base run and a perturbed one.

use alloc::vec::Vec;

use super::epsilon::Trajectory;
use super::StudyConfig;
use crate::error::{Error, Result};
use crate::grid::{same_grid, ScalarField, VectorField};
use crate::init::uniform_noise;
use crate::stepper::Stepper;

/// Allowed excess of the second-half growth rate over the fitted one, as a
/// fraction of `|ĥ|`.
pub const ENVELOPE_MARGIN: f64 = 0.5;
/// Allowed relative change of `ĥ` when δ halves.
pub const RATE_TOLERANCE: f64 = 0.5;
/// Accepted band for `r_δ(T) / r_{δ/2}(T)`.
pub const RATIO_BAND: (f64, f64) = (3.0, 5.0);

/// Mean-zero noise with unit L² norm.
pub fn unit_perturbation(grid: crate::grid::Grid, seed: u64) -> ScalarField {
    let mut eta = uniform_noise(grid, 0.0, 1.0, seed);
    let n = eta.l2();
    eta.data.iter_mut().for_each(|x| *x /= n);
    eta
}

/// Trajectory started from `φ₀ + δη`.
pub fn perturbed_member(
    cfg: &StudyConfig,
    phi0: &ScalarField,
    v0: &VectorField,
    eta: &ScalarField,
    delta: f64,
) -> Result<Trajectory> {
    same_grid(&phi0.grid, &cfg.grid)?;
    same_grid(&eta.grid, &cfg.grid)?;
    let stepper = Stepper::new(cfg.grid, cfg.base)?;
    let phi = phi0.zip_map(eta, |a, b| a + delta * b);
    let state = stepper.initial_state(phi, v0.clone())?;
    Trajectory::record(&stepper, state, cfg.steps()?, cfg.snapshot_every)
}

/// `r(t) = ‖φ₁−φ₂‖² + ‖v₁−v₂‖²` at the snapshots of one perturbed run.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRun {
    pub delta: f64,
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    /// Largest log-growth rate of `r` between snapshots in the first half.
    pub h_hat: f64,
    /// Time of the first second-half snapshot above the envelope.
    pub envelope_violation: Option<f64>,
}

impl PerturbationRun {
    pub fn new(delta: f64, base: &Trajectory, pert: &Trajectory) -> Result<Self> {
        if base.times != pert.times {
            return Err(Error::Config("trajectories have different snapshot times".into()));
        }
        let r: Vec<f64> = (0..base.times.len())
            .map(|k| {
                let dphi = base.phi[k].zip_map(&pert.phi[k], |a, b| a - b);
                let mut dv = base.v[k].clone();
                dv.axpy(-1.0, &pert.v[k]);
                dphi.dot(&dphi) + dv.dot(&dv)
            })
            .collect();
        let times = base.times.clone();
        let half = times.len() / 2;
        let h_hat = (0..half)
            .filter(|&k| r[k] > 0.0 && r[k + 1] > 0.0)
            .map(|k| libm::log(r[k + 1] / r[k]) / (times[k + 1] - times[k]))
            .fold(f64::NEG_INFINITY, f64::max);
        let h_hat = if h_hat.is_finite() { h_hat } else { 0.0 };
        let h_plus = h_hat + ENVELOPE_MARGIN * h_hat.abs();
        let envelope_violation = (half + 1..times.len())
            .find(|&k| r[k] > r[half] * libm::exp(h_plus * (times[k] - times[half])) * (1.0 + 1e-12))
            .map(|k| times[k]);
        Ok(PerturbationRun {
            delta,
            times,
            r,
            h_hat,
            envelope_violation,
        })
    }

    pub fn r_final(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    /// True if `r` never increases between snapshots.
    pub fn nonincreasing(&self) -> bool {
        self.r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// Runs at δ and δ/2.
    pub runs: [PerturbationRun; 2],
    /// `r_δ(T) / r_{δ/2}(T)`.
    pub ratio: f64,
    pub ratio_ok: bool,
    pub rate_stable: bool,
    pub within_envelope: bool,
}

impl GrowthReport {
    pub fn new(coarse: PerturbationRun, fine: PerturbationRun) -> Self {
        let ratio = coarse.r_final() / fine.r_final();
        let ratio_ok = (RATIO_BAND.0..=RATIO_BAND.1).contains(&ratio);
        let (a, b) = (coarse.h_hat, fine.h_hat);
        let rate_stable = (a - b).abs() <= RATE_TOLERANCE * a.abs().max(b.abs()) + 1e-12;
        let within_envelope = coarse.envelope_violation.is_none() && fine.envelope_violation.is_none();
        GrowthReport {
            runs: [coarse, fine],
            ratio,
            ratio_ok,
            rate_stable,
            within_envelope,
        }
    }

    pub fn passed(&self) -> bool {
        self.ratio_ok && self.rate_stable && self.within_envelope
    }
}

/// Runs the base trajectory and the δ, δ/2 perturbations in sequence.
pub fn perturbation_stability(
    cfg: &StudyConfig,
    phi0: &ScalarField,
    v0: &VectorField,
    eta: &ScalarField,
) -> Result<GrowthReport> {
    cfg.validate()?;
    let base = perturbed_member(cfg, phi0, v0, eta, 0.0)?;
    let runs = [cfg.delta, 0.5 * cfg.delta]
        .iter()
        .map(|&d| PerturbationRun::new(d, &base, &perturbed_member(cfg, phi0, v0, eta, d)?))
        .collect::<Result<Vec<_>>>()?;
    let [a, b]: [PerturbationRun; 2] = runs.try_into().unwrap();
    Ok(GrowthReport::new(a, b))
}
