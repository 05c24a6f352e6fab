//! Verification studies: manufactured solutions, the ε → 0 limit, and
//! continuous dependence on initial data.
//!
//! Each study is split into independent member runs and an aggregation step,
//! so callers with threads can run members concurrently.

pub mod epsilon;
pub mod mms;
pub mod stability;
pub mod thermo;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::SimParams;

pub use epsilon::{epsilon_member, epsilon_study, epsilon_table, EpsilonRow, EpsilonTable, Trajectory};
pub use mms::{
    mms_member, mms_run, mms_table, ConvergenceRow, ConvergenceTable, Manufactured, MmsKind, MmsMember, TrigFamily,
};
pub use stability::{perturbation_stability, perturbed_member, unit_perturbation, GrowthReport, PerturbationRun};
pub use thermo::{thermo_monte_carlo, ThermoSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub base: SimParams,
    /// Grid of the coarsest (spatial MMS) or only level.
    pub grid: Grid,
    pub levels: usize,
    pub refinement: usize,
    pub t_end: f64,
    /// Strictly decreasing, ending in 0.
    pub eps_list: Vec<f64>,
    pub delta: f64,
    /// Snapshot stride for time integrals.
    pub snapshot_every: usize,
}

impl StudyConfig {
    pub fn new(base: SimParams, grid: Grid) -> Self {
        StudyConfig {
            base,
            grid,
            levels: 3,
            refinement: 2,
            t_end: 0.5,
            eps_list: alloc::vec![0.1, 0.05, 0.025, 0.0],
            delta: 1e-4,
            snapshot_every: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.levels < 3 {
            return Err(Error::validation("study.levels", "need at least 3 levels"));
        }
        if self.refinement < 2 {
            return Err(Error::validation("study.refinement", "must be >= 2"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation("time.t_end", "must be finite and > 0"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::validation("study.snapshot_every", "must be >= 1"));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::validation("study.delta", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn validate_eps_list(&self) -> Result<()> {
        let l = &self.eps_list;
        if l.len() < 2 || *l.last().unwrap() != 0.0 {
            return Err(Error::validation(
                "study.eps",
                "list must have >= 2 entries and end in 0",
            ));
        }
        if l.windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Greater))
        {
            return Err(Error::validation("study.eps", "list must be strictly decreasing"));
        }
        if l.iter().any(|&e| !(0.0..1.0).contains(&e)) {
            return Err(Error::validation("study.eps", "entries must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end` with the base time step.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_end, self.base.dt)
    }
}

/// Number of steps of size `dt` that reach `t_end`; fails unless `t_end`
/// is a multiple of `dt`.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let n = libm::round(t_end / dt);
    if (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::Config(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (libm::log(*a), libm::log(*b)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `sqrt(∫ y dt)` by the trapezoid rule over `(t, y)` samples.
pub fn trapezoid_sqrt(samples: &[(f64, f64)]) -> f64 {
    let s: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    libm::sqrt(s.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcMode;

    #[test]
    fn slope_and_trapezoid() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 12.0, 48.0];
        assert!((log_log_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[1.0], &[1.0]), None);
        // ∫₀² t dt = 2
        let s = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        assert!((trapezoid_sqrt(&s) - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let g = Grid::unit(8, BcMode::Paper);
        let mut c = StudyConfig::new(SimParams::default(), g);
        assert!(c.validate().is_ok() && c.validate_eps_list().is_ok());
        c.eps_list = alloc::vec![0.1, 0.1, 0.0];
        assert!(c.validate_eps_list().is_err());
        c.eps_list = alloc::vec![0.1, 0.05];
        assert!(c.validate_eps_list().is_err());
        c.levels = 2;
        assert!(c.validate().is_err());
        assert!(steps_for(0.5, 1e-3).unwrap() == 500);
        assert!(steps_for(0.5, 3e-1).is_err());
    }
}
