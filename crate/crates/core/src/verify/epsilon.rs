//! Convergence of the relaxed problem as ε → 0.

use alloc::format;
use alloc::vec::Vec;

use super::{log_log_slope, trapezoid_sqrt, StudyConfig};
use crate::error::{Error, Result};
use crate::grid::{same_grid, ScalarField, VectorField};
use crate::model::SimParams;
use crate::stepper::{State, Stepper};

/// Snapshots of `(φ, v)` taken every `snapshot_every` steps, plus the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub phi: Vec<ScalarField>,
    pub v: Vec<VectorField>,
}

impl Trajectory {
    /// Advances `state` by `steps` steps, keeping every `every`-th state.
    pub fn record(stepper: &Stepper, mut state: State, steps: usize, every: usize) -> Result<Self> {
        let mut tr = Trajectory {
            times: Vec::new(),
            phi: Vec::new(),
            v: Vec::new(),
        };
        tr.push(&state);
        for n in 1..=steps {
            state = stepper.advance_with(&state, &stepper.params().force)?.0;
            if n % every == 0 || n == steps {
                tr.push(&state);
            }
        }
        Ok(tr)
    }

    fn push(&mut self, s: &State) {
        self.times.push(s.t);
        self.phi.push(s.phi.clone());
        self.v.push(s.v.clone());
    }

    /// `(‖φ−φ'‖_{L²(0,T;L²)}, ‖v−v'‖_{L²(0,T;L²)})` over shared snapshots.
    pub fn distance(&self, other: &Trajectory) -> Result<(f64, f64)> {
        if self.times != other.times {
            return Err(Error::Config("trajectories have different snapshot times".into()));
        }
        let mut sp = Vec::with_capacity(self.times.len());
        let mut sv = Vec::with_capacity(self.times.len());
        for (k, &t) in self.times.iter().enumerate() {
            let dphi = self.phi[k].zip_map(&other.phi[k], |a, b| a - b);
            let mut dv = self.v[k].clone();
            dv.axpy(-1.0, &other.v[k]);
            sp.push((t, dphi.dot(&dphi)));
            sv.push((t, dv.dot(&dv)));
        }
        Ok((trapezoid_sqrt(&sp), trapezoid_sqrt(&sv)))
    }
}

/// One member of the sweep. Initial μ comes from `init_mu0` for the given ε.
pub fn epsilon_member(cfg: &StudyConfig, phi0: &ScalarField, v0: &VectorField, eps: f64) -> Result<Trajectory> {
    same_grid(&phi0.grid, &cfg.grid)?;
    same_grid(&v0.grid, &cfg.grid)?;
    let p = SimParams {
        epsilon: eps,
        ..cfg.base
    };
    let stepper = Stepper::new(cfg.grid, p)?;
    let state = stepper.initial_state(phi0.clone(), v0.clone())?;
    Trajectory::record(&stepper, state, cfg.steps()?, cfg.snapshot_every)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRow {
    pub eps: f64,
    pub phi_diff: f64,
    pub v_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonTable {
    /// Positive ε entries, in list order.
    pub rows: Vec<EpsilonRow>,
    /// Least-squares slope of `ln ‖φ^ε − φ⁰‖` against `ln ε`.
    pub phi_slope: Option<f64>,
    pub v_slope: Option<f64>,
}

impl EpsilonTable {
    /// Fails unless the φ differences strictly decrease along the list.
    pub fn check_monotone(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            if w[1].phi_diff.partial_cmp(&w[0].phi_diff) != Some(core::cmp::Ordering::Less) {
                return Err(Error::Assertion(format!(
                    "‖φ^ε − φ⁰‖ not strictly decreasing: ε = {} gives {:.6e}, ε = {} gives {:.6e}",
                    w[0].eps, w[0].phi_diff, w[1].eps, w[1].phi_diff
                )));
            }
        }
        Ok(())
    }
}

/// Builds the difference table from completed members `(ε, trajectory)`;
/// exactly one member must have ε = 0.
pub fn epsilon_table(members: &[(f64, Trajectory)]) -> Result<EpsilonTable> {
    let reference = members
        .iter()
        .find(|(e, _)| *e == 0.0)
        .map(|(_, t)| t)
        .ok_or_else(|| Error::Config("epsilon sweep needs an ε = 0 member".into()))?;
    let mut rows = Vec::new();
    for (eps, tr) in members.iter().filter(|(e, _)| *e > 0.0) {
        let (phi_diff, v_diff) = tr.distance(reference)?;
        rows.push(EpsilonRow {
            eps: *eps,
            phi_diff,
            v_diff,
        });
    }
    let e: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let dp: Vec<f64> = rows.iter().map(|r| r.phi_diff).collect();
    let dv: Vec<f64> = rows.iter().map(|r| r.v_diff).collect();
    Ok(EpsilonTable {
        phi_slope: log_log_slope(&e, &dp),
        v_slope: log_log_slope(&e, &dv),
        rows,
    })
}

/// Runs every member in sequence, tabulates, and asserts monotonicity.
pub fn epsilon_study(cfg: &StudyConfig, phi0: &ScalarField, v0: &VectorField) -> Result<EpsilonTable> {
    cfg.validate()?;
    cfg.validate_eps_list()?;
    let members = cfg
        .eps_list
        .iter()
        .map(|&e| Ok((e, epsilon_member(cfg, phi0, v0, e)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = epsilon_table(&members)?;
    table.check_monotone()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BcMode, Grid};
    use crate::init::uniform_noise;
    use crate::model::Stabilization;

    fn cfg(n: usize, t_end: f64) -> StudyConfig {
        let p = SimParams {
            kappa: 5e-3,
            stabilization: Stabilization::Constant(0.0),
            ..Default::default()
        };
        StudyConfig {
            t_end,
            ..StudyConfig::new(p, Grid::unit(n, BcMode::Paper))
        }
    }

    #[test]
    fn zero_against_zero_is_zero() {
        let c = cfg(8, 0.02);
        let phi = uniform_noise(c.grid, 0.0, 0.05, 3);
        let v = VectorField::zeros(c.grid);
        let a = epsilon_member(&c, &phi, &v, 0.0).unwrap();
        let b = epsilon_member(&c, &phi, &v, 0.0).unwrap();
        assert_eq!(a.distance(&b).unwrap(), (0.0, 0.0));
        assert_eq!(a.times.len(), 3);
    }

    #[test]
    fn uniform_data_gives_zero_for_every_eps() {
        let c = cfg(8, 0.02);
        let phi = ScalarField::constant(c.grid, 0.3);
        let t = epsilon_study(&c, &phi, &VectorField::zeros(c.grid)).err();
        // All differences vanish, so strict decrease cannot hold.
        assert!(matches!(t, Some(Error::Assertion(_))));
        let members: Vec<_> = c
            .eps_list
            .iter()
            .map(|&e| (e, epsilon_member(&c, &phi, &VectorField::zeros(c.grid), e).unwrap()))
            .collect();
        let t = epsilon_table(&members).unwrap();
        assert!(t.rows.iter().all(|r| r.phi_diff < 1e-14 && r.v_diff < 1e-14), "{t:?}");
    }

    #[test]
    fn spinodal_sweep_decreases() {
        let c = cfg(16, 0.1);
        let phi = uniform_noise(c.grid, 0.0, 0.05, 1);
        let t = epsilon_study(&c, &phi, &VectorField::zeros(c.grid)).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.phi_slope.unwrap() > 0.0, "{t:?}");
    }

    #[test]
    fn table_requires_reference_and_names_offender() {
        let g = Grid::unit(4, BcMode::Paper);
        let tr = |x: f64| Trajectory {
            times: alloc::vec![0.0, 1.0],
            phi: alloc::vec![ScalarField::constant(g, x); 2],
            v: alloc::vec![VectorField::zeros(g); 2],
        };
        assert!(epsilon_table(&[(0.1, tr(1.0))]).is_err());
        let t = epsilon_table(&[(0.1, tr(1.0)), (0.05, tr(2.0)), (0.0, tr(0.0))]).unwrap();
        let msg = format!("{}", t.check_monotone().unwrap_err());
        assert!(msg.contains("0.1") && msg.contains("0.05"), "{msg}");
    }
}
