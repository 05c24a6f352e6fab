//! Per-step scalar diagnostics: mass, energy budget, incompressibility, and
//! running time integrals of the norms that appear in the a priori bounds.

use crate::error::Result;
use crate::forcing::sample_body_force;
use crate::grid::{divergence, gradient, laplacian, vector_laplacian, velocity_grad_sq, ScalarField, VectorField};
use crate::linsolve::Solvers;
use crate::model::{dissipation_rate, material_derivative, total_energy, SimParams};
use crate::stepper::{State, StepReport, Stepper};

/// `∫ φ`.
pub fn mass(phi: &ScalarField) -> f64 {
    phi.sum() * phi.grid.cell_area()
}

pub fn divergence_max(v: &VectorField) -> f64 {
    divergence(v).max_abs()
}

/// `E(next) - E(prev) + dt·D(next) - dt·⟨f(tⁿ⁺¹), vⁿ⁺¹⟩`.
pub fn energy_budget_residual(prev: &State, next: &State, report: &StepReport, p: &SimParams) -> f64 {
    budget_with_rate(prev, next, &report.phi_dot_material, p)
}

/// Same residual evaluated from the two states alone, with `φ̇` rebuilt from
/// their difference.
pub fn energy_budget_residual_from_states(prev: &State, next: &State, p: &SimParams) -> f64 {
    let phi_dot = material_derivative(&next.phi, &prev.phi, &prev.v, p.dt);
    budget_with_rate(prev, next, &phi_dot, p)
}

fn budget_with_rate(prev: &State, next: &State, phi_dot: &ScalarField, p: &SimParams) -> f64 {
    let dt = next.t - prev.t;
    let d = dissipation_rate(next, phi_dot, p);
    let work = if p.force.is_zero() {
        0.0
    } else {
        sample_body_force(&p.force, next.grid(), next.t).dot(&next.v)
    };
    total_energy(next, p) - total_energy(prev, p) + dt * (d - work)
}

/// `‖P Δ v‖²`, the Stokes operator norm, with the Leray projection done by
/// a pressure solve.
pub fn stokes_norm_sq(v: &VectorField, solvers: &Solvers) -> Result<f64> {
    let mut w = vector_laplacian(v);
    let mut div = divergence(&w);
    div.sub_mean();
    let (q, _) = solvers.pressure_poisson(&div.map(|d| -d))?;
    w.axpy(-1.0, &gradient(&q));
    w.enforce_bc();
    Ok(w.dot(&w))
}

/// Rectangle-rule time integrals; the three groups follow the three a priori
/// estimates of the existence theory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulators {
    pub grad_mu_sq: f64,
    pub v_h1_sq: f64,
    pub phi_t_sq: f64,
    pub phi_h2_sq: f64,
    pub mu_h2_sq: f64,
    pub grad_phi_t_sq: f64,
    /// `‖φ‖² + ‖∇Δφ‖²`, an H³ surrogate.
    pub phi_h3_sq: f64,
    pub stokes_v_sq: f64,
    pub v_t_sq: f64,
}

impl Accumulators {
    pub fn values(&self) -> [f64; 9] {
        [
            self.grad_mu_sq,
            self.v_h1_sq,
            self.phi_t_sq,
            self.phi_h2_sq,
            self.mu_h2_sq,
            self.grad_phi_t_sq,
            self.phi_h3_sq,
            self.stokes_v_sq,
            self.v_t_sq,
        ]
    }

    /// Inverse of [`Accumulators::values`].
    pub fn from_values(a: [f64; 9]) -> Self {
        Accumulators {
            grad_mu_sq: a[0],
            v_h1_sq: a[1],
            phi_t_sq: a[2],
            phi_h2_sq: a[3],
            mu_h2_sq: a[4],
            grad_phi_t_sq: a[5],
            phi_h3_sq: a[6],
            stokes_v_sq: a[7],
            v_t_sq: a[8],
        }
    }

    pub fn acc62(&self) -> f64 {
        self.grad_mu_sq + self.v_h1_sq + self.phi_t_sq + self.phi_h2_sq
    }

    pub fn acc63(&self) -> f64 {
        self.mu_h2_sq
    }

    pub fn acc64(&self) -> f64 {
        self.grad_phi_t_sq + self.phi_h3_sq + self.stokes_v_sq + self.v_t_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub budget_residual: f64,
    pub div_max: f64,
    pub l2_v: f64,
    pub h1_phi: f64,
    pub h2_phi: f64,
    pub l2_grad_mu: f64,
    pub acc: Accumulators,
    /// `‖v‖² + ‖φ‖²_{H¹} + ε‖μ‖²`, `ε‖μ‖²_{H¹}`, `‖Δφ‖² + ‖∇v‖²`.
    pub groups: [f64; 3],
}

impl DiagnosticsRecord {
    pub fn acc62(&self) -> f64 {
        self.acc.acc62()
    }

    pub fn acc63(&self) -> f64 {
        self.acc.acc63()
    }

    pub fn acc64(&self) -> f64 {
        self.acc.acc64()
    }

    pub fn is_finite(&self) -> bool {
        let scalars = [
            self.t,
            self.mass,
            self.energy,
            self.dissipation,
            self.budget_residual,
            self.div_max,
            self.l2_v,
            self.h1_phi,
            self.h2_phi,
            self.l2_grad_mu,
        ];
        scalars
            .iter()
            .chain(&self.acc.values())
            .chain(&self.groups)
            .all(|x| x.is_finite())
    }
}

fn instantaneous(state: &State, p: &SimParams) -> DiagnosticsRecord {
    let pn = state.phi.norms();
    let gm = gradient(&state.mu);
    let gm2 = gm.dot(&gm);
    let mu2 = state.mu.dot(&state.mu);
    let lap = laplacian(&state.phi);
    let v2 = state.v.dot(&state.v);
    DiagnosticsRecord {
        t: state.t,
        mass: mass(&state.phi),
        energy: total_energy(state, p),
        div_max: divergence_max(&state.v),
        l2_v: libm::sqrt(v2),
        h1_phi: pn.h1,
        h2_phi: pn.h2,
        l2_grad_mu: libm::sqrt(gm2),
        groups: [
            v2 + pn.h1 * pn.h1 + p.epsilon * mu2,
            p.epsilon * (mu2 + gm2),
            lap.dot(&lap) + velocity_grad_sq(&state.v),
        ],
        ..Default::default()
    }
}

/// Record for the initial state: no dissipation, no budget, empty integrals.
pub fn record_initial(stepper: &Stepper, state: &State) -> DiagnosticsRecord {
    instantaneous(state, stepper.params())
}

/// Record for a completed step; updates `acc` in place.
pub fn record_step(
    stepper: &Stepper,
    prev: &State,
    next: &State,
    report: &StepReport,
    acc: &mut Accumulators,
) -> Result<DiagnosticsRecord> {
    let p = stepper.params();
    let dt = next.t - prev.t;
    let mut rec = instantaneous(next, p);
    rec.dissipation = dissipation_rate(next, &report.phi_dot_material, p);
    rec.budget_residual = energy_budget_residual(prev, next, report, p);

    let phi_t = next.phi.zip_map(&prev.phi, |a, b| (a - b) / dt);
    let mut v_t = next.v.clone();
    v_t.axpy(-1.0, &prev.v);
    v_t.scale(1.0 / dt);
    let gpt = gradient(&phi_t);
    let pn = next.phi.norms();
    let mn = next.mu.norms();
    let vn = next.v.norms();
    let grad_lap = gradient(&laplacian(&next.phi));
    let phi2 = next.phi.dot(&next.phi);

    acc.grad_mu_sq += dt * rec.l2_grad_mu * rec.l2_grad_mu;
    acc.v_h1_sq += dt * vn.h1 * vn.h1;
    acc.phi_t_sq += dt * phi_t.dot(&phi_t);
    acc.phi_h2_sq += dt * pn.h2 * pn.h2;
    acc.mu_h2_sq += dt * mn.h2 * mn.h2;
    acc.grad_phi_t_sq += dt * gpt.dot(&gpt);
    acc.phi_h3_sq += dt * (phi2 + grad_lap.dot(&grad_lap));
    acc.stokes_v_sq += dt * stokes_norm_sq(&next.v, stepper.solvers())?;
    acc.v_t_sq += dt * v_t.dot(&v_t);
    rec.acc = *acc;
    Ok(rec)
}

/// Outcome of the a priori boundedness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorVerdict {
    pub bounded: bool,
    pub ceiling: f64,
    /// Supremum in time of each instantaneous group.
    pub sup_groups: [f64; 3],
    pub accumulators: Accumulators,
    /// Largest monitored quantity seen.
    pub max_quantity: f64,
    /// Time of the first record that was non-finite or above the ceiling.
    pub first_failure: Option<f64>,
    pub records: usize,
}

/// Streaming consumer of diagnostics records.
#[derive(Debug, Clone)]
pub struct AprioriMonitor {
    ceiling: f64,
    sup_groups: [f64; 3],
    acc: Accumulators,
    max_quantity: f64,
    first_failure: Option<f64>,
    records: usize,
}

impl AprioriMonitor {
    pub const DEFAULT_CEILING: f64 = 1e6;

    pub fn new(ceiling: f64) -> Self {
        AprioriMonitor {
            ceiling,
            sup_groups: [0.0; 3],
            acc: Accumulators::default(),
            max_quantity: 0.0,
            first_failure: None,
            records: 0,
        }
    }

    pub fn push(&mut self, rec: &DiagnosticsRecord) {
        self.records += 1;
        let mut ok = rec.is_finite();
        for (s, g) in self.sup_groups.iter_mut().zip(&rec.groups) {
            *s = s.max(*g);
        }
        for q in rec.groups.iter().chain(&rec.acc.values()) {
            self.max_quantity = self.max_quantity.max(*q);
            if *q > self.ceiling {
                ok = false;
            }
        }
        if rec.acc.is_finite_all() {
            self.acc = rec.acc;
        }
        if !ok && self.first_failure.is_none() {
            self.first_failure = Some(rec.t);
        }
    }

    pub fn verdict(&self) -> MonitorVerdict {
        MonitorVerdict {
            bounded: self.first_failure.is_none(),
            ceiling: self.ceiling,
            sup_groups: self.sup_groups,
            accumulators: self.acc,
            max_quantity: self.max_quantity,
            first_failure: self.first_failure,
            records: self.records,
        }
    }
}

impl Default for AprioriMonitor {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CEILING)
    }
}

impl Accumulators {
    fn is_finite_all(&self) -> bool {
        self.values().iter().all(|x| x.is_finite())
    }
}

/// Runs the monitor over a finished record stream.
pub fn apriori_monitor<'a>(records: impl IntoIterator<Item = &'a DiagnosticsRecord>, ceiling: f64) -> MonitorVerdict {
    let mut m = AprioriMonitor::new(ceiling);
    records.into_iter().for_each(|r| m.push(r));
    m.verdict()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BcMode, Grid};
    use crate::init::uniform_noise;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    #[test]
    fn mass_and_divergence_examples() {
        let g = Grid::unit(8, BcMode::Paper);
        assert_eq!(mass(&ScalarField::zeros(g)), 0.0);
        assert!((mass(&ScalarField::constant(g, 0.3)) - 0.3).abs() < 1e-15);
        assert_eq!(divergence_max(&VectorField::zeros(g)), 0.0);
        let gp = Grid::unit(16, BcMode::Periodic);
        let shear = VectorField::from_fn(gp, |_, y| [libm::sin(2.0 * PI * y), 0.0]);
        assert!(divergence_max(&shear) < 1e-14);
        let f = ScalarField::from_fn(gp, |x, _| libm::cos(2.0 * PI * x));
        assert!(divergence_max(&gradient(&f)) > 1.0);
    }

    #[test]
    fn stationary_run_has_zero_integrals() {
        let g = Grid::unit(16, BcMode::Paper);
        let st = Stepper::new(g, SimParams::default()).unwrap();
        let s0 = st
            .initial_state(ScalarField::constant(g, -0.2), VectorField::zeros(g))
            .unwrap();
        let mut acc = Accumulators::default();
        let mut recs = Vec::new();
        let s = st.run(s0.clone(), 5, &mut acc, |_, r| recs.push(*r)).unwrap();
        assert_eq!(s.phi, s0.phi);
        let e0 = record_initial(&st, &s0);
        for r in &recs {
            assert!(r.budget_residual.abs() < 1e-14);
            assert_eq!(r.dissipation, 0.0);
            assert_eq!(r.groups, e0.groups);
            assert_eq!(r.mass, e0.mass);
            assert_eq!(r.acc.grad_mu_sq, 0.0);
            assert_eq!(r.acc.phi_t_sq, 0.0);
            assert_eq!(r.acc.v_t_sq, 0.0);
            assert_eq!(r.acc.stokes_v_sq, 0.0);
        }
        // the norm integrals of a nonzero constant state grow linearly
        assert!(recs[4].acc.phi_h2_sq > recs[0].acc.phi_h2_sq);
        let v = apriori_monitor(&recs, AprioriMonitor::DEFAULT_CEILING);
        assert!(v.bounded && v.first_failure.is_none());
    }

    #[test]
    fn spinodal_energy_decreases_within_budget() {
        let g = Grid::unit(32, BcMode::Paper);
        let st = Stepper::new(g, SimParams::default()).unwrap();
        let s0 = st
            .initial_state(uniform_noise(g, 0.0, 0.05, 11), VectorField::zeros(g))
            .unwrap();
        let mut acc = Accumulators::default();
        let mut prev = record_initial(&st, &s0);
        let mut last = acc;
        st.run(s0, 40, &mut acc, |_, r| {
            assert!(r.energy <= prev.energy + r.budget_residual.abs() + 1e-15);
            for (a, b) in r.acc.values().iter().zip(&last.values()) {
                assert!(a >= b);
            }
            last = r.acc;
            prev = *r;
        })
        .unwrap();
    }

    #[test]
    fn stokes_norm_of_gradient_is_zero() {
        // Δ∇q = ∇Δq is a gradient, so its projection vanishes
        let g = Grid::unit(16, BcMode::Periodic);
        let solvers = Solvers::new(g, Default::default()).unwrap();
        let q = ScalarField::from_fn(g, |x, y| libm::cos(2.0 * PI * x) * libm::sin(4.0 * PI * y));
        assert!(stokes_norm_sq(&gradient(&q), &solvers).unwrap() < 1e-16);
        let shear = VectorField::from_fn(g, |_, y| [libm::sin(2.0 * PI * y), 0.0]);
        let lap = vector_laplacian(&shear);
        let want = lap.dot(&lap);
        assert!((stokes_norm_sq(&shear, &solvers).unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn monitor_flags_nan_and_ceiling() {
        let mut recs = [DiagnosticsRecord::default(); 4];
        for (k, r) in recs.iter_mut().enumerate() {
            r.t = k as f64;
            r.groups = [1.0, 0.0, 2.0];
        }
        recs[2].energy = f64::NAN;
        let v = apriori_monitor(&recs, 1e6);
        assert!(!v.bounded);
        assert_eq!(v.first_failure, Some(2.0));
        recs[2].energy = 0.0;
        recs[3].acc.v_t_sq = 2e6;
        let v = apriori_monitor(&recs, 1e6);
        assert_eq!(v.first_failure, Some(3.0));
        assert_eq!(v.sup_groups, [1.0, 0.0, 2.0]);
    }
}
