//! First-order semi-implicit time stepping with a pressure projection.
//!
//! Each step solves the linear φ–μ system (implicit diffusion terms, lagged
//! potential and transport, stabilized by `S(φⁿ⁺¹ - φⁿ)`), then a viscous
//! predictor for the velocity followed by a projection onto discretely
//! solenoidal fields.

use alloc::vec::Vec;

use crate::diagnostics::{self, Accumulators, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::forcing::{sample_body_force, Forcing};
use crate::grid::{convect, divergence, gradient, laplacian, Grid, ScalarField, VectorField};
use crate::linsolve::{SolveStats, Solvers};
use crate::model::{capillary_force, constitutive_force, local_potential_field, material_derivative, SimParams};

/// Magnitude beyond which a field is declared blown up.
pub const BLOWUP_LIMIT: f64 = 1e8;
/// Advective limit `dt ≤ CFL_NUMBER · h / max|v|`.
pub const CFL_NUMBER: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub phi: ScalarField,
    pub v: VectorField,
    /// Mean-zero pressure.
    pub p: ScalarField,
    pub mu: ScalarField,
    pub t: f64,
}

impl State {
    pub fn grid(&self) -> Grid {
        self.phi.grid
    }

    /// Returns the name and size of the first field that is non-finite or
    /// exceeds [`BLOWUP_LIMIT`].
    pub fn blowup(&self) -> Option<(&'static str, f64)> {
        let fields: [(&'static str, f64, bool); 4] = [
            ("phi", self.phi.max_abs(), self.phi.is_finite()),
            ("v", self.v.max_abs(), self.v.is_finite()),
            ("mu", self.mu.max_abs(), self.mu.is_finite()),
            ("p", self.p.max_abs(), self.p.is_finite()),
        ];
        fields
            .into_iter()
            .find(|&(_, m, finite)| !finite || m > BLOWUP_LIMIT)
            .map(|(n, m, finite)| (n, if finite { m } else { f64::NAN }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// `(φⁿ⁺¹ - φⁿ)/dt + vⁿ·∇φⁿ`.
    pub phi_dot_material: ScalarField,
    pub stabilization: f64,
    pub phi_mu: SolveStats,
    pub velocity: [SolveStats; 2],
    pub pressure: SolveStats,
}

#[derive(Debug, Clone)]
pub struct Stepper {
    params: SimParams,
    solvers: Solvers,
}

impl Stepper {
    pub fn new(grid: Grid, params: SimParams) -> Result<Self> {
        params.validate()?;
        Ok(Stepper {
            params,
            solvers: Solvers::new(grid, params.solver)?,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn grid(&self) -> Grid {
        *self.solvers.grid()
    }

    pub fn solvers(&self) -> &Solvers {
        &self.solvers
    }

    /// `μ₀` from `(I - βγΔ)μ₀ = -κΔφ₀ + φ₀³ + uφ₀ + λ|v₀|²φ₀`.
    pub fn init_mu0(&self, phi0: &ScalarField, v0: &VectorField) -> Result<ScalarField> {
        let p = &self.params;
        let lap = laplacian(phi0);
        let loc = local_potential_field(phi0, v0, p);
        let rhs = lap.zip_map(&loc, |l, m| -p.kappa * l + m);
        self.solvers
            .helmholtz(1.0, p.beta * p.gamma, &rhs, Some(&rhs))
            .map(|(x, _)| x)
    }

    /// State at `t = 0` with `μ = μ₀` and zero pressure.
    pub fn initial_state(&self, phi0: ScalarField, v0: VectorField) -> Result<State> {
        if phi0.grid != self.grid() || v0.grid != self.grid() {
            return Err(Error::GridMismatch("initial data grid differs from stepper grid"));
        }
        let mu = self.init_mu0(&phi0, &v0)?;
        let g = self.grid();
        Ok(State {
            phi: phi0,
            v: v0,
            p: ScalarField::zeros(g),
            mu,
            t: 0.0,
        })
    }

    pub fn check_cfl(&self, v: &VectorField) -> Result<()> {
        let g = self.grid();
        let h = g.dx().min(g.dy());
        let limit = CFL_NUMBER * h / v.max_abs().max(1e-12);
        if self.params.dt > limit {
            return Err(Error::Cfl {
                dt: self.params.dt,
                limit,
            });
        }
        Ok(())
    }

    /// Coupled φ–μ update.
    ///
    /// With `M = β/dt + S` and `L = -Δ` the two equations read
    /// `(M + κL)φ - μ = r₁` and `(ε/dt + γL)μ + φ/dt = r₂`. Substituting μ from
    /// the first into the second gives one SPD fourth-order system for φ that
    /// is valid for every `ε ≥ 0`; μ then follows explicitly.
    pub fn step_phi_mu(&self, state: &State, forcing: &dyn Forcing) -> Result<(ScalarField, ScalarField, StepReport)> {
        let p = &self.params;
        let (dt, eps) = (p.dt, p.epsilon);
        let g = self.grid();
        let s = p.stabilization_for(&state.phi);
        let m = p.beta / dt + s;
        let transport = crate::grid::advect(&state.v, &state.phi);
        let pot = local_potential_field(&state.phi, &state.v, p);

        let mut r1 = ScalarField::zeros(g);
        let mut r2 = ScalarField::zeros(g);
        for k in 0..g.cells() {
            r1.data[k] = m * state.phi.data[k] - p.beta * transport.data[k] - pot.data[k];
            r2.data[k] = eps / dt * state.mu.data[k] + state.phi.data[k] / dt - transport.data[k];
        }
        if forcing.has_sources() {
            let t1 = state.t + dt;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let (x, y) = g.center(i, j);
                    r1.data[j * g.nx + i] += forcing.phi_source(x, y, t1);
                    r2.data[j * g.nx + i] += forcing.mu_source(x, y, t1);
                }
            }
        }

        let lr1 = laplacian(&r1);
        let mut rhs = r2;
        for k in 0..g.cells() {
            rhs.data[k] += eps / dt * r1.data[k] - p.gamma * lr1.data[k];
        }
        let coeffs = [
            1.0 / dt + eps * m / dt,
            eps * p.kappa / dt + p.gamma * m,
            p.gamma * p.kappa,
        ];
        let (phi_new, stats) = self.solvers.solve_poly(coeffs, &rhs, Some(&state.phi))?;

        let lphi = laplacian(&phi_new);
        let mut mu_new = ScalarField::zeros(g);
        for k in 0..g.cells() {
            mu_new.data[k] = m * phi_new.data[k] - p.kappa * lphi.data[k] - r1.data[k];
        }
        let phi_dot_material = material_derivative(&phi_new, &state.phi, &state.v, dt);
        let report = StepReport {
            phi_dot_material,
            stabilization: s,
            phi_mu: stats,
            velocity: [SolveStats::default(); 2],
            pressure: SolveStats::default(),
        };
        Ok((phi_new, mu_new, report))
    }

    /// Viscous predictor and projection. Fills the velocity and pressure
    /// solver statistics of `report`.
    pub fn step_momentum(
        &self,
        state: &State,
        phi_new: &ScalarField,
        report: &mut StepReport,
        forcing: &dyn Forcing,
    ) -> Result<(VectorField, ScalarField)> {
        let p = &self.params;
        let dt = p.dt;
        let g = self.grid();

        let mut rhs = state.v.clone();
        rhs.scale(1.0 / dt);
        rhs.axpy(-1.0, &convect(&state.v));
        rhs.axpy(1.0, &capillary_force(phi_new, p));
        rhs.axpy(1.0, &constitutive_force(phi_new, &report.phi_dot_material, &state.v, p));
        rhs.axpy(1.0, &sample_body_force(forcing, g, state.t + dt));
        rhs.enforce_bc();

        let (vstar, vstats) = self.solvers.velocity_helmholtz(1.0 / dt, p.nu, &rhs, Some(&state.v))?;
        let mut div = divergence(&vstar);
        div.sub_mean();
        let prhs = div.map(|d| -d / dt);
        let (pressure, pstats) = self.solvers.pressure_poisson(&prhs)?;
        let mut v_new = vstar;
        v_new.axpy(-dt, &gradient(&pressure));
        v_new.enforce_bc();
        report.velocity = vstats;
        report.pressure = pstats;
        Ok((v_new, pressure))
    }

    /// One step with an arbitrary forcing.
    pub fn advance_with(&self, state: &State, forcing: &dyn Forcing) -> Result<(State, StepReport)> {
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch("state grid differs from stepper grid"));
        }
        self.check_cfl(&state.v)?;
        let (phi, mu, mut report) = self.step_phi_mu(state, forcing)?;
        let (v, p) = self.step_momentum(state, &phi, &mut report, forcing)?;
        let next = State {
            phi,
            v,
            p,
            mu,
            t: state.t + self.params.dt,
        };
        if let Some((field, value)) = next.blowup() {
            return Err(Error::BlowUp {
                field,
                time: next.t,
                value,
            });
        }
        Ok((next, report))
    }

    /// One step with the configured body force, plus its diagnostics.
    pub fn advance(&self, state: &State, acc: &mut Accumulators) -> Result<(State, DiagnosticsRecord)> {
        let (next, report) = self.advance_with(state, &self.params.force)?;
        let rec = diagnostics::record_step(self, state, &next, &report, acc)?;
        Ok((next, rec))
    }

    /// Advances `steps` times, calling `observe` after each step.
    pub fn run(
        &self,
        mut state: State,
        steps: usize,
        acc: &mut Accumulators,
        mut observe: impl FnMut(&State, &DiagnosticsRecord),
    ) -> Result<State> {
        for _ in 0..steps {
            let (next, rec) = self.advance(&state, acc)?;
            observe(&next, &rec);
            state = next;
        }
        Ok(state)
    }

    /// Snapshots of φ after every step, forcing given by the parameters.
    pub fn trajectory(&self, mut state: State, steps: usize) -> Result<Vec<State>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(state.clone());
        for _ in 0..steps {
            state = self.advance_with(&state, &self.params.force)?.0;
            out.push(state.clone());
        }
        Ok(out)
    }
}
