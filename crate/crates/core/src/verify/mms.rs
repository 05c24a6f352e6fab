//! Manufactured-solution convergence studies on periodic grids.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec::Vec;

use super::{steps_for, StudyConfig};
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::grid::{BcMode, Grid, ScalarField, VectorField};
use crate::model::SimParams;
use crate::stepper::{State, Stepper};

/// Closed-form fields plus the sources that make them exact solutions.
pub trait Manufactured: Sync {
    fn phi(&self, x: f64, y: f64, t: f64) -> f64;
    fn mu(&self, x: f64, y: f64, t: f64) -> f64;
    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    /// `(g_φ, g_μ)`: residuals of the chemical potential and transport
    /// equations evaluated on the exact fields.
    fn scalar_sources(&self, x: f64, y: f64, t: f64, p: &SimParams) -> (f64, f64);
    /// Momentum residual; gradient parts are harmless (the projection removes
    /// them).
    fn body_force(&self, x: f64, y: f64, t: f64, p: &SimParams) -> [f64; 2];
}

/// Trigonometric family on a periodic rectangle:
/// `φ = φ̄ + a_φ τ cos kx cos ky`, `μ = a_μ τ sin kx cos ky`, and a velocity
/// from the stream function `(a_v τ / k) sin kx sin ky`, with
/// `τ(t) = 1 + b sin ωt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigFamily {
    pub lx: f64,
    pub ly: f64,
    pub mode: f64,
    pub phi_bar: f64,
    pub a_phi: f64,
    pub a_mu: f64,
    pub a_v: f64,
    pub b: f64,
    pub omega: f64,
}

impl TrigFamily {
    /// Steady member on the given domain.
    pub fn steady(lx: f64, ly: f64) -> Self {
        TrigFamily {
            lx,
            ly,
            mode: 1.0,
            phi_bar: 0.1,
            a_phi: 0.5,
            a_mu: 0.3,
            a_v: 0.2,
            b: 0.0,
            omega: 0.0,
        }
    }

    /// Time-dependent member.
    pub fn unsteady(lx: f64, ly: f64) -> Self {
        TrigFamily {
            a_v: 1.0,
            b: 0.5,
            omega: 2.0 * PI,
            ..Self::steady(lx, ly)
        }
    }

    fn wave(&self) -> (f64, f64, f64) {
        let kx = 2.0 * PI * self.mode / self.lx;
        let ky = 2.0 * PI * self.mode / self.ly;
        (kx, ky, libm::hypot(kx, ky))
    }

    fn tau(&self, t: f64) -> (f64, f64) {
        (
            1.0 + self.b * libm::sin(self.omega * t),
            self.b * self.omega * libm::cos(self.omega * t),
        )
    }

    /// φ, φ_t, ∇φ, Δφ.
    fn phi_parts(&self, x: f64, y: f64, t: f64) -> (f64, f64, [f64; 2], f64) {
        let (kx, ky, _) = self.wave();
        let (tau, dtau) = self.tau(t);
        let (cx, sx) = (libm::cos(kx * x), libm::sin(kx * x));
        let (cy, sy) = (libm::cos(ky * y), libm::sin(ky * y));
        let a = self.a_phi;
        (
            self.phi_bar + a * tau * cx * cy,
            a * dtau * cx * cy,
            [-a * tau * kx * sx * cy, -a * tau * ky * cx * sy],
            -(kx * kx + ky * ky) * a * tau * cx * cy,
        )
    }

    /// v, v_t, ∇u, ∇v (velocity components).
    fn vel_parts(&self, x: f64, y: f64, t: f64) -> ([f64; 2], [f64; 2], [f64; 2], [f64; 2]) {
        let (kx, ky, k) = self.wave();
        let (tau, dtau) = self.tau(t);
        let (cx, sx) = (libm::cos(kx * x), libm::sin(kx * x));
        let (cy, sy) = (libm::cos(ky * y), libm::sin(ky * y));
        let (au, av) = (self.a_v * ky / k, self.a_v * kx / k);
        (
            [au * tau * sx * cy, -av * tau * cx * sy],
            [au * dtau * sx * cy, -av * dtau * cx * sy],
            [au * tau * kx * cx * cy, -au * tau * ky * sx * sy],
            [av * tau * kx * sx * sy, -av * tau * ky * cx * cy],
        )
    }
}

impl Manufactured for TrigFamily {
    fn phi(&self, x: f64, y: f64, t: f64) -> f64 {
        self.phi_parts(x, y, t).0
    }

    fn mu(&self, x: f64, y: f64, t: f64) -> f64 {
        let (kx, ky, _) = self.wave();
        self.a_mu * self.tau(t).0 * libm::sin(kx * x) * libm::cos(ky * y)
    }

    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.vel_parts(x, y, t).0
    }

    fn scalar_sources(&self, x: f64, y: f64, t: f64, p: &SimParams) -> (f64, f64) {
        let (kx, ky, _) = self.wave();
        let (phi, phi_t, gphi, lphi) = self.phi_parts(x, y, t);
        let (w, ..) = self.vel_parts(x, y, t);
        let mu = self.mu(x, y, t);
        let mu_t = self.a_mu * self.tau(t).1 * libm::sin(kx * x) * libm::cos(ky * y);
        let lmu = -(kx * kx + ky * ky) * mu;
        let phi_dot = phi_t + w[0] * gphi[0] + w[1] * gphi[1];
        let v2 = w[0] * w[0] + w[1] * w[1];
        let g_phi = p.beta * phi_dot - p.kappa * lphi + phi * phi * phi + p.u * phi + p.lambda * v2 * phi - mu;
        let g_mu = p.epsilon * mu_t - p.gamma * lmu + phi_dot;
        (g_phi, g_mu)
    }

    fn body_force(&self, x: f64, y: f64, t: f64, p: &SimParams) -> [f64; 2] {
        let (_, _, k) = self.wave();
        let (phi, phi_t, gphi, lphi) = self.phi_parts(x, y, t);
        let (w, w_t, gu, gv) = self.vel_parts(x, y, t);
        let phi_dot = phi_t + w[0] * gphi[0] + w[1] * gphi[1];
        let conv = [w[0] * gu[0] + w[1] * gu[1], w[0] * gv[0] + w[1] * gv[1]];
        let mut f = [0.0; 2];
        for c in 0..2 {
            let lap = -k * k * w[c];
            f[c] = w_t[c] + conv[c] - p.nu * lap + p.kappa * lphi * gphi[c] - p.lambda * phi * phi_dot * w[c];
        }
        f
    }
}

/// Adapts a manufactured family to the stepper's forcing interface.
struct MmsForcing<'a> {
    m: &'a dyn Manufactured,
    p: SimParams,
}

impl Forcing for MmsForcing<'_> {
    fn body_force(&self, _grid: &Grid, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.m.body_force(x, y, t, &self.p)
    }

    fn phi_source(&self, x: f64, y: f64, t: f64) -> f64 {
        self.m.scalar_sources(x, y, t, &self.p).0
    }

    fn mu_source(&self, x: f64, y: f64, t: f64) -> f64 {
        self.m.scalar_sources(x, y, t, &self.p).1
    }

    fn has_sources(&self) -> bool {
        true
    }
}

/// Rejects manufactured velocities that are not solenoidal, using central
/// differences on a sample lattice.
pub fn check_solenoidal(m: &dyn Manufactured, grid: &Grid, t_end: f64) -> Result<()> {
    let h = 1e-5 * grid.lx.min(grid.ly);
    for t in [0.0, 0.5 * t_end, t_end] {
        for j in 0..16 {
            for i in 0..16 {
                let x = (i as f64 + 0.37) * grid.lx / 16.0;
                let y = (j as f64 + 0.61) * grid.ly / 16.0;
                let ux = (m.velocity(x + h, y, t)[0] - m.velocity(x - h, y, t)[0]) / (2.0 * h);
                let vy = (m.velocity(x, y + h, t)[1] - m.velocity(x, y - h, t)[1]) / (2.0 * h);
                let uy = (m.velocity(x, y + h, t)[0] - m.velocity(x, y - h, t)[0]) / (2.0 * h);
                let vx = (m.velocity(x + h, y, t)[1] - m.velocity(x - h, y, t)[1]) / (2.0 * h);
                let scale = ux.abs() + vy.abs() + uy.abs() + vx.abs();
                if (ux + vy).abs() > 1e-6 * scale + 1e-9 {
                    return Err(Error::Config(format!(
                        "manufactured velocity is not divergence-free at ({x:.3}, {y:.3}, t={t}): div = {:.3e}",
                        ux + vy
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsKind {
    /// Refine the grid at fixed dt; errors against the exact solution.
    Spatial,
    /// Refine dt on a fixed grid; differences between consecutive levels.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub phi_err: f64,
    pub v_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub kind: MmsKind,
    pub rows: Vec<ConvergenceRow>,
    pub phi_orders: Vec<f64>,
    pub v_orders: Vec<f64>,
}

impl ConvergenceTable {
    /// True if every estimated order lies within `target ± tol`.
    pub fn orders_within(&self, target: f64, tol: f64) -> bool {
        self.phi_orders
            .iter()
            .chain(&self.v_orders)
            .all(|o| (o - target).abs() <= tol)
    }
}

/// Result of one level: the final discrete state and its error against the
/// exact solution.
#[derive(Debug, Clone)]
pub struct MmsMember {
    pub n: usize,
    pub dt: f64,
    pub state: State,
    pub phi_err: f64,
    pub v_err: f64,
}

fn exact_fields(m: &dyn Manufactured, grid: Grid, t: f64) -> (ScalarField, VectorField, ScalarField) {
    (
        ScalarField::from_fn(grid, |x, y| m.phi(x, y, t)),
        VectorField::from_fn(grid, |x, y| m.velocity(x, y, t)),
        ScalarField::from_fn(grid, |x, y| m.mu(x, y, t)),
    )
}

/// Grid and time step of one level.
pub fn level_setup(cfg: &StudyConfig, kind: MmsKind, level: usize) -> Result<(Grid, f64)> {
    let r = cfg.refinement;
    let g = cfg.grid;
    match kind {
        MmsKind::Spatial => {
            let f = r.pow(level as u32);
            Ok((Grid::new(g.nx * f, g.ny * f, g.lx, g.ly, g.bc)?, cfg.base.dt))
        }
        MmsKind::Temporal => Ok((g, cfg.base.dt / libm::pow(r as f64, level as f64))),
    }
}

/// Runs one level to `t_end`.
pub fn mms_member(m: &dyn Manufactured, cfg: &StudyConfig, kind: MmsKind, level: usize) -> Result<MmsMember> {
    let (grid, dt) = level_setup(cfg, kind, level)?;
    let p = SimParams { dt, ..cfg.base };
    let stepper = Stepper::new(grid, p)?;
    let (phi, v, mu) = exact_fields(m, grid, 0.0);
    let mut state = State {
        phi,
        v,
        p: ScalarField::zeros(grid),
        mu,
        t: 0.0,
    };
    let forcing = MmsForcing { m, p };
    for _ in 0..steps_for(cfg.t_end, dt)? {
        state = stepper.advance_with(&state, &forcing)?.0;
    }
    let (phi_x, v_x, _) = exact_fields(m, grid, state.t);
    let phi_err = state.phi.zip_map(&phi_x, |a, b| a - b).l2();
    let mut dv = state.v.clone();
    dv.axpy(-1.0, &v_x);
    Ok(MmsMember {
        n: grid.nx,
        dt,
        phi_err,
        v_err: dv.l2(),
        state,
    })
}

fn orders(e: &[f64], r: f64) -> Vec<f64> {
    e.windows(2).map(|w| libm::log(w[0] / w[1]) / libm::log(r)).collect()
}

/// Assembles the convergence table from completed members (in level order).
pub fn mms_table(kind: MmsKind, cfg: &StudyConfig, members: &[MmsMember]) -> ConvergenceTable {
    let r = cfg.refinement as f64;
    let rows: Vec<ConvergenceRow> = match kind {
        MmsKind::Spatial => members
            .iter()
            .map(|m| ConvergenceRow {
                n: m.n,
                dt: m.dt,
                phi_err: m.phi_err,
                v_err: m.v_err,
            })
            .collect(),
        MmsKind::Temporal => members
            .windows(2)
            .map(|w| {
                let mut dv = w[0].state.v.clone();
                dv.axpy(-1.0, &w[1].state.v);
                ConvergenceRow {
                    n: w[0].n,
                    dt: w[0].dt,
                    phi_err: w[0].state.phi.zip_map(&w[1].state.phi, |a, b| a - b).l2(),
                    v_err: dv.l2(),
                }
            })
            .collect(),
    };
    let pe: Vec<f64> = rows.iter().map(|r| r.phi_err).collect();
    let ve: Vec<f64> = rows.iter().map(|r| r.v_err).collect();
    ConvergenceTable {
        kind,
        phi_orders: orders(&pe, r),
        v_orders: orders(&ve, r),
        rows,
    }
}

/// Full study, levels run in sequence. The temporal study uses `levels + 1`
/// runs so that it yields `levels` self-differences.
pub fn mms_run(m: &dyn Manufactured, cfg: &StudyConfig, kind: MmsKind) -> Result<ConvergenceTable> {
    cfg.validate()?;
    check_periodic(cfg)?;
    check_solenoidal(m, &cfg.grid, cfg.t_end)?;
    let runs = member_count(cfg, kind);
    let members = (0..runs)
        .map(|l| mms_member(m, cfg, kind, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(mms_table(kind, cfg, &members))
}

pub fn member_count(cfg: &StudyConfig, kind: MmsKind) -> usize {
    match kind {
        MmsKind::Spatial => cfg.levels,
        MmsKind::Temporal => cfg.levels + 1,
    }
}

pub fn check_periodic(cfg: &StudyConfig) -> Result<()> {
    if cfg.grid.bc != BcMode::Periodic {
        return Err(Error::Config(
            "manufactured solutions require grid.bc = periodic".into(),
        ));
    }
    Ok(())
}
