//! Constitutive relations: the local chemical potential, the capillary and
//! constitutive body forces, the Lyapunov energy and its dissipation rate.

use crate::error::{Error, Result};
use crate::forcing::BodyForce;
use crate::grid::{
    advect, center_to_xfaces, center_to_yfaces, gradient, laplacian, speed_sq_centers, velocity_grad_sq, ScalarField,
    VectorField,
};
use crate::linsolve::SolverConfig;
use crate::stepper::State;

/// Stabilization constant `S` of the semi-implicit φ update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Stabilization {
    /// `2·max(1, max|3φ² + u|)`, recomputed every step.
    #[default]
    Auto,
    Constant(f64),
}

/// Physical coefficients and numerical controls. Density is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
    pub nu: f64,
    pub lambda: f64,
    /// Reduced temperature.
    pub u: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub stabilization: Stabilization,
    pub force: BodyForce,
    pub solver: SolverConfig,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            kappa: 1e-3,
            beta: 0.05,
            gamma: 1.0,
            nu: 1.0,
            lambda: 0.5,
            u: -1.0,
            epsilon: 0.0,
            dt: 1e-3,
            stabilization: Stabilization::Auto,
            force: BodyForce::Zero,
            solver: SolverConfig::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phys.kappa", self.kappa),
            ("phys.beta", self.beta),
            ("phys.gamma", self.gamma),
            ("phys.nu", self.nu),
            ("time.dt", self.dt),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(key, "must be finite and > 0"));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::validation("phys.lambda", "must be finite and >= 0"));
        }
        if !(self.u.is_finite() && self.u >= -1.0) {
            return Err(Error::validation("phys.u", "must be finite and >= -1"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::validation("phys.epsilon", "must lie in [0, 1)"));
        }
        if let Stabilization::Constant(s) = self.stabilization {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::validation("phys.stab_S", "must be finite and >= 0"));
            }
        }
        self.force.validate()?;
        self.solver.validate()
    }

    /// `S` for the step starting from `phi`.
    pub fn stabilization_for(&self, phi: &ScalarField) -> f64 {
        match self.stabilization {
            Stabilization::Constant(s) => s,
            Stabilization::Auto => {
                let m = phi
                    .data
                    .iter()
                    .fold(1.0f64, |m, &p| m.max((3.0 * p * p + self.u).abs()));
                2.0 * m
            }
        }
    }
}

/// `φ³ + uφ + λ|v|²φ`.
pub fn local_potential(phi: f64, v: [f64; 2], p: &SimParams) -> f64 {
    let v2 = v[0] * v[0] + v[1] * v[1];
    phi * phi * phi + p.u * phi + p.lambda * v2 * phi
}

/// Local potential on cells with `|v|²` from [`speed_sq_centers`].
pub fn local_potential_field(phi: &ScalarField, v: &VectorField, p: &SimParams) -> ScalarField {
    let s = speed_sq_centers(v);
    phi.zip_map(&s, |f, s| f * f * f + p.u * f + p.lambda * s * f)
}

/// `μ = -κΔφ + φ³ + (u + λ|v|²)φ + βφ̇`.
pub fn chemical_potential(phi: &ScalarField, phi_dot: &ScalarField, v: &VectorField, p: &SimParams) -> ScalarField {
    let lap = laplacian(phi);
    let loc = local_potential_field(phi, v, p);
    let mut mu = lap.zip_map(&loc, |l, m| -p.kappa * l + m);
    for (m, d) in mu.data.iter_mut().zip(&phi_dot.data) {
        *m += p.beta * d;
    }
    mu
}

/// Capillary force `-κ Δφ ∇φ` on faces, with `Δφ` averaged to the faces.
///
/// It differs from `-κ∇·(∇φ⊗∇φ)` by a gradient, which the projection removes.
pub fn capillary_force(phi: &ScalarField, p: &SimParams) -> VectorField {
    let lap = laplacian(phi);
    let lx = center_to_xfaces(&lap);
    let ly = center_to_yfaces(&lap);
    let mut f = gradient(phi);
    for (g, l) in f.u.iter_mut().zip(&lx) {
        *g *= -p.kappa * l;
    }
    for (g, l) in f.v.iter_mut().zip(&ly) {
        *g *= -p.kappa * l;
    }
    f
}

/// Constitutive force `λ φ φ̇ v`, with the product `φ φ̇` averaged to faces.
pub fn constitutive_force(phi: &ScalarField, phi_dot: &ScalarField, v: &VectorField, p: &SimParams) -> VectorField {
    let prod = phi.zip_map(phi_dot, |a, b| a * b);
    let px = center_to_xfaces(&prod);
    let py = center_to_yfaces(&prod);
    let mut f = v.clone();
    for (w, s) in f.u.iter_mut().zip(&px) {
        *w *= p.lambda * s;
    }
    for (w, s) in f.v.iter_mut().zip(&py) {
        *w *= p.lambda * s;
    }
    f
}

/// `½[κ‖∇φ‖² + ‖v‖² + ε‖μ‖² + ½‖φ² + u‖²]`.
pub fn total_energy(state: &State, p: &SimParams) -> f64 {
    energy_of(&state.phi, &state.v, &state.mu, p)
}

pub(crate) fn energy_of(phi: &ScalarField, v: &VectorField, mu: &ScalarField, p: &SimParams) -> f64 {
    let g = gradient(phi);
    let well: f64 = phi
        .data
        .iter()
        .map(|&f| {
            let w = f * f + p.u;
            w * w
        })
        .sum::<f64>()
        * phi.grid.cell_area();
    let eps = if p.epsilon > 0.0 { p.epsilon * mu.dot(mu) } else { 0.0 };
    0.5 * (p.kappa * g.dot(&g) + v.dot(v) + eps + 0.5 * well)
}

/// `β‖φ̇‖² + ν‖∇v‖² + γ‖∇μ‖²` with `φ̇` the material derivative.
pub fn dissipation_rate(state: &State, phi_dot_material: &ScalarField, p: &SimParams) -> f64 {
    let gm = gradient(&state.mu);
    p.beta * phi_dot_material.dot(phi_dot_material) + p.nu * velocity_grad_sq(&state.v) + p.gamma * gm.dot(&gm)
}

/// `(φⁿ⁺¹ - φⁿ)/dt + v·∇φⁿ`.
pub fn material_derivative(phi_new: &ScalarField, phi_old: &ScalarField, v: &VectorField, dt: f64) -> ScalarField {
    let a = advect(v, phi_old);
    let mut d = phi_new.zip_map(phi_old, |n, o| (n - o) / dt);
    for (x, y) in d.data.iter_mut().zip(&a.data) {
        *x += y;
    }
    d
}

/// Symmetric traceless 2×2 tensor `[[a, b], [b, -a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Traceless {
    pub a: f64,
    pub b: f64,
}

impl Traceless {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.b, -self.a]]
    }

    pub fn trace(&self) -> f64 {
        let m = self.matrix();
        m[0][0] + m[1][1]
    }

    /// Frobenius norm squared.
    pub fn norm_sq(&self) -> f64 {
        2.0 * (self.a * self.a + self.b * self.b)
    }
}

/// Pointwise process variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProcessSample {
    pub phi: f64,
    pub phi_dot: f64,
    pub v: [f64; 2],
    /// `∇φ`.
    pub h: [f64; 2],
    pub d_tilde: Traceless,
    pub grad_mu: [f64; 2],
}

/// `(cancel_residual, entropy_production)` for one sample.
///
/// `cancel_residual` is `[ψ'(φ) - μ_loc(φ, v)]φ̇ + d·v`, divided by the largest
/// magnitude among its terms so that it is a relative round-off measure.
/// `entropy_production` is `βφ̇² + 2ν|D̃|² + γ|∇μ|²`.
pub fn thermo_consistency_residual(s: &ProcessSample, p: &SimParams) -> (f64, f64) {
    let psi_phi = s.phi * s.phi * s.phi + p.u * s.phi;
    let mu_loc = local_potential(s.phi, s.v, p);
    let v2 = s.v[0] * s.v[0] + s.v[1] * s.v[1];
    let d = [
        p.lambda * s.phi * s.phi_dot * s.v[0],
        p.lambda * s.phi * s.phi_dot * s.v[1],
    ];
    let d_dot_v = d[0] * s.v[0] + d[1] * s.v[1];
    let cancel = (psi_phi - mu_loc) * s.phi_dot + d_dot_v;
    let scale = (psi_phi * s.phi_dot)
        .abs()
        .max((mu_loc * s.phi_dot).abs())
        .max(d_dot_v.abs())
        .max(p.lambda * v2 * (s.phi * s.phi_dot).abs());
    let rel = if scale > 0.0 { cancel / scale } else { 0.0 };
    let entropy = p.beta * s.phi_dot * s.phi_dot
        + 2.0 * p.nu * s.d_tilde.norm_sq()
        + p.gamma * (s.grad_mu[0] * s.grad_mu[0] + s.grad_mu[1] * s.grad_mu[1]);
    (rel, entropy)
}
