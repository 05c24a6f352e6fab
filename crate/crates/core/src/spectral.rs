//! Exact eigenbases of the one-dimensional second-difference operators used on
//! the MAC grid, and the separable 2D transform built from them.
//!
//! Every symmetric operator the stepper inverts is a polynomial in the grid
//! Laplacian, so it is diagonal in these bases. They serve as the spectral
//! preconditioner for conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind1d {
    /// Cell centres, mirrored (Neumann) ghost.
    NeumannCell,
    /// Cell centres, odd (Dirichlet) ghost.
    DirichletCell,
    /// Interior nodes of a grid whose end nodes are held at zero.
    DirichletNode,
    Periodic,
}

/// Orthonormal eigenbasis of `-d²/dx²` for one axis.
#[derive(Debug, Clone)]
pub(crate) struct Basis1d {
    pub n: usize,
    /// Eigenvalues of `-δ²/h²`.
    pub eig: Vec<f64>,
    /// Row `k` is eigenvector `k`.
    q: Vec<f64>,
}

impl Basis1d {
    /// `cells` is the number of cells along the axis, `h` the spacing.
    pub fn new(kind: Kind1d, cells: usize, h: f64) -> Self {
        let n = match kind {
            Kind1d::DirichletNode => cells - 1,
            _ => cells,
        };
        let nf = cells as f64;
        let mut q = vec![0.0; n * n];
        let mut eig = vec![0.0; n];
        let h2 = h * h;
        for k in 0..n {
            let (theta, shift, even) = match kind {
                Kind1d::NeumannCell => (PI * k as f64 / nf, 0.5, true),
                Kind1d::DirichletCell => (PI * (k + 1) as f64 / nf, 0.5, false),
                Kind1d::DirichletNode => (PI * (k + 1) as f64 / nf, 1.0, false),
                Kind1d::Periodic => {
                    // real Fourier modes: 0, cos 1, sin 1, cos 2, sin 2, ...
                    let m = k.div_ceil(2);
                    (2.0 * PI * m as f64 / nf, 0.0, k == 0 || k % 2 == 1)
                }
            };
            let f = |i: usize| {
                let a = theta * (i as f64 + shift);
                if even {
                    libm::cos(a)
                } else {
                    libm::sin(a)
                }
            };
            let row = &mut q[k * n..(k + 1) * n];
            for (i, r) in row.iter_mut().enumerate() {
                *r = f(i);
            }
            let norm = libm::sqrt(row.iter().map(|x| x * x).sum::<f64>());
            row.iter_mut().for_each(|x| *x /= norm);
            eig[k] = 2.0 / h2 * (1.0 - libm::cos(theta));
        }
        Basis1d { n, eig, q }
    }

    #[cfg(test)]
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.q[k * self.n..(k + 1) * self.n]
    }
}

/// Separable transform on an `nx × ny` block (row-major, y outer).
#[derive(Debug, Clone)]
pub(crate) struct Spectral2d {
    pub bx: Basis1d,
    pub by: Basis1d,
}

impl Spectral2d {
    pub fn new(bx: Basis1d, by: Basis1d) -> Self {
        Spectral2d { bx, by }
    }

    /// `out = Qᵀ x` (coefficients, index `ky*nx + kx`).
    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.bx.n, self.by.n);
        let mut tmp = vec![0.0; nx * ny];
        for j in 0..ny {
            let row = &x[j * nx..(j + 1) * nx];
            for kx in 0..nx {
                let qk = &self.bx.q[kx * nx..(kx + 1) * nx];
                tmp[j * nx + kx] = qk.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for ky in 0..ny {
            let qk = &self.by.q[ky * ny..(ky + 1) * ny];
            let dst = &mut out[ky * nx..(ky + 1) * nx];
            for (j, &c) in qk.iter().enumerate() {
                let src = &tmp[j * nx..(j + 1) * nx];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }

    /// `out = Q c`.
    pub fn inverse(&self, c: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.bx.n, self.by.n);
        let mut tmp = vec![0.0; nx * ny];
        for ky in 0..ny {
            let qk = &self.by.q[ky * ny..(ky + 1) * ny];
            let src = &c[ky * nx..(ky + 1) * nx];
            for (j, &a) in qk.iter().enumerate() {
                let dst = &mut tmp[j * nx..(j + 1) * nx];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..ny {
            let src = &tmp[j * nx..(j + 1) * nx];
            let dst = &mut out[j * nx..(j + 1) * nx];
            for (kx, &s) in src.iter().enumerate() {
                let qk = &self.bx.q[kx * nx..(kx + 1) * nx];
                for (d, q) in dst.iter_mut().zip(qk) {
                    *d += s * q;
                }
            }
        }
    }

    /// Applies `symbol(λx + λy)⁻¹` in the eigenbasis. Modes with a zero symbol
    /// are dropped (nullspace).
    pub fn apply_inverse(&self, r: &[f64], z: &mut [f64], symbol: impl Fn(f64) -> f64) {
        let (nx, ny) = (self.bx.n, self.by.n);
        let mut c = vec![0.0; nx * ny];
        self.forward(r, &mut c);
        for ky in 0..ny {
            for kx in 0..nx {
                let s = symbol(self.bx.eig[kx] + self.by.eig[ky]);
                let k = ky * nx + kx;
                c[k] = if s != 0.0 { c[k] / s } else { 0.0 };
            }
        }
        self.inverse(&c, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Applies the 1D second-difference operator `-δ²/h²` for each kind.
    fn apply_1d(kind: Kind1d, x: &[f64], h: f64) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let c = x[i];
                let l = if i > 0 {
                    x[i - 1]
                } else {
                    match kind {
                        Kind1d::NeumannCell => c,
                        Kind1d::DirichletCell => -c,
                        Kind1d::DirichletNode => 0.0,
                        Kind1d::Periodic => x[n - 1],
                    }
                };
                let r = if i + 1 < n {
                    x[i + 1]
                } else {
                    match kind {
                        Kind1d::NeumannCell => c,
                        Kind1d::DirichletCell => -c,
                        Kind1d::DirichletNode => 0.0,
                        Kind1d::Periodic => x[0],
                    }
                };
                -(l - 2.0 * c + r) / (h * h)
            })
            .collect()
    }

    #[test]
    fn bases_are_orthonormal_eigenvectors() {
        for kind in [
            Kind1d::NeumannCell,
            Kind1d::DirichletCell,
            Kind1d::DirichletNode,
            Kind1d::Periodic,
        ] {
            for cells in [4usize, 7, 8] {
                let h = 0.3;
                let b = Basis1d::new(kind, cells, h);
                for k in 0..b.n {
                    let v = b.vector(k);
                    let av = apply_1d(kind, v, h);
                    for (a, x) in av.iter().zip(v) {
                        assert!((a - b.eig[k] * x).abs() < 1e-10, "{kind:?} n={cells} k={k}");
                    }
                    for m in 0..b.n {
                        let d: f64 = v.iter().zip(b.vector(m)).map(|(a, c)| a * c).sum();
                        let want = if m == k { 1.0 } else { 0.0 };
                        assert!((d - want).abs() < 1e-12, "{kind:?} n={cells} k={k} m={m} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn transform_round_trip() {
        let s = Spectral2d::new(
            Basis1d::new(Kind1d::NeumannCell, 6, 0.1),
            Basis1d::new(Kind1d::DirichletCell, 5, 0.2),
        );
        let x: Vec<f64> = (0..30).map(|i| libm::sin(i as f64 * 1.7)).collect();
        let mut c = vec![0.0; 30];
        let mut y = vec![0.0; 30];
        s.forward(&x, &mut c);
        s.inverse(&c, &mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
