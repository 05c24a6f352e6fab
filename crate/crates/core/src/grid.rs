//! MAC staggered grid, field storage and the finite-difference operators.
//!
//! Scalars (φ, μ, p) live at cell centres. The x-velocity lives on x-faces
//! (`(nx+1)·ny` values), the y-velocity on y-faces (`nx·(ny+1)` values).
//! Storage is row-major with `y` outer and `x` inner.
//!
//! In [`BcMode::Paper`] scalars carry homogeneous Neumann data through a
//! mirrored ghost cell and the velocity is no-slip: boundary-normal faces are
//! exactly zero and tangential components see an odd ghost. In
//! [`BcMode::Periodic`] the last face column/row duplicates the first one.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcMode {
    /// Neumann scalars, no-slip velocity.
    Paper,
    Periodic,
}

impl BcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BcMode::Paper => "paper",
            BcMode::Periodic => "periodic",
        }
    }
}

impl core::str::FromStr for BcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(BcMode::Paper),
            "periodic" => Ok(BcMode::Periodic),
            _ => Err(Error::validation("grid.bc", "expected `paper` or `periodic`")),
        }
    }
}

/// Rectangular domain `[0, lx] × [0, ly]` split into `nx × ny` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub bc: BcMode,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, bc: BcMode) -> Result<Self> {
        if nx < Self::MIN_CELLS {
            return Err(Error::validation("grid.nx", "at least 4 cells required"));
        }
        if ny < Self::MIN_CELLS {
            return Err(Error::validation("grid.ny", "at least 4 cells required"));
        }
        if !(lx.is_finite() && lx > 0.0) {
            return Err(Error::validation("grid.lx", "must be finite and > 0"));
        }
        if !(ly.is_finite() && ly > 0.0) {
            return Err(Error::validation("grid.ly", "must be finite and > 0"));
        }
        Ok(Grid { nx, ny, lx, ly, bc })
    }

    /// Unit square, handy in tests.
    pub fn unit(n: usize, bc: BcMode) -> Self {
        Grid::new(n, n, 1.0, 1.0, bc).expect("valid unit grid")
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn x_face_count(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn y_face_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx(), (j as f64 + 0.5) * self.dy())
    }

    pub fn x_face(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx(), (j as f64 + 0.5) * self.dy())
    }

    pub fn y_face(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx(), j as f64 * self.dy())
    }

    /// Neighbour cell index `i + d` along an axis of `n` cells. Neumann mode
    /// returns the cell itself past the wall (mirrored ghost).
    #[inline]
    fn cell_nb(&self, i: usize, d: isize, n: usize) -> usize {
        let k = i as isize + d;
        if k >= 0 && (k as usize) < n {
            k as usize
        } else {
            match self.bc {
                BcMode::Paper => i,
                BcMode::Periodic => k.rem_euclid(n as isize) as usize,
            }
        }
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids"))
        }
    }
}

/// Cell-centred scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField {
            grid,
            data: vec![c; grid.cells()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                data.push(f(x, y));
            }
        }
        ScalarField { grid, data }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.cells() {
            return Err(Error::GridMismatch("scalar payload length != nx*ny"));
        }
        Ok(ScalarField { grid, data })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// `∫ f g` by cell sums.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum();
        s * self.grid.cell_area()
    }

    pub fn l2(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, &x| if x.abs() > m { x.abs() } else { m })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn sub_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|x| *x -= m);
    }

    pub fn norms(&self) -> Norms {
        let l2sq = self.dot(self);
        let grad = gradient(self);
        let gsq = grad.dot(&grad);
        let lap = laplacian(self);
        let lsq = lap.dot(&lap);
        Norms {
            l2: libm::sqrt(l2sq),
            h1: libm::sqrt(l2sq + gsq),
            h2: libm::sqrt(l2sq + gsq + lsq),
        }
    }
}

/// Face-centred vector field on the MAC layout.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    /// x-component on x-faces, index `j*(nx+1) + i`.
    pub u: Vec<f64>,
    /// y-component on y-faces, index `j*nx + i`.
    pub v: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            grid,
            u: vec![0.0; grid.x_face_count()],
            v: vec![0.0; grid.y_face_count()],
        }
    }

    /// Samples `f` at face centres and then applies the boundary layout.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> [f64; 2]) -> Self {
        let mut w = VectorField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = grid.x_face(i, j);
                w.u[j * (grid.nx + 1) + i] = f(x, y)[0];
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.y_face(i, j);
                w.v[j * grid.nx + i] = f(x, y)[1];
            }
        }
        w.enforce_bc();
        w
    }

    pub fn from_vecs(grid: Grid, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.x_face_count() || v.len() != grid.y_face_count() {
            return Err(Error::GridMismatch("vector payload length does not match MAC layout"));
        }
        Ok(VectorField { grid, u, v })
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.grid.nx + i]
    }

    /// Zeroes boundary-normal faces (paper) or syncs duplicate faces (periodic).
    pub fn enforce_bc(&mut self) {
        let Grid { nx, ny, bc, .. } = self.grid;
        match bc {
            BcMode::Paper => {
                for j in 0..ny {
                    self.u[j * (nx + 1)] = 0.0;
                    self.u[j * (nx + 1) + nx] = 0.0;
                }
                for i in 0..nx {
                    self.v[i] = 0.0;
                    self.v[ny * nx + i] = 0.0;
                }
            }
            BcMode::Periodic => {
                for j in 0..ny {
                    self.u[j * (nx + 1) + nx] = self.u[j * (nx + 1)];
                }
                for i in 0..nx {
                    self.v[ny * nx + i] = self.v[i];
                }
            }
        }
    }

    /// `(x-face count, y-face row count)` that carry independent values.
    fn unique_extent(&self) -> (usize, usize) {
        match self.grid.bc {
            BcMode::Paper => (self.grid.nx + 1, self.grid.ny + 1),
            BcMode::Periodic => (self.grid.nx, self.grid.ny),
        }
    }

    /// `∫ w·z` summed over independent faces.
    pub fn dot(&self, other: &VectorField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let Grid { nx, ny, .. } = self.grid;
        let (ux, vy) = self.unique_extent();
        let mut s = 0.0;
        for j in 0..ny {
            for i in 0..ux {
                let k = j * (nx + 1) + i;
                s += self.u[k] * other.u[k];
            }
        }
        for j in 0..vy {
            for i in 0..nx {
                let k = j * nx + i;
                s += self.v[k] * other.v[k];
            }
        }
        s * self.grid.cell_area()
    }

    pub fn l2(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0, |m, &x| if x.abs() > m { x.abs() } else { m })
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        self.u.iter_mut().chain(self.v.iter_mut()).for_each(|x| *x *= a);
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn norms(&self) -> Norms {
        let l2sq = self.dot(self);
        let gsq = velocity_grad_sq(self);
        let lap = vector_laplacian(self);
        let lsq = lap.dot(&lap);
        Norms {
            l2: libm::sqrt(l2sq),
            h1: libm::sqrt(l2sq + gsq),
            h2: libm::sqrt(l2sq + gsq + lsq),
        }
    }
}

/// Discrete L², H¹ and Δ-based H² norms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Five-point Laplacian at cell centres.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let mut out = vec![0.0; g.cells()];
    for j in 0..ny {
        let jm = g.cell_nb(j, -1, ny);
        let jp = g.cell_nb(j, 1, ny);
        for i in 0..nx {
            let im = g.cell_nb(i, -1, nx);
            let ip = g.cell_nb(i, 1, nx);
            let c = f.data[j * nx + i];
            out[j * nx + i] = (f.data[j * nx + im] - 2.0 * c + f.data[j * nx + ip]) * idx2
                + (f.data[jm * nx + i] - 2.0 * c + f.data[jp * nx + i]) * idy2;
        }
    }
    ScalarField { grid: g, data: out }
}

/// Face-normal differences across each face. Neumann walls get a zero normal
/// gradient.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let mut w = VectorField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            w.u[j * (nx + 1) + i] = (f.data[j * nx + i] - f.data[j * nx + i - 1]) * idx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            w.v[j * nx + i] = (f.data[j * nx + i] - f.data[(j - 1) * nx + i]) * idy;
        }
    }
    if g.bc == BcMode::Periodic {
        for j in 0..ny {
            w.u[j * (nx + 1)] = (f.data[j * nx] - f.data[j * nx + nx - 1]) * idx;
        }
        for i in 0..nx {
            w.v[i] = (f.data[i] - f.data[(ny - 1) * nx + i]) * idy;
        }
        w.enforce_bc();
    }
    w
}

/// Cell-centred MAC divergence.
pub fn divergence(w: &VectorField) -> ScalarField {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let mut out = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = (w.u[j * (nx + 1) + i + 1] - w.u[j * (nx + 1) + i]) * idx
                + (w.v[(j + 1) * nx + i] - w.v[j * nx + i]) * idy;
        }
    }
    ScalarField { grid: g, data: out }
}

/// Transport term `w·∇f` at cell centres.
///
/// Written in flux form `∇·(w f_face)` with arithmetic face averages of `f`.
/// For a discretely solenoidal `w` this equals the centre average of the face
/// products `w·∇f`, so it is exactly conservative and pairs with
/// [`crate::model::capillary_force`] in the discrete energy balance.
pub fn advect(w: &VectorField, f: &ScalarField) -> ScalarField {
    let g = f.grid;
    debug_assert_eq!(g, w.grid);
    let (nx, ny) = (g.nx, g.ny);
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    // face fluxes
    let fx = center_to_xfaces(f);
    let fy = center_to_yfaces(f);
    let mut out = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            let e = j * (nx + 1) + i;
            let n = j * nx + i;
            out[n] =
                (w.u[e + 1] * fx[e + 1] - w.u[e] * fx[e]) * idx + (w.v[n + nx] * fy[n + nx] - w.v[n] * fy[n]) * idy;
        }
    }
    ScalarField { grid: g, data: out }
}

/// Arithmetic average of a centred scalar onto x-faces (mirror at Neumann walls).
pub(crate) fn center_to_xfaces(f: &ScalarField) -> Vec<f64> {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; g.x_face_count()];
    for j in 0..ny {
        for i in 0..=nx {
            let (a, b) = if i == 0 {
                (g.cell_nb(0, -1, nx), 0)
            } else if i == nx {
                (nx - 1, g.cell_nb(nx - 1, 1, nx))
            } else {
                (i - 1, i)
            };
            out[j * (nx + 1) + i] = 0.5 * (f.data[j * nx + a] + f.data[j * nx + b]);
        }
    }
    out
}

pub(crate) fn center_to_yfaces(f: &ScalarField) -> Vec<f64> {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; g.y_face_count()];
    for j in 0..=ny {
        let (a, b) = if j == 0 {
            (g.cell_nb(0, -1, ny), 0)
        } else if j == ny {
            (ny - 1, g.cell_nb(ny - 1, 1, ny))
        } else {
            (j - 1, j)
        };
        for i in 0..nx {
            out[j * nx + i] = 0.5 * (f.data[a * nx + i] + f.data[b * nx + i]);
        }
    }
    out
}

/// `|w|²` at cell centres, averaging the squared face components.
///
/// Averaging squares (rather than squaring averages) makes
/// `Σ_cells s·|w|² = Σ_faces avg(s)·w²`, which is what the constitutive force
/// needs to cancel the velocity term of the chemical potential exactly.
pub fn speed_sq_centers(w: &VectorField) -> ScalarField {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut out = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            let ul = w.u[j * (nx + 1) + i];
            let ur = w.u[j * (nx + 1) + i + 1];
            let vb = w.v[j * nx + i];
            let vt = w.v[(j + 1) * nx + i];
            out[j * nx + i] = 0.5 * (ul * ul + ur * ur) + 0.5 * (vb * vb + vt * vt);
        }
    }
    ScalarField { grid: g, data: out }
}

/// Face velocities averaged to cell centres.
pub fn velocity_at_centers(w: &VectorField) -> (ScalarField, ScalarField) {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut uc = vec![0.0; g.cells()];
    let mut vc = vec![0.0; g.cells()];
    for j in 0..ny {
        for i in 0..nx {
            uc[j * nx + i] = 0.5 * (w.u[j * (nx + 1) + i] + w.u[j * (nx + 1) + i + 1]);
            vc[j * nx + i] = 0.5 * (w.v[j * nx + i] + w.v[(j + 1) * nx + i]);
        }
    }
    (ScalarField { grid: g, data: uc }, ScalarField { grid: g, data: vc })
}

#[inline]
fn wrap(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

/// Componentwise Laplacian of a face field. No-slip walls use an odd ghost for
/// the tangential component; boundary-normal faces are left at zero.
pub fn vector_laplacian(w: &VectorField) -> VectorField {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let mut out = VectorField::zeros(g);
    let periodic = g.bc == BcMode::Periodic;
    let su = nx + 1;
    // x-component
    let (ilo, ihi) = if periodic { (0, nx) } else { (1, nx) };
    for j in 0..ny {
        for i in ilo..ihi {
            let c = w.u[j * su + i];
            let (l, r) = if periodic {
                (
                    w.u[j * su + wrap(i as isize - 1, nx)],
                    w.u[j * su + wrap(i as isize + 1, nx)],
                )
            } else {
                (w.u[j * su + i - 1], w.u[j * su + i + 1])
            };
            let (b, t) = if periodic {
                (
                    w.u[wrap(j as isize - 1, ny) * su + i],
                    w.u[wrap(j as isize + 1, ny) * su + i],
                )
            } else {
                (
                    if j == 0 { -c } else { w.u[(j - 1) * su + i] },
                    if j + 1 == ny { -c } else { w.u[(j + 1) * su + i] },
                )
            };
            out.u[j * su + i] = (l - 2.0 * c + r) * idx2 + (b - 2.0 * c + t) * idy2;
        }
    }
    // y-component
    let (jlo, jhi) = if periodic { (0, ny) } else { (1, ny) };
    for j in jlo..jhi {
        for i in 0..nx {
            let c = w.v[j * nx + i];
            let (b, t) = if periodic {
                (
                    w.v[wrap(j as isize - 1, ny) * nx + i],
                    w.v[wrap(j as isize + 1, ny) * nx + i],
                )
            } else {
                (w.v[(j - 1) * nx + i], w.v[(j + 1) * nx + i])
            };
            let (l, r) = if periodic {
                (
                    w.v[j * nx + wrap(i as isize - 1, nx)],
                    w.v[j * nx + wrap(i as isize + 1, nx)],
                )
            } else {
                (
                    if i == 0 { -c } else { w.v[j * nx + i - 1] },
                    if i + 1 == nx { -c } else { w.v[j * nx + i + 1] },
                )
            };
            out.v[j * nx + i] = (l - 2.0 * c + r) * idx2 + (b - 2.0 * c + t) * idy2;
        }
    }
    if periodic {
        out.enforce_bc();
    }
    out
}

/// `‖∇w‖²`, the sum of squared edge differences including the odd-ghost wall
/// edges. Equals `-⟨vector_laplacian(w), w⟩` exactly.
pub fn velocity_grad_sq(w: &VectorField) -> f64 {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let su = nx + 1;
    let periodic = g.bc == BcMode::Periodic;
    let mut sx = 0.0;
    let mut sy = 0.0;
    // x-component
    if periodic {
        for j in 0..ny {
            for i in 0..nx {
                let c = w.u[j * su + i];
                let r = w.u[j * su + wrap(i as isize + 1, nx)];
                let t = w.u[wrap(j as isize + 1, ny) * su + i];
                sx += (r - c) * (r - c);
                sy += (t - c) * (t - c);
            }
        }
    } else {
        for j in 0..ny {
            for i in 0..nx {
                let d = w.u[j * su + i + 1] - w.u[j * su + i];
                sx += d * d;
            }
            for i in 1..nx {
                let c = w.u[j * su + i];
                if j + 1 < ny {
                    let d = w.u[(j + 1) * su + i] - c;
                    sy += d * d;
                }
                if j == 0 || j + 1 == ny {
                    sy += 2.0 * c * c;
                }
            }
        }
    }
    // y-component
    if periodic {
        for j in 0..ny {
            for i in 0..nx {
                let c = w.v[j * nx + i];
                let r = w.v[j * nx + wrap(i as isize + 1, nx)];
                let t = w.v[wrap(j as isize + 1, ny) * nx + i];
                sx += (r - c) * (r - c);
                sy += (t - c) * (t - c);
            }
        }
    } else {
        for j in 0..ny {
            for i in 0..nx {
                let d = w.v[(j + 1) * nx + i] - w.v[j * nx + i];
                sy += d * d;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let c = w.v[j * nx + i];
                if i + 1 < nx {
                    let d = w.v[j * nx + i + 1] - c;
                    sx += d * d;
                }
                if i == 0 || i + 1 == nx {
                    sx += 2.0 * c * c;
                }
            }
        }
    }
    (sx * idx2 + sy * idy2) * g.cell_area()
}

/// Momentum transport `(w·∇)w` in divergence form `∇·(w⊗w)` on the MAC grid.
pub fn convect(w: &VectorField) -> VectorField {
    let g = w.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let periodic = g.bc == BcMode::Periodic;
    let su = nx + 1;
    let sc = nx + 1; // corner row stride
                     // corner interpolants, (nx+1)*(ny+1)
    let mut uc = vec![0.0; (nx + 1) * (ny + 1)];
    let mut vc = vec![0.0; (nx + 1) * (ny + 1)];
    for jc in 0..=ny {
        for ic in 0..=nx {
            let u = if periodic {
                0.5 * (w.u[wrap(jc as isize - 1, ny) * su + ic] + w.u[wrap(jc as isize, ny) * su + ic])
            } else if jc == 0 || jc == ny {
                0.0
            } else {
                0.5 * (w.u[(jc - 1) * su + ic] + w.u[jc * su + ic])
            };
            let v = if periodic {
                0.5 * (w.v[jc * nx + wrap(ic as isize - 1, nx)] + w.v[jc * nx + wrap(ic as isize, nx)])
            } else if ic == 0 || ic == nx {
                0.0
            } else {
                0.5 * (w.v[jc * nx + ic - 1] + w.v[jc * nx + ic])
            };
            uc[jc * sc + ic] = u;
            vc[jc * sc + ic] = v;
        }
    }
    let (cu, cv) = velocity_at_centers(w);
    let mut out = VectorField::zeros(g);
    let (ilo, ihi) = if periodic { (0, nx) } else { (1, nx) };
    for j in 0..ny {
        for i in ilo..ihi {
            let ir = i % nx;
            let il = wrap(i as isize - 1, nx);
            let a = cu.data[j * nx + ir];
            let b = cu.data[j * nx + il];
            let top = uc[(j + 1) * sc + i] * vc[(j + 1) * sc + i];
            let bot = uc[j * sc + i] * vc[j * sc + i];
            out.u[j * su + i] = (a * a - b * b) * idx + (top - bot) * idy;
        }
    }
    let (jlo, jhi) = if periodic { (0, ny) } else { (1, ny) };
    for j in jlo..jhi {
        let jt = j % ny;
        let jb = wrap(j as isize - 1, ny);
        for i in 0..nx {
            let a = cv.data[jt * nx + i];
            let b = cv.data[jb * nx + i];
            let right = uc[j * sc + i + 1] * vc[j * sc + i + 1];
            let left = uc[j * sc + i] * vc[j * sc + i];
            out.v[j * nx + i] = (right - left) * idx + (a * a - b * b) * idy;
        }
    }
    if periodic {
        out.enforce_bc();
    }
    out
}

/// Velocity from a corner stream function, `u = ∂ψ/∂y`, `v = -∂ψ/∂x`.
///
/// `psi` has `(nx+1)·(ny+1)` corner values. The result is discretely
/// solenoidal to round-off; with `psi = 0` on the boundary it also satisfies
/// the no-slip normal condition.
pub fn curl_of_corner_stream(grid: Grid, psi: &[f64]) -> VectorField {
    let (nx, ny) = (grid.nx, grid.ny);
    assert_eq!(psi.len(), (nx + 1) * (ny + 1));
    let sc = nx + 1;
    let mut w = VectorField::zeros(grid);
    for j in 0..ny {
        for i in 0..=nx {
            w.u[j * (nx + 1) + i] = (psi[(j + 1) * sc + i] - psi[j * sc + i]) / grid.dy();
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            w.v[j * nx + i] = -(psi[j * sc + i + 1] - psi[j * sc + i]) / grid.dx();
        }
    }
    w
}

/// Checks two fields share a grid.
pub fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    a.check_same(b)
}
