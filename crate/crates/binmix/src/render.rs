//! Greyscale PGM images of the order parameter.

use std::path::Path;

use binmix_core::ScalarField;

use crate::error::{Error, Result};

/// `[-1.2, 1.2] → [0, 255]`, clamped, rounding halves up (so φ = 0 maps to 128).
pub fn gray(phi: f64) -> u8 {
    let x = (phi + 1.2) / 2.4 * 255.0;
    (x + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Binary P5 bytes; the first image row is the top of the domain.
pub fn pgm_bytes(phi: &ScalarField) -> Vec<u8> {
    let (nx, ny) = (phi.grid.nx, phi.grid.ny);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in (0..ny).rev() {
        out.extend(phi.data[j * nx..(j + 1) * nx].iter().map(|&p| gray(p)));
    }
    out
}

pub fn render_pgm(phi: &ScalarField, path: &Path) -> Result<()> {
    std::fs::write(path, pgm_bytes(phi)).map_err(|e| Error::io(path, e))
}
