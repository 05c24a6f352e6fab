//! Raw little-endian `f64` payloads with JSON sidecars, and full-state
//! checkpoints built from them.

use std::fs;
use std::path::{Path, PathBuf};

use binmix_core::diagnostics::Accumulators;
use binmix_core::{BcMode, Grid, ScalarField, State, VectorField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    CellCenter,
    XFace,
    YFace,
}

impl Layout {
    pub fn count(self, nx: usize, ny: usize) -> usize {
        match self {
            Layout::CellCenter => nx * ny,
            Layout::XFace => (nx + 1) * ny,
            Layout::YFace => nx * (ny + 1),
        }
    }
}

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub field: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub time: f64,
    pub bc: String,
    pub layout: Layout,
}

impl SnapshotMeta {
    pub fn new(field: &str, grid: &Grid, time: f64, layout: Layout) -> Self {
        SnapshotMeta {
            field: field.into(),
            nx: grid.nx,
            ny: grid.ny,
            lx: grid.lx,
            ly: grid.ly,
            time,
            bc: bc_name(grid.bc).into(),
            layout,
        }
    }

    pub fn grid(&self, path: &Path) -> Result<Grid> {
        let bc = match self.bc.as_str() {
            "paper" => BcMode::Paper,
            "periodic" => BcMode::Periodic,
            other => return Err(Error::format(path, format!("unknown bc `{other}`"))),
        };
        Ok(Grid::new(self.nx, self.ny, self.lx, self.ly, bc)?)
    }
}

pub fn bc_name(bc: BcMode) -> &'static str {
    match bc {
        BcMode::Paper => "paper",
        BcMode::Periodic => "periodic",
    }
}

fn sidecar(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

/// Writes `data` to `path` (conventionally `*.bin`) and its sidecar next to it.
pub fn write_raw(path: &Path, data: &[f64], meta: &SnapshotMeta) -> Result<()> {
    let expected = meta.layout.count(meta.nx, meta.ny);
    if data.len() != expected {
        return Err(Error::format(
            path,
            format!("{} values supplied, layout needs {expected}", data.len()),
        ));
    }
    let bytes: Vec<u8> = data.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar(path);
    let json = serde_json::to_string_pretty(meta).expect("sidecar serializes");
    fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

/// Reads a payload and checks it against its sidecar.
pub fn read_raw(path: &Path) -> Result<(Vec<f64>, SnapshotMeta)> {
    let side = sidecar(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: SnapshotMeta =
        serde_json::from_str(&text).map_err(|e| Error::format(&side, format!("bad sidecar: {e}")))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = 8 * meta.layout.count(meta.nx, meta.ny);
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("payload has {} bytes, sidecar implies {expected}", bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((data, meta))
}

pub fn write_scalar(path: &Path, name: &str, f: &ScalarField, time: f64) -> Result<()> {
    write_raw(
        path,
        &f.data,
        &SnapshotMeta::new(name, &f.grid, time, Layout::CellCenter),
    )
}

pub fn read_scalar(path: &Path) -> Result<(ScalarField, SnapshotMeta)> {
    let (data, meta) = read_raw(path)?;
    if meta.layout != Layout::CellCenter {
        return Err(Error::format(path, "expected layout cell_center"));
    }
    let grid = meta.grid(path)?;
    Ok((ScalarField::from_vec(grid, data)?, meta))
}

/// Vector fields are stored as two payloads, `x_face` then `y_face`.
pub fn write_vector(u_path: &Path, v_path: &Path, name: &str, w: &VectorField, time: f64) -> Result<()> {
    write_raw(
        u_path,
        &w.u,
        &SnapshotMeta::new(&format!("{name}.u"), &w.grid, time, Layout::XFace),
    )?;
    write_raw(
        v_path,
        &w.v,
        &SnapshotMeta::new(&format!("{name}.v"), &w.grid, time, Layout::YFace),
    )
}

pub fn read_vector(u_path: &Path, v_path: &Path) -> Result<(VectorField, SnapshotMeta)> {
    let (u, mu) = read_raw(u_path)?;
    let (v, mv) = read_raw(v_path)?;
    if mu.layout != Layout::XFace || mv.layout != Layout::YFace {
        return Err(Error::format(u_path, "expected x_face and y_face layouts"));
    }
    let grid = mu.grid(u_path)?;
    if mv.grid(v_path)? != grid {
        return Err(Error::format(v_path, "grid differs from the x_face component"));
    }
    Ok((VectorField::from_vecs(grid, u, v)?, mu))
}

/// Checkpoint index: payload file names relative to its own directory, plus
/// the running accumulators so a restart continues the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: usize,
    pub time: f64,
    pub phi: String,
    pub mu: String,
    pub p: String,
    pub u: String,
    pub v: String,
    pub accumulators: [f64; 9],
}

pub fn checkpoint_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("state_{step:06}.json"))
}

/// Writes all fields of `state` plus `state_{step}.json` into `dir`.
pub fn write_snapshot(state: &State, step: usize, acc: &Accumulators, dir: &Path) -> Result<PathBuf> {
    let name = |f: &str| format!("{f}_{step:06}.bin");
    let cp = Checkpoint {
        step,
        time: state.t,
        phi: name("phi"),
        mu: name("mu"),
        p: name("p"),
        u: name("u"),
        v: name("v"),
        accumulators: acc.values(),
    };
    write_scalar(&dir.join(&cp.phi), "phi", &state.phi, state.t)?;
    write_scalar(&dir.join(&cp.mu), "mu", &state.mu, state.t)?;
    write_scalar(&dir.join(&cp.p), "p", &state.p, state.t)?;
    write_vector(&dir.join(&cp.u), &dir.join(&cp.v), "velocity", &state.v, state.t)?;
    let path = checkpoint_path(dir, step);
    let json = serde_json::to_string_pretty(&cp).expect("checkpoint serializes");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Loads a checkpoint written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<(State, usize, Accumulators)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cp: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::format(path, format!("bad checkpoint: {e}")))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let (phi, _) = read_scalar(&dir.join(&cp.phi))?;
    let (mu, _) = read_scalar(&dir.join(&cp.mu))?;
    let (p, _) = read_scalar(&dir.join(&cp.p))?;
    let (v, _) = read_vector(&dir.join(&cp.u), &dir.join(&cp.v))?;
    if phi.grid != mu.grid || phi.grid != p.grid || phi.grid != v.grid {
        return Err(Error::format(path, "fields are on different grids"));
    }
    let state = State {
        phi,
        v,
        p,
        mu,
        t: cp.time,
    };
    Ok((state, cp.step, Accumulators::from_values(cp.accumulators)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(a: &[f64]) -> Vec<u64> {
        a.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn scalar_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(5, 4, 0.7, 1.3, BcMode::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x * 1e3).sin() / (y + 1e-300) - 0.1);
        let p = dir.path().join("phi.bin");
        write_scalar(&p, "phi", &f, 0.125).unwrap();
        let (back, meta) = read_scalar(&p).unwrap();
        assert_eq!(bits(&back.data), bits(&f.data));
        assert_eq!(back.grid, g);
        assert_eq!((meta.time, meta.layout), (0.125, Layout::CellCenter));
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 8 * 20);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::unit(4, BcMode::Paper);
        let p = dir.path().join("phi.bin");
        write_scalar(&p, "phi", &ScalarField::constant(g, 1.0), 0.0).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..100]).unwrap();
        let msg = read_scalar(&p).unwrap_err().to_string();
        assert!(msg.contains("100") && msg.contains("128"), "{msg}");
    }

    #[test]
    fn sidecar_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::unit(4, BcMode::Paper);
        let p = dir.path().join("phi.bin");
        write_scalar(&p, "phi", &ScalarField::constant(g, 1.0), 0.0).unwrap();
        let side = p.with_extension("json");
        let text = std::fs::read_to_string(&side)
            .unwrap()
            .replace("\"nx\": 4", "\"nx\": 5");
        std::fs::write(&side, text).unwrap();
        let e = read_scalar(&p).unwrap_err();
        assert!(matches!(e, Error::Format { .. }), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn vector_round_trip_keeps_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(6, 4, 1.0, 2.0, BcMode::Paper).unwrap();
        let w = VectorField::from_fn(g, |x, y| [x.sin() * y, x * y.cos()]);
        let (pu, pv) = (dir.path().join("u.bin"), dir.path().join("v.bin"));
        write_vector(&pu, &pv, "velocity", &w, 1.0).unwrap();
        let (back, _) = read_vector(&pu, &pv).unwrap();
        assert_eq!(bits(&back.u), bits(&w.u));
        assert_eq!(bits(&back.v), bits(&w.v));
        assert!(read_vector(&pv, &pu).is_err());
    }
}
