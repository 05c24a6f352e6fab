//! Flat `key = value` run configuration.
//!
//! Sections are dotted prefixes (`grid.nx`, `phys.kappa`, ...). Blank lines
//! and `#` comments are ignored; unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use binmix_core::init::{InitialCondition, PhiKind, VelocityKind};
use binmix_core::verify::StudyConfig;
use binmix_core::{BcMode, BodyForce, Grid, NullspaceFix, Preconditioner, SimParams, Stabilization, State, Stepper};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// 0 disables snapshots.
    pub snapshot_every: usize,
    pub series_every: usize,
    pub render: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            snapshot_every: 100,
            series_every: 1,
            render: false,
        }
    }
}

/// Settings of the verification subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySettings {
    pub levels: usize,
    pub refinement: usize,
    pub eps: Vec<f64>,
    pub delta: f64,
    pub snapshot_every: usize,
    pub perturbation_seed: u64,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings {
            levels: 3,
            refinement: 2,
            eps: vec![0.1, 0.05, 0.025, 0.0],
            delta: 1e-4,
            snapshot_every: 10,
            perturbation_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub params: SimParams,
    pub ic: InitialCondition,
    pub t_end: f64,
    pub output: OutputConfig,
    pub study: StudySettings,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{body}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (line, v.to_string())) {
                return Err(Error::Parse {
                    line,
                    message: format!("`{k}` already set on line {first}"),
                });
            }
        }
        Self::from_entries(&entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn from_entries(entries: &BTreeMap<String, (usize, String)>) -> Result<Self> {
        let mut p = SimParams::default();
        let mut ic = InitialCondition::default();
        let mut out = OutputConfig::default();
        let mut study = StudySettings::default();
        let (mut nx, mut ny, mut lx, mut ly, mut bc) = (64usize, None, 1.0, 1.0, BcMode::Paper);
        let mut t_end = 1.0;
        let mut force_kind = "zero".to_string();
        let (mut fx, mut fy, mut famp, mut fk, mut fomega) = (0.0, 0.0, 0.0, 1.0, 0.0);

        for (key, (line, v)) in entries {
            let line = *line;
            match key.as_str() {
                "grid.nx" => nx = num(line, v)?,
                "grid.ny" => ny = Some(num(line, v)?),
                "grid.lx" => lx = num(line, v)?,
                "grid.ly" => ly = num(line, v)?,
                "grid.bc" => bc = choice(line, v, &[("paper", BcMode::Paper), ("periodic", BcMode::Periodic)])?,
                "phys.kappa" => p.kappa = num(line, v)?,
                "phys.beta" => p.beta = num(line, v)?,
                "phys.gamma" => p.gamma = num(line, v)?,
                "phys.nu" => p.nu = num(line, v)?,
                "phys.lambda" => p.lambda = num(line, v)?,
                "phys.u" => p.u = num(line, v)?,
                "phys.epsilon" => p.epsilon = num(line, v)?,
                "phys.stab_S" => {
                    p.stabilization = if v == "auto" {
                        Stabilization::Auto
                    } else {
                        Stabilization::Constant(num(line, v)?)
                    }
                }
                "time.dt" => p.dt = num(line, v)?,
                "time.t_end" => t_end = num(line, v)?,
                "ic.kind" => {
                    ic.kind = choice(
                        line,
                        v,
                        &[
                            ("uniform_noise", PhiKind::UniformNoise),
                            ("tanh_stripe", PhiKind::TanhStripe),
                            ("tanh_disk", PhiKind::TanhDisk),
                        ],
                    )?
                }
                "ic.amplitude" => ic.amplitude = num(line, v)?,
                "ic.mean" => ic.mean = num(line, v)?,
                "ic.seed" => ic.seed = seed(line, v)?,
                "ic.width" => ic.width = num(line, v)?,
                "ic.radius" => ic.radius = num(line, v)?,
                "ic.v_kind" => {
                    ic.v_kind = choice(
                        line,
                        v,
                        &[
                            ("zero", VelocityKind::Zero),
                            ("shear", VelocityKind::Shear),
                            ("taylor_green", VelocityKind::TaylorGreen),
                        ],
                    )?
                }
                "ic.v_amplitude" => ic.v_amplitude = num(line, v)?,
                "force.kind" => {
                    force_kind =
                        choice(line, v, &[("zero", "zero"), ("constant", "constant"), ("trig", "trig")])?.into()
                }
                "force.fx" => fx = num(line, v)?,
                "force.fy" => fy = num(line, v)?,
                "force.amplitude" => famp = num(line, v)?,
                "force.wavenumber" => fk = num(line, v)?,
                "force.omega" => fomega = num(line, v)?,
                "output.dir" => out.dir = PathBuf::from(v),
                "output.snapshot_every" => out.snapshot_every = num(line, v)?,
                "output.series_every" => out.series_every = num(line, v)?,
                "output.render" => out.render = choice(line, v, &[("true", true), ("false", false)])?,
                "solver.rel_tol" => p.solver.rel_tol = num(line, v)?,
                "solver.max_iter" => p.solver.max_iter = Some(num(line, v)?),
                "solver.preconditioner" => {
                    p.solver.preconditioner = choice(
                        line,
                        v,
                        &[
                            ("spectral", Preconditioner::Spectral),
                            ("jacobi", Preconditioner::Jacobi),
                            ("none", Preconditioner::None),
                        ],
                    )?
                }
                "solver.nullspace" => {
                    p.solver.nullspace_fix = choice(
                        line,
                        v,
                        &[
                            ("project", NullspaceFix::ProjectMeanZero),
                            ("pin", NullspaceFix::PinOneCell),
                        ],
                    )?
                }
                "study.levels" => study.levels = num(line, v)?,
                "study.refinement" => study.refinement = num(line, v)?,
                "study.eps" => study.eps = parse_list(v).map_err(|message| Error::Parse { line, message })?,
                "study.delta" => study.delta = num(line, v)?,
                "study.snapshot_every" => study.snapshot_every = num(line, v)?,
                "study.perturbation_seed" => study.perturbation_seed = seed(line, v)?,
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }

        p.force = match force_kind.as_str() {
            "constant" => BodyForce::Constant { fx, fy },
            "trig" => BodyForce::Trig {
                amplitude: famp,
                wavenumber: fk,
                omega: fomega,
            },
            _ => BodyForce::Zero,
        };
        let grid = Grid::new(nx, ny.unwrap_or(nx), lx, ly, bc)?;
        let cfg = RunConfig {
            grid,
            params: p,
            ic,
            t_end,
            output: out,
            study,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.ic.validate(&self.grid)?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(invalid("time.t_end", "must be finite and > 0"));
        }
        if self.output.series_every == 0 {
            return Err(invalid("output.series_every", "must be >= 1"));
        }
        binmix_core::verify::steps_for(self.t_end, self.params.dt)?;
        Ok(())
    }

    /// Validated initial state; μ from the chemical potential relation.
    pub fn initial_state(&self) -> Result<State> {
        let (phi, v) = self.ic.build(self.grid)?;
        Ok(Stepper::new(self.grid, self.params)?.initial_state(phi, v)?)
    }

    pub fn steps(&self) -> Result<usize> {
        Ok(binmix_core::verify::steps_for(self.t_end, self.params.dt)?)
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            levels: self.study.levels,
            refinement: self.study.refinement,
            t_end: self.t_end,
            eps_list: self.study.eps.clone(),
            delta: self.study.delta,
            snapshot_every: self.study.snapshot_every,
            ..StudyConfig::new(self.params, self.grid)
        }
    }
}

/// Reads and validates a configuration and builds its initial state.
pub fn load_config(path: &Path) -> Result<(SimParams, Grid, State)> {
    let cfg = RunConfig::load(path)?;
    let state = cfg.initial_state()?;
    Ok((cfg.params, cfg.grid, state))
}

fn invalid(key: &'static str, message: &str) -> Error {
    Error::Core(binmix_core::Error::Validation {
        key,
        message: message.into(),
    })
}

fn num<T: FromStr>(line: usize, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{v}` as a {}", short_type::<T>()),
    })
}

fn short_type<T>() -> &'static str {
    let t = std::any::type_name::<T>();
    if t == "f64" {
        "number"
    } else {
        "non-negative integer"
    }
}

fn seed(line: usize, v: &str) -> Result<u64> {
    let r = match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse(),
    };
    r.map_err(|_| Error::Parse {
        line,
        message: format!("`{v}` is not a 64-bit unsigned integer"),
    })
}

fn choice<T: Copy>(line: usize, v: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            Error::Parse {
                line,
                message: format!("`{v}` is not one of {}", names.join("|")),
            }
        })
}

/// Comma-separated numbers.
pub fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| format!("cannot parse `{}` as a number", s.trim()))
        })
        .collect()
}
