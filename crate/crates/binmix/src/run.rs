//! Time-stepping driver with series, checkpoints and images on disk.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use binmix_core::diagnostics::{record_initial, Accumulators};
use binmix_core::{AprioriMonitor, DiagnosticsRecord, MonitorVerdict, State, Stepper};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::render::render_pgm;
use crate::series::SeriesWriter;
use crate::snapshot::{read_snapshot, write_snapshot};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub first_step: usize,
    pub last_step: usize,
    pub state: State,
    /// Every step's record, starting with the initial one on fresh runs.
    pub records: Vec<DiagnosticsRecord>,
    pub verdict: MonitorVerdict,
    pub series: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

impl RunSummary {
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records.first().map_or(0.0, |r| r.mass);
        self.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max)
    }

    pub fn max_budget_residual(&self) -> f64 {
        self.records.iter().map(|r| r.budget_residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_divergence(&self) -> f64 {
        self.records.iter().map(|r| r.div_max).fold(0.0, f64::max)
    }

    /// Steps where the energy rose by more than that step's budget residual.
    pub fn energy_violations(&self) -> usize {
        self.records
            .windows(2)
            .filter(|w| {
                let rise = w[1].energy - w[0].energy;
                rise > w[1].budget_residual.abs() + 1e-14 * w[0].energy.abs().max(1.0)
            })
            .count()
    }

    pub fn report(&self) -> String {
        let last = self.records.last().copied().unwrap_or_default();
        format!(
            "steps {}..{} to t = {:.6}\n\
             energy            {:.10e}\n\
             mass drift        {:.3e}\n\
             max |budget res|  {:.3e}\n\
             max div           {:.3e}\n\
             energy rises      {}\n\
             a priori bounded  {} (max quantity {:.3e})\n\
             series            {}\n",
            self.first_step,
            self.last_step,
            self.state.t,
            last.energy,
            self.mass_drift(),
            self.max_budget_residual(),
            self.max_divergence(),
            self.energy_violations(),
            self.verdict.bounded,
            self.verdict.max_quantity,
            self.series.display(),
        )
    }
}

/// Runs `cfg` to `time.t_end`, writing `series.csv`, checkpoints and images
/// into `out`. With `restart`, continues from a checkpoint instead of the
/// configured initial data.
pub fn run_simulation(cfg: &RunConfig, out: &Path, restart: Option<&Path>) -> Result<RunSummary> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let stepper = Stepper::new(cfg.grid, cfg.params)?;
    let total = cfg.steps()?;
    let (mut state, first_step, mut acc) = match restart {
        Some(path) => {
            let (s, step, acc) = read_snapshot(path)?;
            if s.grid() != cfg.grid {
                return Err(Error::format(path, "checkpoint grid differs from the configuration"));
            }
            (s, step, acc)
        }
        None => (cfg.initial_state()?, 0, Accumulators::default()),
    };

    let series = out.join("series.csv");
    let file = File::create(&series).map_err(|e| Error::io(&series, e))?;
    let mut writer = SeriesWriter::new(BufWriter::new(file));
    let mut monitor = AprioriMonitor::default();
    let mut records = Vec::new();
    let mut checkpoints = Vec::new();
    let write_err = |e| Error::io(&series, e);

    let snap = |state: &State, step: usize, acc: &Accumulators, cps: &mut Vec<PathBuf>| -> Result<()> {
        if cfg.output.snapshot_every > 0 && step.is_multiple_of(cfg.output.snapshot_every) {
            cps.push(write_snapshot(state, step, acc, out)?);
            if cfg.output.render {
                render_pgm(&state.phi, &out.join(format!("phi_{step:06}.pgm")))?;
            }
        }
        Ok(())
    };

    if restart.is_none() {
        let rec = record_initial(&stepper, &state);
        writer.write(&rec).map_err(write_err)?;
        monitor.push(&rec);
        records.push(rec);
        snap(&state, 0, &acc, &mut checkpoints)?;
    }
    for step in first_step + 1..=total {
        let (next, rec) = stepper.advance(&state, &mut acc)?;
        state = next;
        if step.is_multiple_of(cfg.output.series_every) {
            writer.write(&rec).map_err(write_err)?;
        }
        monitor.push(&rec);
        records.push(rec);
        snap(&state, step, &acc, &mut checkpoints)?;
    }
    writer.flush().map_err(write_err)?;

    Ok(RunSummary {
        first_step,
        last_step: total.max(first_step),
        state,
        records,
        verdict: monitor.verdict(),
        series,
        checkpoints,
    })
}
