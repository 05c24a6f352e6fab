//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use binmix_core::verify::{thermo_monte_carlo, MmsKind};
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_list, RunConfig};
use crate::error::{Error, Result};
use crate::run::run_simulation;
use crate::study::{
    eps_csv, eps_sweep, expected_order, mms_csv, mms_study, stability_csv, stability_study, thermo_report, write_text,
};

/// Relative tolerance of the pointwise thermodynamic balance.
pub const THERMO_TOL: f64 = 1e-13;

#[derive(Debug, Parser)]
#[command(name = "binmix", version, about = "Phase-field binary mixture flow solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StudyKind {
    Spatial,
    Temporal,
    Both,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Time-step a configuration, writing series, checkpoints and images.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a `state_*.json` checkpoint.
        #[arg(long)]
        restart: Option<PathBuf>,
    },
    /// Manufactured-solution convergence study (periodic grids).
    VerifyMms {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = StudyKind::Both)]
        kind: StudyKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare runs with ε > 0 against ε = 0.
    SweepEps {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, strictly decreasing, ending in 0.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth of perturbations of size δ and δ/2.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the pointwise thermodynamic balance.
    CheckThermo {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `args`, runs the command, prints a summary, and returns the exit
/// status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.cmd) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.clone())
}

fn execute(cmd: Cmd) -> Result<String> {
    match cmd {
        Cmd::Run { config, out, restart } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let s = run_simulation(&cfg, &dir, restart.as_deref())?;
            Ok(s.report())
        }
        Cmd::VerifyMms {
            config,
            levels,
            kind,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let kinds: &[MmsKind] = match kind {
                StudyKind::Spatial => &[MmsKind::Spatial],
                StudyKind::Temporal => &[MmsKind::Temporal],
                StudyKind::Both => &[MmsKind::Spatial, MmsKind::Temporal],
            };
            let mut text = String::new();
            let mut failures = Vec::new();
            for &k in kinds {
                let t = mms_study(&cfg, k, levels)?;
                let name = match k {
                    MmsKind::Spatial => "spatial",
                    MmsKind::Temporal => "temporal",
                };
                let csv = mms_csv(&t);
                write_text(&dir, &format!("mms_{name}.csv"), &csv)?;
                let (target, tol) = expected_order(k);
                text += &format!("{name} study\n{csv}");
                if !t.orders_within(target, tol) {
                    failures.push(format!("{name} orders outside {target} ± {tol}"));
                }
            }
            finish(text, failures)
        }
        Cmd::SweepEps { config, eps, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let list = match eps {
                Some(s) => parse_list(&s).map_err(|m| Error::Core(validation("study.eps", m)))?,
                None => cfg.study.eps.clone(),
            };
            let t = eps_sweep(&cfg, &list)?;
            let csv = eps_csv(&t);
            write_text(&dir, "eps_sweep.csv", &csv)?;
            let text = format!(
                "{csv}slope phi {}\nslope v {}\n",
                fmt_opt(t.phi_slope),
                fmt_opt(t.v_slope)
            );
            match t.check_monotone() {
                Ok(()) => Ok(text),
                Err(e) => finish(text, vec![e.to_string()]),
            }
        }
        Cmd::Stability { config, delta, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out_dir(&cfg, out);
            let rep = stability_study(&cfg, delta.unwrap_or(cfg.study.delta))?;
            write_text(&dir, "stability.csv", &stability_csv(&rep))?;
            let [a, b] = &rep.runs;
            let text = format!(
                "final ratio r_δ/r_δ/2 {:.4} (ok {})\n\
                 fitted rate {:.4} / {:.4} (stable {})\n\
                 within envelope {}\n",
                rep.ratio, rep.ratio_ok, a.h_hat, b.h_hat, rep.rate_stable, rep.within_envelope
            );
            let mut failures = Vec::new();
            if !rep.passed() {
                failures.push("perturbation growth check".into());
            }
            finish(text, failures)
        }
        Cmd::CheckThermo { samples, seed } => {
            let s = thermo_monte_carlo(samples, seed);
            let text = thermo_report(&s);
            let failures = if s.passed(THERMO_TOL) {
                vec![]
            } else {
                vec![format!("residual above {THERMO_TOL:e} or negative production")]
            };
            finish(text, failures)
        }
    }
}

fn validation(key: &'static str, message: String) -> binmix_core::Error {
    binmix_core::Error::Validation { key, message }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.4}"))
}

/// Prints the summary first so a failing check still shows its numbers.
fn finish(text: String, failures: Vec<String>) -> Result<String> {
    if failures.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Error::Failed(failures.join("; ")))
    }
}

/// Convenience for tests: runs with string arguments.
pub fn run_args(args: &[&str]) -> i32 {
    main(std::iter::once("binmix").chain(args.iter().copied()))
}
