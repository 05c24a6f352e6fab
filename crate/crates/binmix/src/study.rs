//! Verification studies with member runs on worker threads.

use std::fmt::Write as _;
use std::path::Path;
use std::thread;

use binmix_core::verify::mms::{check_periodic, check_solenoidal, member_count};
use binmix_core::verify::{
    epsilon_member, epsilon_table, mms_member, mms_table, perturbed_member, unit_perturbation, ConvergenceTable,
    EpsilonTable, GrowthReport, MmsKind, PerturbationRun, ThermoSummary, TrigFamily,
};
use binmix_core::Result as CoreResult;

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Runs `jobs` concurrently and returns their results in order.
fn parallel<T: Send>(jobs: Vec<Box<dyn FnOnce() -> CoreResult<T> + Send + '_>>) -> Result<Vec<T>> {
    thread::scope(|s| {
        let handles: Vec<_> = jobs.into_iter().map(|j| s.spawn(j)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("member thread panicked").map_err(Error::from))
            .collect()
    })
}

/// Target order and tolerance of each study kind.
pub fn expected_order(kind: MmsKind) -> (f64, f64) {
    match kind {
        MmsKind::Spatial => (2.0, 0.3),
        MmsKind::Temporal => (1.0, 0.2),
    }
}

/// Manufactured-solution study on the configured (periodic) grid, with the
/// steady trigonometric family for the spatial kind and the time-dependent
/// one for the temporal kind.
pub fn mms_study(cfg: &RunConfig, kind: MmsKind, levels: usize) -> Result<ConvergenceTable> {
    let mut sc = cfg.study();
    sc.levels = levels;
    sc.validate()?;
    check_periodic(&sc)?;
    let family = match kind {
        MmsKind::Spatial => TrigFamily::steady(cfg.grid.lx, cfg.grid.ly),
        MmsKind::Temporal => TrigFamily::unsteady(cfg.grid.lx, cfg.grid.ly),
    };
    check_solenoidal(&family, &sc.grid, sc.t_end)?;
    let (sc, family) = (&sc, &family);
    let jobs = (0..member_count(sc, kind))
        .map(|l| Box::new(move || mms_member(family, sc, kind, l)) as Box<dyn FnOnce() -> _ + Send>)
        .collect();
    let members = parallel(jobs)?;
    Ok(mms_table(kind, sc, &members))
}

pub fn mms_csv(t: &ConvergenceTable) -> String {
    let mut s = String::from("n,dt,phi_err,v_err,phi_order,v_order\n");
    for (k, r) in t.rows.iter().enumerate() {
        let o = |v: &Vec<f64>| {
            k.checked_sub(1)
                .and_then(|i| v.get(i))
                .map_or(String::new(), |x| format!("{x:.6}"))
        };
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{},{}",
            r.n,
            r.dt,
            r.phi_err,
            r.v_err,
            o(&t.phi_orders),
            o(&t.v_orders)
        );
    }
    s
}

/// ε sweep from the configured initial data; the table is returned unchecked.
pub fn eps_sweep(cfg: &RunConfig, eps: &[f64]) -> Result<EpsilonTable> {
    let mut sc = cfg.study();
    sc.eps_list = eps.to_vec();
    sc.validate()?;
    sc.validate_eps_list()?;
    let (phi0, v0) = cfg.ic.build(cfg.grid)?;
    let (sc, phi0, v0) = (&sc, &phi0, &v0);
    let jobs = eps
        .iter()
        .map(|&e| Box::new(move || Ok((e, epsilon_member(sc, phi0, v0, e)?))) as Box<dyn FnOnce() -> _ + Send>)
        .collect();
    let members = parallel(jobs)?;
    Ok(epsilon_table(&members)?)
}

pub fn eps_csv(t: &EpsilonTable) -> String {
    let mut s = String::from("eps,phi_diff,v_diff\n");
    for r in &t.rows {
        let _ = writeln!(s, "{},{:.16e},{:.16e}", r.eps, r.phi_diff, r.v_diff);
    }
    s
}

/// Base run plus perturbations of size δ and δ/2 along fixed unit noise.
pub fn stability_study(cfg: &RunConfig, delta: f64) -> Result<GrowthReport> {
    let mut sc = cfg.study();
    sc.delta = delta;
    sc.validate()?;
    let (phi0, v0) = cfg.ic.build(cfg.grid)?;
    let eta = unit_perturbation(cfg.grid, cfg.study.perturbation_seed);
    let (sc, phi0, v0, eta) = (&sc, &phi0, &v0, &eta);
    let jobs = [0.0, delta, 0.5 * delta]
        .into_iter()
        .map(|d| Box::new(move || perturbed_member(sc, phi0, v0, eta, d)) as Box<dyn FnOnce() -> _ + Send>)
        .collect();
    let mut tr = parallel(jobs)?;
    let fine = tr.pop().unwrap();
    let coarse = tr.pop().unwrap();
    let base = &tr[0];
    Ok(GrowthReport::new(
        PerturbationRun::new(delta, base, &coarse)?,
        PerturbationRun::new(0.5 * delta, base, &fine)?,
    ))
}

pub fn stability_csv(rep: &GrowthReport) -> String {
    let [a, b] = &rep.runs;
    let mut s = format!("t,r_{},r_{}\n", a.delta, b.delta);
    for k in 0..a.times.len() {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", a.times[k], a.r[k], b.r[k]);
    }
    s
}

pub fn thermo_report(s: &ThermoSummary) -> String {
    format!(
        "samples {}\nmax |cancel_residual| {:.3e}\nmin entropy production {:.3e}\n",
        s.samples, s.max_residual, s.min_entropy
    )
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
}
