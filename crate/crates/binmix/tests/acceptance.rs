//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

#![allow(clippy::needless_range_loop)]

use std::fs;
use std::path::Path;
use std::time::Instant;

use binmix::series::parse_series;
use binmix::snapshot::{checkpoint_path, read_snapshot, write_snapshot};
use binmix::study::{eps_sweep, mms_study, stability_study};
use binmix::{run_simulation, RunConfig, RunSummary};
use binmix_core::grid::laplacian;
use binmix_core::linsolve::solve_helmholtz;
use binmix_core::verify::{thermo_monte_carlo, MmsKind};
use binmix_core::{AprioriMonitor, BcMode, Grid, ScalarField, SolverConfig, Stepper};

/// Spinodal setup shared by the long-run criteria.
const SPINODAL: &str = "\
grid.nx = 64
grid.bc = paper
phys.kappa = 5e-3
phys.beta = 0.05
phys.gamma = 1
phys.nu = 1
phys.lambda = 0.5
phys.u = -1
phys.epsilon = 0
phys.stab_S = 0
time.dt = 1e-3
time.t_end = 1
ic.kind = uniform_noise
ic.amplitude = 3e-4
ic.seed = 1
output.snapshot_every = 1000
";

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: u32, name: &'static str, pass: bool, detail: String) -> Line {
    Line { id, name, pass, detail }
}

fn config(text: &str, overrides: &[(&str, &str)]) -> RunConfig {
    let mut t = text.to_string();
    for (k, v) in overrides {
        let lines: Vec<String> = t
            .lines()
            .filter(|l| !l.starts_with(&format!("{k} ")))
            .map(String::from)
            .collect();
        t = lines.join("\n") + &format!("\n{k} = {v}\n");
    }
    RunConfig::parse(&t).expect("acceptance config parses")
}

fn criteria_1_2_4_8(tmp: &Path) -> Vec<Line> {
    let cfg = config(SPINODAL, &[]);
    let area = cfg.grid.area();
    let dx = cfg.grid.dx();
    let t0 = Instant::now();
    let run = run_simulation(&cfg, &tmp.join("spinodal"), None);
    let secs1 = t0.elapsed().as_secs_f64();
    let run = match run {
        Ok(r) => r,
        Err(e) => {
            let msg = format!("run failed: {e}");
            return [
                (1, "mass conservation"),
                (2, "energy dissipation"),
                (4, "incompressibility"),
                (8, "a priori bounds"),
            ]
            .into_iter()
            .map(|(i, n)| line(i, n, false, msg.clone()))
            .collect();
        }
    };
    let mut out = Vec::new();

    let drift = run.mass_drift();
    let tol = 1e-9 * area;
    out.push(line(
        1,
        "mass conservation",
        drift <= tol && secs1 <= 60.0,
        format!("max |mass - mass0| = {drift:.3e} (tol {tol:.1e}), {secs1:.1}s"),
    ));

    let t0 = Instant::now();
    let half = config(SPINODAL, &[("time.dt", "5e-4"), ("output.snapshot_every", "0")]);
    let c2 = run_simulation(&half, &tmp.join("spinodal_half"), None).map(|h| {
        let (r1, r2) = (run.max_budget_residual(), h.max_budget_residual());
        let (v1, v2) = (run.energy_violations(), h.energy_violations());
        let ratio = r1 / r2;
        (
            v1 == 0 && v2 == 0 && ratio >= 3.0,
            format!(
                "energy rises beyond residual: {v1}/{v2}; max |res| {r1:.3e} -> {r2:.3e}, ratio {ratio:.2} (need >= 3)"
            ),
        )
    });
    let secs2 = secs1 + t0.elapsed().as_secs_f64();
    out.push(match c2 {
        Ok((pass, d)) => line(
            2,
            "energy dissipation",
            pass && secs2 <= 180.0,
            format!("{d}, {secs2:.1}s"),
        ),
        Err(e) => line(2, "energy dissipation", false, format!("half-step run failed: {e}")),
    });

    let div = run.max_divergence();
    let dtol = 1e-8 / dx;
    out.push(line(
        4,
        "incompressibility",
        div <= dtol,
        format!(
            "max div = {div:.3e} over {} steps (tol {dtol:.1e})",
            run.records.len() - 1
        ),
    ));

    out.push(criterion_8(tmp, &run));
    out
}

/// Continues the criterion-1 run from its t = 1 checkpoint to t = 2.
fn criterion_8(tmp: &Path, first: &RunSummary) -> Line {
    let long = config(SPINODAL, &[("time.t_end", "2"), ("output.snapshot_every", "0")]);
    let cp = checkpoint_path(&tmp.join("spinodal"), 1000);
    match run_simulation(&long, &tmp.join("spinodal_long"), Some(&cp)) {
        Ok(second) => {
            let mut m = AprioriMonitor::default();
            first.records.iter().chain(&second.records).for_each(|r| m.push(r));
            let v = m.verdict();
            let acc = v.accumulators;
            let worst = [acc.acc62(), acc.acc63(), acc.acc64()].into_iter().fold(0.0, f64::max);
            let finite = first.records.iter().chain(&second.records).all(|r| r.is_finite());
            line(
                8,
                "a priori bounds",
                v.bounded && worst <= 1e6 && finite,
                format!(
                    "t = {:.1}, bounded {}, acc62/63/64 = {:.3e}/{:.3e}/{:.3e}, max quantity {:.3e}",
                    second.state.t,
                    v.bounded,
                    acc.acc62(),
                    acc.acc63(),
                    acc.acc64(),
                    v.max_quantity
                ),
            )
        }
        Err(e) => line(8, "a priori bounds", false, format!("run failed: {e}")),
    }
}

fn criterion_3() -> Line {
    let t0 = Instant::now();
    let s = thermo_monte_carlo(10_000, 2024);
    let secs = t0.elapsed().as_secs_f64();
    line(
        3,
        "thermodynamic cancellation",
        s.passed(1e-13) && secs <= 1.0,
        format!(
            "max |residual| = {:.3e} (tol 1e-13), min production = {:.3e}, {secs:.3}s",
            s.max_residual, s.min_entropy
        ),
    )
}

fn criterion_5() -> Line {
    let cfg = config(SPINODAL, &[("time.t_end", "0.5")]);
    let t0 = Instant::now();
    match eps_sweep(&cfg, &[0.1, 0.05, 0.025, 0.0]) {
        Ok(t) => {
            let secs = t0.elapsed().as_secs_f64();
            let diffs: Vec<String> = t.rows.iter().map(|r| format!("{}:{:.3e}", r.eps, r.phi_diff)).collect();
            let mono = t.check_monotone();
            line(
                5,
                "eps -> 0 convergence",
                mono.is_ok() && secs <= 300.0,
                format!(
                    "|phi^eps - phi^0| {} slope {:.3}{}, {secs:.1}s",
                    diffs.join(" "),
                    t.phi_slope.unwrap_or(f64::NAN),
                    mono.err().map_or(String::new(), |e| format!(" ({e})"))
                ),
            )
        }
        Err(e) => line(5, "eps -> 0 convergence", false, format!("sweep failed: {e}")),
    }
}

fn criterion_6() -> Line {
    let cfg = config(SPINODAL, &[("time.t_end", "0.5")]);
    let t0 = Instant::now();
    match stability_study(&cfg, 1e-4) {
        Ok(rep) => {
            let secs = t0.elapsed().as_secs_f64();
            line(
                6,
                "continuous dependence",
                rep.passed() && secs <= 240.0,
                format!(
                    "r(T) ratio {:.3} (need [3, 5]), rates {:.3}/{:.3} stable {}, within envelope {}, {secs:.1}s",
                    rep.ratio, rep.runs[0].h_hat, rep.runs[1].h_hat, rep.rate_stable, rep.within_envelope
                ),
            )
        }
        Err(e) => line(6, "continuous dependence", false, format!("study failed: {e}")),
    }
}

const MMS: &str = "\
grid.nx = 32
grid.bc = periodic
phys.kappa = 0.01
phys.stab_S = 2
time.dt = 1e-3
time.t_end = 0.05
";

fn criterion_7() -> Line {
    let t0 = Instant::now();
    let spatial = mms_study(&config(MMS, &[]), MmsKind::Spatial, 3);
    let temporal = mms_study(
        &config(MMS, &[("time.dt", "4e-3"), ("time.t_end", "0.2")]),
        MmsKind::Temporal,
        3,
    );
    let secs = t0.elapsed().as_secs_f64();
    match (spatial, temporal) {
        (Ok(s), Ok(t)) => {
            let ok = s.orders_within(2.0, 0.3) && t.orders_within(1.0, 0.2);
            let f = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
            line(
                7,
                "discretization order",
                ok && secs <= 600.0,
                format!(
                    "spatial 32-128 phi {} v {}; temporal phi {} v {}; {secs:.1}s",
                    f(&s.phi_orders),
                    f(&s.v_orders),
                    f(&t.phi_orders),
                    f(&t.v_orders)
                ),
            )
        }
        (s, t) => line(
            7,
            "discretization order",
            false,
            format!("study failed: {:?} {:?}", s.err(), t.err()),
        ),
    }
}

/// Dense `(aI - bΔ)` assembled column by column from the stencil, solved by
/// Gaussian elimination with partial pivoting.
fn dense_helmholtz(a: f64, b: f64, rhs: &ScalarField) -> Vec<f64> {
    let g = rhs.grid;
    let n = g.cells();
    let mut m = vec![vec![0.0; n + 1]; n];
    for k in 0..n {
        let mut e = ScalarField::zeros(g);
        e.data[k] = 1.0;
        let l = laplacian(&e);
        for i in 0..n {
            m[i][k] = a * e.data[i] - b * l.data[i];
        }
    }
    for i in 0..n {
        m[i][n] = rhs.data[i];
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

fn criterion_9() -> Line {
    let mut worst = 0.0f64;
    for bc in [BcMode::Paper, BcMode::Periodic] {
        let g = Grid::unit(8, bc);
        let rhs = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() + (5.0 * y * x).cos() + x * x);
        for (a, b) in [(1.0, 1.0), (100.0, 0.1), (1.0, 1e-3)] {
            let exact = dense_helmholtz(a, b, &rhs);
            match solve_helmholtz(a, b, &rhs, &SolverConfig::default()) {
                Ok(x) => {
                    let num: f64 = x.data.iter().zip(&exact).map(|(p, q)| (p - q) * (p - q)).sum();
                    let den: f64 = exact.iter().map(|q| q * q).sum();
                    worst = worst.max((num / den).sqrt());
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
    }

    let nu = 0.01;
    let t_end = 0.5;
    let text = format!(
        "grid.nx = 128\ngrid.bc = periodic\nphys.nu = {nu}\nic.amplitude = 0\nic.v_kind = shear\n\
         ic.v_amplitude = 1\ntime.dt = 1e-3\ntime.t_end = {t_end}\n"
    );
    let cfg = config(&text, &[]);
    let decay = (|| -> binmix::Result<f64> {
        let stepper = Stepper::new(cfg.grid, cfg.params)?;
        let s0 = cfg.initial_state()?;
        let ke0 = s0.v.dot(&s0.v);
        let mut s = s0;
        for _ in 0..cfg.steps()? {
            s = stepper.advance_with(&s, &cfg.params.force)?.0;
        }
        Ok(-(s.v.dot(&s.v) / ke0).ln() / t_end)
    })();
    let expected = 2.0 * nu * (2.0 * std::f64::consts::PI).powi(2);
    let (rate, rel) = match decay {
        Ok(r) => (r, (r - expected).abs() / expected),
        Err(_) => (f64::NAN, f64::INFINITY),
    };
    line(
        9,
        "solver correctness",
        worst <= 1e-8 && rel <= 0.1,
        format!(
            "dense-oracle rel err {worst:.2e} (tol 1e-8); KE decay rate {rate:.5} vs {expected:.5} ({:.2}%)",
            100.0 * rel
        ),
    )
}

fn criterion_10(tmp: &Path) -> Line {
    let text = SPINODAL
        .replace("grid.nx = 64", "grid.nx = 32")
        .replace("time.t_end = 1", "time.t_end = 0.1")
        .replace("output.snapshot_every = 1000", "output.snapshot_every = 50");
    let cfg = config(&text, &[]);
    let result = (|| -> binmix::Result<(bool, String)> {
        let (a, b, c) = (tmp.join("det_a"), tmp.join("det_b"), tmp.join("det_c"));
        run_simulation(&cfg, &a, None)?;
        run_simulation(&cfg, &b, None)?;
        let mut identical = true;
        for name in [
            "series.csv",
            "phi_000100.bin",
            "mu_000100.bin",
            "u_000100.bin",
            "v_000100.bin",
            "p_000100.bin",
        ] {
            identical &= fs::read(a.join(name)).ok() == fs::read(b.join(name)).ok();
        }

        let (state, step, acc) = read_snapshot(&checkpoint_path(&a, 100))?;
        let rt = tmp.join("roundtrip");
        fs::create_dir_all(&rt).unwrap();
        write_snapshot(&state, step, &acc, &rt)?;
        let (back, _, acc2) = read_snapshot(&checkpoint_path(&rt, 100))?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let exact = bits(&back.phi.data) == bits(&state.phi.data)
            && bits(&back.v.u) == bits(&state.v.u)
            && bits(&back.v.v) == bits(&state.v.v)
            && bits(&back.mu.data) == bits(&state.mu.data)
            && bits(&back.p.data) == bits(&state.p.data)
            && back.t.to_bits() == state.t.to_bits()
            && acc2 == acc;

        run_simulation(&cfg, &c, Some(&checkpoint_path(&a, 50)))?;
        let ra = parse_series(&fs::read_to_string(a.join("series.csv")).unwrap()).unwrap();
        let rc = parse_series(&fs::read_to_string(c.join("series.csv")).unwrap()).unwrap();
        let mut restart_err = 0.0f64;
        for (x, y) in ra[51..].iter().zip(&rc) {
            for k in 0..13 {
                restart_err = restart_err.max((x[k] - y[k]).abs() / x[k].abs().max(1e-300));
            }
        }
        let restart_ok = rc.len() == 50 && restart_err <= 1e-8;
        Ok((
            identical && exact && restart_ok,
            format!("repeat identical {identical}, snapshot bit-exact {exact}, restart max rel diff {restart_err:.2e}"),
        ))
    })();
    match result {
        Ok((pass, d)) => line(10, "determinism and IO", pass, d),
        Err(e) => line(10, "determinism and IO", false, format!("failed: {e}")),
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mut lines = criteria_1_2_4_8(tmp.path());
    lines.push(criterion_3());
    lines.push(criterion_5());
    lines.push(criterion_6());
    lines.push(criterion_7());
    lines.push(criterion_9());
    lines.push(criterion_10(tmp.path()));
    lines.sort_by_key(|l| l.id);
    let mut failed = 0;
    for l in &lines {
        println!(
            "criterion {:>2} {:<28} {}  {}",
            l.id,
            l.name,
            if l.pass { "PASS" } else { "FAIL" },
            l.detail
        );
        failed += usize::from(!l.pass);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
