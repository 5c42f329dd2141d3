//! Acceptance criteria 1-13, one pass/fail line each. Arguments select a
//! subset by number (`cargo test --test acceptance -- 4 5`).

use std::cell::RefCell;
use std::process::Command;
use std::time::{Duration, Instant};

use ans_cli::checks::{bernstein_shells, bernstein_suite, divergence_suite, embedding_suite, oracle_suite, scale_invariance_suite, SuiteResult};
use ans_cli::config::{ExperimentConfig, Overrides};
use ans_cli::data::{gen_oscillatory, gen_random_bandlimited, gen_random_weighted, BandRanges, OscillatoryDataSpec};
use ans_cli::experiments::{amplitude_for_target, e_functional_to, horizontal_reach, lp_quadrature_grid, run_compare, run_epsilon_sweep, shear};
use ans_core::besov::{besov_static_multi, BesovParams};
use ans_core::heat::{verify_decay_lemma24, HeatFlow, HeatFlowParams};
use ans_core::solver::{solve_u, solve_u_observed, solve_w, SolverConfig};
use ans_core::{DyadicDecomposition, Grid};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const NU_H: f64 = 0.1;
const NU_3: f64 = 0.01;
const SEED: u64 = 7;

thread_local! {
    static RESIDUALS: RefCell<Vec<(&'static str, f64)>> = const { RefCell::new(Vec::new()) };
}

fn note_residual(run: &'static str, r: f64) {
    RESIDUALS.with(|v| v.borrow_mut().push((run, r)));
}

fn config(command: &str, text: &str) -> Result<ExperimentConfig, ans_cli::error::CliError> {
    ExperimentConfig::from_text(command, text, &Overrides::default())
}

fn solver(n: [usize; 3], dt: f64, t_end: f64) -> Result<SolverConfig, ans_core::Error> {
    let mut s = SolverConfig::new(Grid::new(n[0], n[1], n[2])?, NU_H, NU_3);
    s.dt = dt;
    s.t_end = t_end;
    s.record_every = 1000;
    s.accumulate_every = 1000;
    s.validate()?;
    Ok(s)
}

fn c1_shear() -> Outcome {
    let s = solver([64, 64, 64], 1e-3, 1.0)?;
    let u0 = shear(&s.grid, 1.0);
    let mut err = 0.0f64;
    let start = Instant::now();
    let unit = u0.l2_norm();
    let run = solve_u_observed(&u0, &s, |t, u| {
        let a = (-NU_H * t).exp();
        err = err.max(u.try_sub(&u0.scaled(a)).expect("shared grid").l2_norm() / (a * unit));
    })?;
    let secs = start.elapsed().as_secs_f64();
    note_residual("shear", run.record.max_divergence_residual());
    Ok((err <= 1e-8 && secs <= 120.0 && !run.blew_up(), format!("max relative L2 error {err:.3e} (<= 1e-8), solve {secs:.1} s (<= 120 s)")))
}

fn c2_energy() -> Outcome {
    let s = solver([64, 64, 64], 1e-3, 1.0)?;
    let u0 = gen_random_bandlimited(&s.grid, SEED, &BandRanges::new((0, 2), (0, 2)), 1e-2);
    let run = solve_u(&u0, &s)?;
    let e = run.record.energy_balance_error();
    note_residual("energy", run.record.max_divergence_residual());
    Ok((e <= 1e-6 && !run.blew_up(), format!("relative energy balance error {e:.3e} (<= 1e-6)")))
}

fn c3_divergence() -> Outcome {
    let mut runs = RESIDUALS.with(|v| v.borrow().clone());
    if runs.is_empty() {
        let cfg = config("check", "")?;
        let r = divergence_suite(&cfg, 100)?;
        runs = vec![("u (32^3)", r.metric("max_residual_u")), ("w (32^3)", r.metric("max_residual_w"))];
    }
    let worst = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let list: Vec<String> = runs.iter().map(|(n, r)| format!("{n} {r:.1e}")).collect();
    Ok((worst <= 1e-8, format!("max divergence residual {worst:.3e} (<= 1e-8) over runs [{}]", list.join(", "))))
}

fn c4_planar_scaling() -> Outcome {
    let text = "grid.n1 = 512\ngrid.n2 = 512\ngrid.n3 = 1\nsweep.epsilon = 0.125, 0.0625, 0.03125, 0.015625, 0.0078125\nsweep.q = 4\nsweep.alpha = 0.5, 1\nsweep.sigma = 0.5, 1";
    let cfg = config("sweep-eps", text)?;
    let start = Instant::now();
    let report = run_epsilon_sweep(&cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs <= 60.0;
    let mut parts = Vec::new();
    for (q, e) in [("dot_b1", 0.5), ("dot_b1", 1.0), ("dot_binf", 0.5), ("dot_binf", 1.0)] {
        let slope = report.fit(q, e).ok_or("missing fit")?.slope;
        ok &= (slope - e).abs() <= 0.1;
        parts.push(format!("{q}({e}) {slope:.3}"));
    }
    Ok((ok, format!("slopes {} (each within 0.1 of its exponent), {secs:.1} s (<= 60 s)", parts.join(", "))))
}

fn c5_functional_scaling() -> Outcome {
    let n = [128, 128, 64];
    let g = Grid::new(n[0], n[1], n[2])?;
    let first = gen_oscillatory(&OscillatoryDataSpec::new(0.25, 4.0), &g)?;
    let quad = lp_quadrature_grid(&g, horizontal_reach(&first.comps().each_ref()), 4.0)?;
    let b4 = besov_static_multi(&DyadicDecomposition::new(quad), &first.resampled(quad)?, &[4.0])?[0];
    let amplitude = 1e-3 * NU_H / b4;
    let text = format!(
        "grid.n1 = {}\ngrid.n2 = {}\ngrid.n3 = {}\nsweep.epsilon = 0.25, 0.125, 0.0625, 0.03125\nsweep.p = 8\nsweep.q = 4\nsweep.amplitude = {amplitude:e}",
        n[0], n[1], n[2]
    );
    let cfg = config("sweep-eps", &text)?;
    let start = Instant::now();
    let report = run_epsilon_sweep(&cfg)?;
    let secs = start.elapsed().as_secs_f64();
    let slope = report.fit("e_total", 8.0).ok_or("missing fit")?.slope;
    let b4: Vec<f64> = report.series("besov", 4.0).into_iter().map(|r| r.1).collect();
    let (lo, hi) = (b4.iter().copied().fold(f64::INFINITY, f64::min), b4.iter().copied().fold(0.0, f64::max));
    let variation = hi / lo - 1.0;
    let forcing: Vec<f64> = report.series("forcing", 0.0).into_iter().map(|r| r.1).collect();
    let share = forcing.iter().zip(report.series("e_total", 8.0)).map(|(f, e)| f / e.1).fold(0.0, f64::max);
    let ok = (0.15..=0.35).contains(&slope) && variation <= 0.15 && secs <= 600.0;
    Ok((
        ok,
        format!(
            "E^8 slope {slope:.3} (in [0.15, 0.35], target 0.25), B4 variation {:.1}% (<= 15%), amplitude {amplitude:.3e}, forcing share <= {share:.1e}, {secs:.1} s (<= 600 s)",
            100.0 * variation
        ),
    ))
}

fn suite_line(r: &SuiteResult, keys: &[&str]) -> String {
    keys.iter().map(|k| format!("{k} {:.3e}", r.metric(k))).collect::<Vec<_>>().join(", ")
}

fn c6_scale() -> Outcome {
    let r = scale_invariance_suite(&Grid::new(64, 64, 64)?, SEED)?;
    Ok((r.passed, format!("{} (<= 1e-2)", suite_line(&r, &["max_relative_change"]))))
}

fn c7_bernstein() -> Outcome {
    let g = Grid::new(64, 64, 64)?;
    let shells = bernstein_shells(&g);
    let r = bernstein_suite(&g, SEED, 100, shells)?;
    Ok((r.passed, format!("shells {shells:?}, {} (<= 10)", suite_line(&r, &["horizontal_spread", "vertical_spread"]))))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn c8_decay() -> Outcome {
    let g = Grid::new(32, 32, 32)?;
    let dec = DyadicDecomposition::new(g);
    let bands = BandRanges::new((0, 3), (0, 2));
    let flat = |xi: [f64; 3]| bands.weight(xi) * xi[0].hypot(xi[1]).max(1.0).powf(-0.5) / xi[2].abs().max(1.0);
    let u0 = gen_random_weighted(&g, SEED, flat, 1.0);
    let flow = HeatFlow::new(&dec, &u0, NU_H, NU_3)?;
    let params = HeatFlowParams::for_flow(&flow, 1.1)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [1.0, 2.0] {
        let report = verify_decay_lemma24(&dec, &u0, &params, q, 4.0)?;
        let rows: Vec<_> = report.rows.iter().filter(|r| (0..=3).contains(&r.k) && (0..=2).contains(&r.l)).collect();
        let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let over = ratios.iter().copied().fold(0.0, f64::max) / median(&mut ratios);
        ok &= rows.len() >= 3 && spread <= 10.0 && over <= 5.0;
        parts.push(format!("q={q}: {} bands, spread {spread:.2} (<= 10), max/median {over:.2} (<= 5)", rows.len()));
    }
    Ok((ok, parts.join("; ")))
}

fn c9_embedding() -> Outcome {
    let r = embedding_suite(&Grid::new(64, 64, 64)?, SEED, 100, 1)?;
    let worst = r.metrics.values().copied().fold(0.0, f64::max);
    Ok((r.passed, format!("worst max/median {worst:.2} (<= 5) over p in {{2, 4, 8}} and both embeddings")))
}

fn c10_small_data() -> Outcome {
    let text = "grid.n1 = 64\ngrid.n2 = 64\ngrid.n3 = 64\nsolver.dt = 0.02\nsolver.t_end = 10\ndata.kind = oscillatory\ndata.epsilon = 0.0625";
    let cfg = config("evolve-w", text)?;
    let unit = gen_oscillatory(&OscillatoryDataSpec::new(cfg.data.epsilon, cfg.data.q), cfg.grid())?;
    let besov = BesovParams::new(cfg.besov.p, NU_H, NU_3)?;
    let e1 = e_functional_to(&unit, &besov, cfg.solver.t_end)?;
    let c = amplitude_for_target(e1.besov_part, e1.forcing_part, 0.99e-3 * NU_H);
    let u0 = unit.scaled(c);
    let e = c * e1.besov_part + c * c * e1.forcing_part;
    let start = Instant::now();
    let run = solve_w(&u0, &cfg.solver)?;
    let secs = start.elapsed().as_secs_f64();
    note_residual("small-data w", run.record.max_divergence_residual());
    let w = run.accumulator.b012_norm();
    let ok = e <= 1e-3 * NU_H && w <= 10.0 * e && !run.blew_up() && secs <= 900.0;
    Ok((ok, format!("E_T {e:.3e} (<= {:.1e}), ||w||_B012(T) {w:.3e} = {:.2e} E_T (<= 10), no blow-up: {}, {secs:.1} s", 1e-3 * NU_H, w / e, !run.blew_up())))
}

fn c11_dependence() -> Outcome {
    let cfg = config("compare", "solver.dt = 0.001\nsolver.t_end = 1\ncompare.delta = 1e-4")?;
    let r = run_compare(&cfg)?;
    let ok = r.full.sup_ratio.is_finite() && r.half.sup_ratio.is_finite() && !r.full.blow_up && !r.half.blow_up && r.change <= 0.1;
    let last = |c: &ans_core::solver::ContinuousDependenceReport| c.ratios.last().map_or(f64::NAN, |x| x.1);
    Ok((
        ok,
        format!(
            "sup ratio {:.6} and {:.6} at half delta, change {:.2e} (<= 0.1); ratio at T {:.6} and {:.6}",
            r.full.sup_ratio,
            r.half.sup_ratio,
            r.change,
            last(&r.full),
            last(&r.half)
        ),
    ))
}

fn c12_oracles() -> Outcome {
    let r = oracle_suite(SEED)?;
    Ok((r.passed, suite_line(&r, &["dft", "inverse_dft", "product", "mixed_norm", "trilinear_fj"])))
}

fn c13_check() -> Outcome {
    let dir = tempfile::tempdir()?;
    let bin = env!("CARGO_BIN_EXE_ans");
    let start = Instant::now();
    let status = Command::new(bin).args(["check", "--out"]).arg(dir.path()).output()?;
    let secs = start.elapsed();
    let json = dir.path().join("checks.json").exists();
    let tampered = Command::new(bin).args(["check", "--tamper", "--out"]).arg(dir.path()).output()?;
    let ok = status.status.code() == Some(0) && secs <= Duration::from_secs(300) && json && tampered.status.code() == Some(4);
    Ok((
        ok,
        format!(
            "ans check exit {:?} in {:.1} s (<= 300 s), report written: {json}; --tamper exit {:?} (expects 4)",
            status.status.code(),
            secs.as_secs_f64(),
            tampered.status.code()
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "exact shear solution", c1_shear),
        (2, "energy identity", c2_energy),
        (4, "planar norm scaling", c4_planar_scaling),
        (5, "smallness functional scaling", c5_functional_scaling),
        (6, "Besov scale invariance", c6_scale),
        (7, "Bernstein constant stability", c7_bernstein),
        (8, "heat decay ratios", c8_decay),
        (9, "embedding chain", c9_embedding),
        (10, "small-data non-blow-up", c10_small_data),
        (11, "continuous dependence", c11_dependence),
        (12, "oracle equivalences", c12_oracles),
        (13, "check subcommand", c13_check),
        (3, "divergence residual", c3_divergence),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.trim_start_matches('C').parse().ok()).collect();
    let mut results = Vec::new();
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!("C{id:<2} {} {name}: {detail} [{secs:.1} s]", if passed { "PASS" } else { "FAIL" });
        results.push((id, passed));
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
