//! Experiment drivers: the epsilon sweep, the smallness study and the
//! continuous-dependence comparison.

use ans_core::besov::{b_neg1_inf_q, besov_b012, besov_static, besov_static_multi, prop1_norms, BesovParams};
use ans_core::heat::{HeatFlow, HeatFlowParams};
use ans_core::nonlinear::{forcing_norm_infinite, forcing_norm_l1t_b012, EFunctionalReport};
use ans_core::solver::{continuous_dependence_run, solve_w, ContinuousDependenceReport, Run};
use ans_core::{DyadicDecomposition, Grid, SpectralField, VectorField};
use num_complex::Complex64;

use crate::config::{DataKind, ExperimentConfig};
use crate::data::{gen_oscillatory, gen_random_bandlimited, modulated_profile, snapped_carrier, OscillatoryDataSpec};
use crate::error::CliError;
use crate::output::{base_params, Table, Value};

/// Ratio of consecutive times of the geometric grid behind `[u_0]_{E^p_inf}`.
pub const FORCING_TIME_RATIO: f64 = 1.25;

/// Least-squares slope and intercept of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly).0
}

/// The datum described by `cfg.data`.
pub fn initial_data(cfg: &ExperimentConfig) -> Result<VectorField, CliError> {
    let g = *cfg.grid();
    let d = &cfg.data;
    Ok(match d.kind {
        DataKind::Oscillatory => gen_oscillatory(&OscillatoryDataSpec::new(d.epsilon, d.q), &g)?.scaled(d.amplitude),
        DataKind::Random => gen_random_bandlimited(&g, cfg.seed, &d.bands, d.amplitude),
        DataKind::Shear => shear(&g, d.amplitude),
    })
}

/// `(0, a sin x_1, 0)`.
pub fn shear(grid: &Grid, amplitude: f64) -> VectorField {
    let mut f = ans_core::SpectralField::zeros(*grid);
    f.set_coeff([1, 0, 0], Complex64::new(0.0, -amplitude / 2.0));
    f.set_coeff([-1, 0, 0], Complex64::new(0.0, amplitude / 2.0));
    let z = ans_core::SpectralField::zeros(*grid);
    VectorField::new(z.clone(), f, z).expect("shared grid")
}

/// Largest `|m_1|` and `|m_2|` carrying content.
pub fn horizontal_reach(comps: &[&SpectralField]) -> [i64; 2] {
    let mut reach = [0, 0];
    for c in comps {
        let g = c.grid();
        let [_, n2, n3] = g.n();
        for (idx, z) in c.coeffs().iter().enumerate() {
            if *z != Complex64::default() {
                let (i1, i2) = (idx / (n2 * n3), (idx / n3) % n2);
                reach[0] = reach[0].max(g.mode(0, i1).abs());
                reach[1] = reach[1].max(g.mode(1, i2).abs());
            }
        }
    }
    reach
}

/// `grid` with each horizontal count raised, if needed, to a multiple of 16
/// of at least `need`.
pub fn refined_grid(grid: &Grid, need: [i64; 2]) -> Result<Grid, CliError> {
    let [n1, n2, n3] = grid.n();
    let up = |n: usize, need: i64| n.max((need.max(0) as usize).div_ceil(16) * 16);
    Ok(Grid::with_lengths([up(n1, need[0]), up(n2, need[1]), n3], grid.lengths())?)
}

/// A grid on which the rectangle rule integrates `|f|^p` exactly for every
/// trigonometric polynomial with the given reach and even integer `p`.
pub fn lp_quadrature_grid(grid: &Grid, reach: [i64; 2], p: f64) -> Result<Grid, CliError> {
    let m = p.ceil() as i64;
    refined_grid(grid, reach.map(|k| m * k + 1))
}

/// A grid on which dealiased products of fields with the given reach are exact.
pub fn product_grid(grid: &Grid, reach: [i64; 2]) -> Result<Grid, CliError> {
    refined_grid(grid, reach.map(|k| 6 * k))
}

/// One measured quantity at one `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    /// The snapped carrier wavenumber standing in for `1/epsilon`.
    pub carrier: f64,
    pub quantity: &'static str,
    /// `alpha`, `sigma` or `p`, depending on the quantity.
    pub exponent: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub quantity: &'static str,
    pub exponent: f64,
    pub slope: f64,
    /// The predicted slope, when there is one.
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SlopeFit>,
}

impl SweepReport {
    pub fn series(&self, quantity: &str, exponent: f64) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.quantity == quantity && r.exponent == exponent).map(|r| (r.epsilon, r.value)).collect()
    }

    pub fn fit(&self, quantity: &str, exponent: f64) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.quantity == quantity && f.exponent == exponent)
    }
}

/// For every `epsilon` of the sweep: the three one-scale norms of the planar
/// profile `e^{i x_1/eps} phi(x_h)` on the horizontal plane of the grid and,
/// on three-dimensional grids, the Besov norms, the forcing part and the
/// smallness functional of `u_0^{eps,q}`. Slopes are fitted in log-log.
pub fn run_epsilon_sweep(cfg: &ExperimentConfig) -> Result<SweepReport, CliError> {
    let g = *cfg.grid();
    let s = &cfg.sweep;
    let [n1, n2, _] = g.n();
    let [l1, l2, l3] = g.lengths();
    let plane = Grid::with_lengths([n1, n2, 1], [l1, l2, l3])?;
    let ring = OscillatoryDataSpec::new(1.0, s.q).ring_h;
    let mut ps = vec![4.0];
    ps.extend(s.p.iter().copied().filter(|&p| p != 4.0));
    let p_max = ps.iter().copied().fold(s.q, f64::max);
    let on = |base: &Grid, fine: Grid| if s.refine { fine } else { *base };
    let mut rows = Vec::new();
    for &eps in &s.epsilon {
        let carrier = snapped_carrier(&g, eps).1;
        let mut push = |quantity, exponent, value| rows.push(SweepRow { epsilon: eps, carrier, quantity, exponent, value });
        let phi = modulated_profile(&plane, eps, ring)?.scaled(s.amplitude);
        let quad = on(&plane, lp_quadrature_grid(&plane, horizontal_reach(&[&phi]), s.q)?);
        let (phi, plane_dec) = (phi.resampled(quad)?, DyadicDecomposition::new(quad));
        for &alpha in &s.alpha {
            let n = prop1_norms(&plane_dec, &phi, s.sigma[0], alpha, s.q)?;
            push("dot_b1", alpha, n.dot_b1);
        }
        for &sigma in &s.sigma {
            let n = prop1_norms(&plane_dec, &phi, sigma, s.alpha[0], s.q)?;
            push("dot_binf", sigma, n.dot_binf);
            push("tilde_b", sigma, n.tilde_b);
        }
        if g.is_planar() {
            continue;
        }
        let u0 = gen_oscillatory(&OscillatoryDataSpec::new(eps, s.q), &g)?.scaled(s.amplitude);
        let reach = horizontal_reach(&u0.comps().each_ref());
        let quad = on(&g, lp_quadrature_grid(&g, reach, p_max)?);
        let besov = besov_static_multi(&DyadicDecomposition::new(quad), &u0.resampled(quad)?, &ps)?;
        let prod = on(&g, product_grid(&g, reach)?);
        let dec = DyadicDecomposition::new(prod);
        let flow = HeatFlow::new(&dec, &u0.resampled(prod)?, cfg.solver.nu_h, cfg.solver.nu_3)?;
        let forcing = forcing_norm_infinite(&dec, &flow, FORCING_TIME_RATIO)?;
        push("forcing", 0.0, forcing);
        for (&p, &b) in ps.iter().zip(&besov) {
            push("besov", p, b);
            if s.p.contains(&p) {
                push("e_total", p, b + forcing);
            }
        }
    }
    let mut report = SweepReport { rows, fits: Vec::new() };
    let mut keys: Vec<(&'static str, f64)> = Vec::new();
    for r in &report.rows {
        if !keys.contains(&(r.quantity, r.exponent)) {
            keys.push((r.quantity, r.exponent));
        }
    }
    for (quantity, exponent) in keys {
        let (x, y): (Vec<f64>, Vec<f64>) = report.series(quantity, exponent).into_iter().unzip();
        let expected = match quantity {
            "dot_b1" | "dot_binf" | "tilde_b" => Some(exponent),
            "besov" | "e_total" => Some(2.0 / s.q - 2.0 / exponent),
            _ => None,
        };
        report.fits.push(SlopeFit { quantity, exponent, slope: log_log_slope(&x, &y), expected });
    }
    Ok(report)
}

pub fn sweep_tables(cfg: &ExperimentConfig, report: &SweepReport) -> (Table, Table) {
    let mut params = base_params(cfg);
    params.push(("q", cfg.sweep.q.into()));
    params.push(("amplitude", cfg.sweep.amplitude.into()));
    params.push(("refine", cfg.sweep.refine.into()));
    let mut rows = Table::with_params(&params, &["epsilon", "carrier", "quantity", "exponent", "value"]);
    for r in &report.rows {
        rows.push(&params, vec![r.epsilon.into(), r.carrier.into(), r.quantity.into(), r.exponent.into(), r.value.into()]);
    }
    let eps: Vec<String> = cfg.sweep.epsilon.iter().map(|e| format!("{e:.16e}")).collect();
    params.push(("epsilons", eps.join(" ").into()));
    let mut fits = Table::with_params(&params, &["quantity", "exponent", "slope", "expected"]);
    for f in &report.fits {
        let expected = f.expected.map_or(Value::S(String::new()), Value::F);
        fits.push(&params, vec![f.quantity.into(), f.exponent.into(), f.slope.into(), expected]);
    }
    (rows, fits)
}

/// Besov parameters of `cfg` at exponent `p`.
pub fn besov_at(cfg: &ExperimentConfig, p: f64) -> Result<BesovParams, CliError> {
    Ok(BesovParams::new(p, cfg.solver.nu_h, cfg.solver.nu_3)?)
}

/// `[u_0]_{E^p_T}` split into its parts; zero data give zero. The Besov
/// part is measured on a grid where the rectangle rule is exact for the
/// data, the forcing part on one where its products are exact.
pub fn e_functional_to(u0: &VectorField, besov: &BesovParams, horizon: f64) -> Result<EFunctionalReport, CliError> {
    let g = *u0.grid();
    let reach = horizontal_reach(&u0.comps().each_ref());
    let prod = product_grid(&g, reach)?;
    let dec = DyadicDecomposition::new(prod);
    let flow = HeatFlow::new(&dec, &u0.resampled(prod)?, besov.nu_h, besov.nu_3)?;
    let forcing_part = match flow.fastest_rate() {
        Some(fast) => {
            let params = HeatFlowParams::geometric(besov.nu_h, besov.nu_3, (1e-3 / fast).min(horizon / 2.0), FORCING_TIME_RATIO, horizon)?;
            forcing_norm_l1t_b012(&dec, &u0.resampled(prod)?, &params)?
        }
        None => 0.0,
    };
    let quad = lp_quadrature_grid(&g, reach, besov.p)?;
    let besov_part = besov_static(&DyadicDecomposition::new(quad), &u0.resampled(quad)?, besov)?;
    Ok(EFunctionalReport { besov_part, forcing_part, total: besov_part + forcing_part, horizon })
}

/// The amplitude `c` with `c B + c^2 F = target`.
pub fn amplitude_for_target(besov_part: f64, forcing_part: f64, target: f64) -> f64 {
    if forcing_part == 0.0 {
        return target / besov_part;
    }
    let (b, f) = (besov_part, forcing_part);
    2.0 * target / (b + (b * b + 4.0 * f * target).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallnessRow {
    pub amplitude: f64,
    pub e_besov: f64,
    pub e_forcing: f64,
    /// `[u_0]_{E^p_T}`.
    pub e_total: f64,
    /// `||w||_{B^{0,1/2}(T)}` at the end of the run.
    pub w_norm: f64,
    /// `w_norm / e_total`, zero for zero data.
    pub ratio: f64,
    pub blow_up: Option<f64>,
    /// Blow-up, or a ratio above twice that of the smallest nonzero amplitude.
    pub flagged: bool,
}

/// `solve_w` for every amplitude of the ladder applied to the datum of
/// `cfg.data` (taken at unit amplitude).
pub fn run_smallness_study(cfg: &ExperimentConfig) -> Result<Vec<SmallnessRow>, CliError> {
    let mut unit_cfg = cfg.clone();
    unit_cfg.data.amplitude = 1.0;
    let unit = initial_data(&unit_cfg)?;
    let e = e_functional_to(&unit, &cfg.besov, cfg.solver.t_end)?;
    let mut rows: Vec<SmallnessRow> = Vec::new();
    for &a in &cfg.smallness {
        let (eb, ef) = (a.abs() * e.besov_part, a * a * e.forcing_part);
        let run = solve_w(&unit.scaled(a), &cfg.solver)?;
        let w_norm = run.accumulator.b012_norm();
        let total = eb + ef;
        let ratio = if total > 0.0 { w_norm / total } else { 0.0 };
        let blow_up = run.record.blow_up.as_ref().map(|b| b.0);
        rows.push(SmallnessRow { amplitude: a, e_besov: eb, e_forcing: ef, e_total: total, w_norm, ratio, blow_up, flagged: false });
    }
    let reference = rows.iter().filter(|r| r.e_total > 0.0 && r.blow_up.is_none()).min_by(|a, b| a.amplitude.abs().total_cmp(&b.amplitude.abs())).map(|r| r.ratio);
    for r in &mut rows {
        r.flagged = r.blow_up.is_some() || reference.is_some_and(|q| r.ratio > 2.0 * q);
    }
    Ok(rows)
}

pub fn smallness_table(cfg: &ExperimentConfig, rows: &[SmallnessRow]) -> Table {
    let params = data_params(cfg);
    let mut t = Table::with_params(&params, &["amplitude", "e_besov", "e_forcing", "e_total", "w_b012", "ratio", "blow_up", "blow_up_time", "flagged"]);
    for r in rows {
        t.push(
            &params,
            vec![
                r.amplitude.into(),
                r.e_besov.into(),
                r.e_forcing.into(),
                r.e_total.into(),
                r.w_norm.into(),
                r.ratio.into(),
                r.blow_up.is_some().into(),
                r.blow_up.map_or(Value::S(String::new()), Value::F),
                r.flagged.into(),
            ],
        );
    }
    t
}

/// [`base_params`] plus the description of the initial datum.
pub fn data_params(cfg: &ExperimentConfig) -> Vec<(&'static str, Value)> {
    let d = &cfg.data;
    let band = |r: Option<(i32, i32)>| r.map_or(String::new(), |(a, b)| format!("{a}:{b}"));
    let mut params = base_params(cfg);
    params.extend([
        ("data_kind", d.kind.name().into()),
        ("data_epsilon", d.epsilon.into()),
        ("data_q", d.q.into()),
        ("data_amplitude", d.amplitude.into()),
        ("data_k", band(d.bands.k).into()),
        ("data_l", band(d.bands.l).into()),
    ]);
    params
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub full: ContinuousDependenceReport,
    pub half: ContinuousDependenceReport,
    /// `|sup_ratio(delta / 2) / sup_ratio(delta) - 1|`.
    pub change: f64,
}

/// Continuous dependence from the datum of `cfg.data` against a seeded
/// random perturbation of relative size `cfg.compare_delta`, and the same
/// with the perturbation halved.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareReport, CliError> {
    let u0 = initial_data(cfg)?;
    let norm = u0.l2_norm();
    if norm == 0.0 {
        return Err(CliError::Config("compare needs nonzero initial data".into()));
    }
    let dir = gen_random_bandlimited(cfg.grid(), cfg.seed.wrapping_add(1), &cfg.data.bands, 1.0);
    let delta = dir.scaled(cfg.compare_delta * norm / dir.l2_norm());
    let full = continuous_dependence_run(&u0, &u0.try_add(&delta)?, &cfg.solver)?;
    let half = continuous_dependence_run(&u0, &u0.try_add(&delta.scaled(0.5))?, &cfg.solver)?;
    let change = (half.sup_ratio / full.sup_ratio - 1.0).abs();
    Ok(CompareReport { full, half, change })
}

pub fn compare_table(cfg: &ExperimentConfig, r: &CompareReport) -> Table {
    let mut params = data_params(cfg);
    params.push(("compare_delta", cfg.compare_delta.into()));
    let mut t = Table::with_params(&params, &["t", "ratio", "ratio_half"]);
    for ((t0, a), (_, b)) in r.full.ratios.iter().zip(&r.half.ratios) {
        t.push(&params, vec![(*t0).into(), (*a).into(), (*b).into()]);
    }
    t
}

pub fn compare_summary(cfg: &ExperimentConfig, r: &CompareReport) -> Table {
    let mut params = data_params(cfg);
    params.push(("compare_delta", cfg.compare_delta.into()));
    let mut t = Table::with_params(&params, &["perturbation", "delta0", "sup_ratio", "norm_1", "norm_2", "fitted_constant", "blow_up", "change"]);
    for (name, c) in [("full", &r.full), ("half", &r.half)] {
        t.push(
            &params,
            vec![
                name.into(),
                c.delta0.into(),
                c.sup_ratio.into(),
                c.norms[0].into(),
                c.norms[1].into(),
                c.fitted_constant.into(),
                c.blow_up.into(),
                r.change.into(),
            ],
        );
    }
    t
}

/// Norms of one field: `L^2`, `B^{0,1/2}`, `B^{-1+2/p,1/2}_p` for the
/// configured and swept `p`, `B^{-1}_{inf,2}` and `[u]_{E^p_T}`.
pub fn norm_table(cfg: &ExperimentConfig, u: &VectorField) -> Result<Table, CliError> {
    let dec = DyadicDecomposition::new(*u.grid());
    let mut ps = vec![cfg.besov.p];
    ps.extend(cfg.sweep.p.iter().copied().filter(|&p| p != cfg.besov.p));
    let params = base_params(cfg);
    let mut t = Table::with_params(&params, &["quantity", "exponent", "value"]);
    let mut push = |q: &str, e: f64, v: f64| t.push(&params, vec![q.into(), e.into(), v.into()]);
    push("l2", 2.0, u.l2_norm());
    push("b012", 2.0, besov_b012(&dec, u)?);
    for (p, v) in ps.iter().zip(besov_static_multi(&dec, u, &ps)?) {
        push("besov", *p, v);
    }
    push("b_neg1_inf_2", 2.0, b_neg1_inf_q(&dec, u, 2.0)?);
    let e = e_functional_to(u, &cfg.besov, cfg.solver.t_end)?;
    push("e_besov", cfg.besov.p, e.besov_part);
    push("e_forcing", cfg.besov.p, e.forcing_part);
    push("e_total", cfg.besov.p, e.total);
    Ok(t)
}

/// Per-step diagnostics of a run; the accumulated norms fill the snapshot rows.
pub fn record_table(cfg: &ExperimentConfig, run: &Run) -> Table {
    let params = data_params(cfg);
    let r = &run.record;
    let cols = ["t", "energy", "diss_h", "diss_v", "div_residual", "b012_accum", "besov_T_accum"];
    let mut t = Table::with_params(&params, &cols);
    let mut norms = r.norms.iter().peekable();
    for i in 0..r.times.len() {
        let time = r.times[i];
        let (b, bt) = match norms.peek() {
            Some(&&(tn, b, bt)) if tn == time => {
                norms.next();
                (Value::F(b), Value::F(bt))
            }
            _ => (Value::S(String::new()), Value::S(String::new())),
        };
        t.push(&params, vec![time.into(), r.energy[i].into(), r.diss_h[i].into(), r.diss_v[i].into(), r.div_residual[i].into(), b, bt]);
    }
    t
}
