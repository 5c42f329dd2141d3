//! The `check` suites: divergence control, Besov scale invariance,
//! Bernstein and embedding constant stability, oracle equivalences and the
//! partition of unity.

use std::collections::BTreeMap;

use ans_core::besov::{b_neg1_inf_q, besov_b012, besov_static_multi};
use ans_core::nonlinear::{convect, trilinear_fj, Snapshots};
use ans_core::solver::{solve_u, solve_w, SolverConfig};
use ans_core::{mixed_norm, mixed_norm_of_samples, Axis, DyadicDecomposition, Grid, PartitionFunction, SpectralField, VectorField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::data::{gen_random_bandlimited, gen_random_scalar, BandRanges};
use crate::error::CliError;
use crate::experiments::{horizontal_reach, lp_quadrature_grid};
use crate::oracles;

pub const DIVERGENCE_TOL: f64 = 1e-8;
pub const SCALE_TOL: f64 = 1e-2;
pub const BERNSTEIN_SPREAD: f64 = 10.0;
pub const EMBEDDING_SPREAD: f64 = 5.0;
pub const DFT_TOL: f64 = 1e-12;
pub const PRODUCT_TOL: f64 = 1e-10;
pub const MIXED_NORM_TOL: f64 = 1e-12;
pub const FJ_TOL: f64 = 1e-8;
pub const PARTITION_TOL: f64 = 1e-10;
pub const CORPUS_SIZE: usize = 100;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub metrics: BTreeMap<String, f64>,
}

impl SuiteResult {
    fn new(name: &str, metrics: BTreeMap<String, f64>, passed: bool) -> Self {
        Self { name: name.into(), passed, seconds: 0.0, metrics }
    }

    pub fn metric(&self, key: &str) -> f64 {
        self.metrics.get(key).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub grid: [usize; 3],
    pub seed: u64,
    pub tampered: bool,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `max / min` and `max / median` of positive values.
fn spreads(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let median = if v.len() % 2 == 1 { v[v.len() / 2] } else { 0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2]) };
    let max = v[v.len() - 1];
    (max / v[0], max / median)
}

fn max_relative(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Largest divergence residual over short `u` and `w` runs from random data.
pub fn divergence_suite(cfg: &ExperimentConfig, steps: usize) -> Result<SuiteResult, CliError> {
    let mut solver: SolverConfig = cfg.solver.clone();
    solver.t_end = steps as f64 * solver.dt;
    solver.record_every = 1;
    let u0 = gen_random_bandlimited(cfg.grid(), cfg.seed, &cfg.data.bands, cfg.data.amplitude);
    let ru = solve_u(&u0, &solver)?;
    let rw = solve_w(&u0, &solver)?;
    let (du, dw) = (ru.record.max_divergence_residual(), rw.record.max_divergence_residual());
    let passed = du <= DIVERGENCE_TOL && dw <= DIVERGENCE_TOL && !ru.blew_up() && !rw.blew_up();
    Ok(SuiteResult::new("divergence", metrics([("max_residual_u", du), ("max_residual_w", dw)]), passed))
}

/// `besov_static` of `a` against `lambda a(lambda x)` for `lambda = 2`,
/// realized as the same coefficients on a box shrunk by two.
pub fn scale_invariance_suite(grid: &Grid, seed: u64) -> Result<SuiteResult, CliError> {
    let ps = [2.0, 4.0, 8.0];
    let u = gen_random_bandlimited(grid, seed, &BandRanges::new((0, 2), (0, 2)), 1.0);
    let small = grid.shrunk(2.0)?;
    let moved = u.comps().clone().map(|c| SpectralField::from_coeffs(small, c.into_coeffs()).expect("same size"));
    let [a, b, c] = moved;
    let v = VectorField::new(a, b, c)?.scaled(2.0);
    let before = besov_static_multi(&DyadicDecomposition::new(*grid), &u, &ps)?;
    let after = besov_static_multi(&DyadicDecomposition::new(small), &v, &ps)?;
    let change = before.iter().zip(&after).map(|(x, y)| (y / x - 1.0).abs()).fold(0.0, f64::max);
    Ok(SuiteResult::new("scale_invariance", metrics([("max_relative_change", change)]), change <= SCALE_TOL))
}

/// `||f||_{L^4_h(L^2_v)}` of the samples of `fields` combined pointwise in
/// quadrature, measured on a grid where the rectangle rule is exact.
fn l4l2_magnitude(fields: &[SpectralField]) -> Result<f64, CliError> {
    let refs: Vec<&SpectralField> = fields.iter().collect();
    let fine = lp_quadrature_grid(fields[0].grid(), horizontal_reach(&refs), 4.0)?;
    let mut acc = vec![0.0; fine.size()];
    for f in fields {
        for (a, v) in acc.iter_mut().zip(f.resampled(fine)?.to_physical()) {
            *a += v * v;
        }
    }
    let samples: Vec<Complex64> = acc.into_iter().map(|a| Complex64::new(a.sqrt(), 0.0)).collect();
    Ok(mixed_norm_of_samples(&fine, &samples, 4.0, 2.0))
}

/// Bernstein ratios `||grad_h a|| / (2^k ||a||)` and `||d_3 a|| / (2^l ||a||)`
/// in `L^4_h(L^2_v)` over `count` seeded fields supported in single
/// horizontal and vertical shells drawn from `shells`.
pub fn bernstein_suite(grid: &Grid, seed: u64, count: usize, shells: (i32, i32)) -> Result<SuiteResult, CliError> {
    let dec = DyadicDecomposition::new(*grid);
    let list: Vec<i32> = (shells.0..=shells.1).collect();
    let (mut rh, mut rv) = (Vec::with_capacity(count), Vec::with_capacity(count));
    for i in 0..count {
        let k = list[i % list.len()];
        let l = list[(i / list.len()) % list.len()];
        let a = dec.delta_hv(&gen_random_scalar(grid, seed.wrapping_add(i as u64), |_| 1.0, 1.0), k, l);
        let norm = l4l2_magnitude(std::slice::from_ref(&a))?;
        let gh = l4l2_magnitude(&[a.partial_derivative(Axis::X1), a.partial_derivative(Axis::X2)])?;
        let gv = l4l2_magnitude(&[a.partial_derivative(Axis::X3)])?;
        rh.push(gh / (f64::from(k).exp2() * norm));
        rv.push(gv / (f64::from(l).exp2() * norm));
    }
    let (sh, sv) = (spreads(&rh).0, spreads(&rv).0);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let m = metrics([
        ("horizontal_spread", sh),
        ("vertical_spread", sv),
        ("horizontal_min", min(&rh)),
        ("horizontal_max", max(&rh)),
        ("vertical_min", min(&rv)),
        ("vertical_max", max(&rv)),
    ]);
    Ok(SuiteResult::new("bernstein", m, sh <= BERNSTEIN_SPREAD && sv <= BERNSTEIN_SPREAD && sh.is_finite() && sv.is_finite()))
}

/// Fitted constants of `B^{0,1/2} -> B^{-1+2/p,1/2}_p -> B^{-1}_{inf,2}`
/// over `count` seeded band-limited fields with band ranges in `[0, top]`.
pub fn embedding_suite(grid: &Grid, seed: u64, count: usize, top: i32) -> Result<SuiteResult, CliError> {
    let ps = [2.0, 4.0, 8.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = vec![Vec::with_capacity(count); ps.len()];
    let mut second = vec![Vec::with_capacity(count); ps.len()];
    for i in 0..count {
        let mut range = || {
            let a = rng.gen_range(0..=top);
            (a, rng.gen_range(a..=top))
        };
        let bands = BandRanges::new(range(), range());
        let u = gen_random_bandlimited(grid, seed.wrapping_add(i as u64), &bands, 1.0);
        let refs: Vec<&SpectralField> = u.comps().iter().collect();
        let fine = lp_quadrature_grid(grid, horizontal_reach(&refs), 8.0)?;
        let u = u.resampled(fine)?;
        let dec = DyadicDecomposition::new(fine);
        let b012 = besov_b012(&dec, &u)?;
        let binf = b_neg1_inf_q(&dec, &u, 2.0)?;
        for (j, b) in besov_static_multi(&dec, &u, &ps)?.into_iter().enumerate() {
            first[j].push(b / b012);
            second[j].push(binf / b);
        }
    }
    let mut m = BTreeMap::new();
    let mut passed = true;
    for (j, p) in ps.iter().enumerate() {
        for (name, c) in [("b012_to_besov", &first[j]), ("besov_to_binf", &second[j])] {
            let s = spreads(c).1;
            passed &= s.is_finite() && s <= EMBEDDING_SPREAD;
            m.insert(format!("{name}_p{p}_max_over_median"), s);
        }
    }
    Ok(SuiteResult::new("embedding", m, passed))
}

fn random_real(grid: &Grid, rng: &mut ChaCha8Rng) -> SpectralField {
    let samples: Vec<f64> = (0..grid.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::forward_transform(&samples, *grid).expect("grid-sized samples")
}

fn random_vector(grid: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let [a, b, c] = [0, 1, 2].map(|_| random_real(grid, rng));
    VectorField::new(a, b, c).expect("shared grid")
}

/// Transform, product, mixed-norm and trilinear paths against the direct
/// computations of [`oracles`] on an `8^3` grid.
pub fn oracle_suite(seed: u64) -> Result<SuiteResult, CliError> {
    let grid = Grid::new(8, 8, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let samples: Vec<Complex64> = (0..grid.size()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let fast = SpectralField::forward_transform_complex(samples.clone(), grid)?;
    let dft = max_relative(fast.coeffs(), &oracles::dft_forward(&grid, &samples));
    let back = max_relative(&fast.to_physical_complex(), &oracles::dft_inverse(&grid, fast.coeffs()));

    let (u, a) = (random_vector(&grid, &mut rng), random_vector(&grid, &mut rng));
    let fast = convect(&u, &a)?;
    let slow = oracles::convect(&u, &a);
    let product = (0..3).map(|i| max_relative(fast.comp(i).coeffs(), slow.comp(i).coeffs())).fold(0.0, f64::max);

    let f = random_real(&grid, &mut rng);
    let values = oracles::dft_inverse(&grid, f.coeffs());
    let exps = [(4.0, 2.0), (2.0, 2.0), (1.0, 3.0), (f64::INFINITY, 2.0), (3.0, f64::INFINITY)];
    let mut mixed = 0.0f64;
    for (p, q) in exps {
        let exact = oracles::mixed_norm(&grid, &values, p, q);
        mixed = mixed.max((mixed_norm(&f, p, q)? / exact - 1.0).abs());
    }

    let dec = DyadicDecomposition::new(grid);
    let horizon = 0.75;
    let times: Vec<f64> = (0..=6).map(|i| horizon * i as f64 / 6.0).collect();
    let (su, sa) = (Snapshots::frozen(&u, times.clone())?, Snapshots::frozen(&a, times)?);
    let mut fj = 0.0f64;
    for j in dec.l_range() {
        let exact = oracles::frozen_fj(&u, &a, j, horizon);
        fj = fj.max((trilinear_fj(&dec, &su, &sa, j)? - exact).abs() / exact.max(f64::MIN_POSITIVE));
    }

    let m = metrics([("dft", dft), ("inverse_dft", back), ("product", product), ("mixed_norm", mixed), ("trilinear_fj", fj)]);
    let passed = dft <= DFT_TOL && back <= DFT_TOL && product <= PRODUCT_TOL && mixed <= MIXED_NORM_TOL && fj <= FJ_TOL;
    Ok(SuiteResult::new("oracles", m, passed))
}

/// Partition of unity over every nonzero resolvable magnitude on each
/// axis, and vanishing of `phi` outside `(3/4, 8/3)`.
pub fn partition_suite(grid: &Grid, phi: PartitionFunction) -> SuiteResult {
    let dec = DyadicDecomposition::with_partition(*grid, phi);
    let sum_error = |mags: &[f64], symbols: Vec<std::borrow::Cow<'_, [f64]>>| {
        mags.iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| (symbols.iter().map(|s| s[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let h = sum_error(dec.horizontal_magnitudes(), dec.k_range().map(|k| dec.h_symbol(k)).collect());
    let v = sum_error(dec.vertical_magnitudes(), dec.l_range().map(|l| dec.v_symbol(l)).collect());
    let outside = (0..=400)
        .map(|i| i as f64 / 100.0)
        .filter(|&t| !(0.75..=8.0 / 3.0).contains(&t))
        .map(|t| phi.eval(t).abs())
        .fold(0.0, f64::max);
    let m = metrics([("horizontal_sum_error", h), ("vertical_sum_error", v), ("outside_support", outside)]);
    let passed = h <= PARTITION_TOL && v <= PARTITION_TOL && outside == 0.0;
    SuiteResult::new("partition_of_unity", m, passed)
}

/// Shells `[2, log2(n/3) - 2]` for the smallest axis, or `[1, 2]` when
/// that range is empty.
pub fn bernstein_shells(grid: &Grid) -> (i32, i32) {
    let n = grid.n().into_iter().filter(|&n| n > 1).min().unwrap_or(1);
    let hi = ((n as f64 / 3.0).log2() - 2.0).floor() as i32;
    if hi >= 2 {
        (2, hi)
    } else {
        (1, 2)
    }
}

fn timed(f: impl FnOnce() -> Result<SuiteResult, CliError>) -> Result<SuiteResult, CliError> {
    let start = std::time::Instant::now();
    let mut r = f()?;
    r.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Every suite on the configured grid. With `tamper`, the partition suite
/// runs on `phi(tau) = chi(tau) - chi(5 tau / 2)`, whose support is too wide.
pub fn run_checks(cfg: &ExperimentConfig, tamper: bool) -> Result<CheckReport, CliError> {
    let grid = *cfg.grid();
    let phi = if tamper { PartitionFunction::with_ratio(2.5) } else { PartitionFunction::new() };
    let suites = vec![
        timed(|| divergence_suite(cfg, 20))?,
        timed(|| scale_invariance_suite(&grid, cfg.seed))?,
        timed(|| bernstein_suite(&grid, cfg.seed, CORPUS_SIZE, bernstein_shells(&grid)))?,
        timed(|| embedding_suite(&grid, cfg.seed, CORPUS_SIZE, 1))?,
        timed(|| oracle_suite(cfg.seed))?,
        timed(|| Ok(partition_suite(&grid, phi)))?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    Ok(CheckReport { grid: grid.n(), seed: cfg.seed, tampered: tamper, passed, suites })
}
