use num_complex::Complex64;

use super::accumulator::NormAccumulator;
use super::config::SolverConfig;
use super::friedrichs::{friedrichs_projectors, rhs_w_band, BandMasks, FriedrichsMasks};
use super::integrator::IfRk4;
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::heat::{decay_rates, require_divergence_free, HeatFlow};
use crate::nonlinear::{divergence_at, DealiasedBand, Snapshots};
use crate::quadrature::simpson_uniform;

/// Amplitude beyond which a run is declared blown up.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Per-step diagnostics of a run.
#[derive(Clone, Debug, Default)]
pub struct RunRecord {
    pub times: Vec<f64>,
    /// `||u(t)||^2_{L^2}`.
    pub energy: Vec<f64>,
    /// `nu_h ||grad_h u(t)||^2_{L^2}`.
    pub diss_h: Vec<f64>,
    /// `nu_3 ||d_3 u(t)||^2_{L^2}`.
    pub diss_v: Vec<f64>,
    pub div_residual: Vec<f64>,
    /// `(t, ||.||_{B^{0,1/2}(t)}, ||.||_{B^{-1+2/p,1/2}_p(t)})` at snapshot times.
    pub norms: Vec<(f64, f64, f64)>,
    /// Time and cause of a blow-up, if any.
    pub blow_up: Option<(f64, String)>,
}

impl RunRecord {
    fn push(&mut self, t: f64, u: &VectorField, nu_h: f64, nu_3: f64) {
        let g = u.grid();
        let vol = g.volume();
        let [k1, k2, k3] = [0, 1, 2].map(|a| g.wavenumbers(a));
        let [c0, c1, c2] = u.comps().each_ref().map(|c| c.coeffs());
        let (mut e, mut h, mut v, mut div) = (0.0, 0.0, 0.0, 0.0f64);
        let mut idx = 0;
        for &a in &k1 {
            for &b in &k2 {
                let xh = a * a + b * b;
                for &x3 in &k3 {
                    let (p, q, r) = (c0[idx], c1[idx], c2[idx]);
                    let z = p.norm_sqr() + q.norm_sqr() + r.norm_sqr();
                    e += z;
                    h += z * xh;
                    v += z * x3 * x3;
                    div = div.max((p * a + q * b + r * x3).norm_sqr() / z.max(1.0));
                    idx += 1;
                }
            }
        }
        self.times.push(t);
        self.energy.push(e * vol);
        self.diss_h.push(nu_h * h * vol);
        self.diss_v.push(nu_3 * v * vol);
        self.div_residual.push(div.sqrt());
    }

    pub fn max_divergence_residual(&self) -> f64 {
        self.div_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `2 int_0^t (nu_h ||grad_h u||^2 + nu_3 ||d_3 u||^2)` by Simpson's rule
    /// (the record is uniformly spaced).
    pub fn dissipated(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        let h = self.times[1] - self.times[0];
        let d: Vec<f64> = self.diss_h.iter().zip(&self.diss_v).map(|(a, b)| 2.0 * (a + b)).collect();
        simpson_uniform(h, &d)
    }

    /// `|E(T) + dissipated - E(0)| / E(0)`.
    pub fn energy_balance_error(&self) -> f64 {
        let (Some(e0), Some(e1)) = (self.energy.first(), self.energy.last()) else {
            return 0.0;
        };
        if *e0 == 0.0 {
            return (e1 + self.dissipated()).abs();
        }
        (e1 + self.dissipated() - e0).abs() / e0
    }
}

/// Outcome of [`solve_u`] or [`solve_w`].
#[derive(Clone, Debug)]
pub struct Run {
    pub record: RunRecord,
    pub accumulator: NormAccumulator,
    pub snapshots: Snapshots,
    pub final_state: VectorField,
}

impl Run {
    pub fn blew_up(&self) -> bool {
        self.record.blow_up.is_some()
    }
}

pub(crate) fn flatten(v: &VectorField) -> Vec<Complex64> {
    v.comps().iter().flat_map(|c| c.coeffs().iter().copied()).collect()
}

pub(crate) fn unflatten(grid: Grid, s: &[Complex64]) -> VectorField {
    let n = grid.size();
    let f = |i: usize| SpectralField::from_coeffs(grid, s[i * n..(i + 1) * n].to_vec()).unwrap();
    VectorField::new(f(0), f(1), f(2)).unwrap()
}

/// Band coefficients of the three components, one block each.
fn gather_vector(band: &DealiasedBand, v: &VectorField) -> Vec<Complex64> {
    v.comps().iter().flat_map(|c| band.gather(c.coeffs())).collect()
}

/// Full flattened spectra from band blocks, added onto `base`.
fn scatter_onto(band: &DealiasedBand, s: &[Complex64], mut base: Vec<Complex64>) -> Vec<Complex64> {
    let (n, b) = (band.grid.size(), band.len());
    for c in 0..3 {
        for (m, &k) in band.idx.iter().enumerate() {
            base[c * n + k] += s[c * b + m];
        }
    }
    base
}

/// `-P (div (u (x) u))` with the two-thirds rule on inputs and output.
pub fn rhs_u(u: &VectorField) -> VectorField {
    let grid = *u.grid();
    let band = DealiasedBand::new(&grid);
    let out = rhs_u_band(&band, &gather_vector(&band, u));
    unflatten(grid, &scatter_onto(&band, &out, vec![Complex64::default(); 3 * grid.size()])).with_claim(true)
}

fn rhs_u_band(band: &DealiasedBand, state: &[Complex64]) -> Vec<Complex64> {
    let n = band.len();
    let t = band.square([&state[..n], &state[n..2 * n], &state[2 * n..]]);
    let mut out = vec![Complex64::default(); 3 * n];
    for (m, xi) in band.xi.iter().enumerate() {
        let mut d = divergence_at(xi, &band.tensor_at(&t, m));
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if k2 > 0.0 {
            let dot = (d[0] * xi[0] + d[1] * xi[1] + d[2] * xi[2]) / k2;
            for (c, x) in d.iter_mut().zip(xi) {
                *c -= dot * *x;
            }
        }
        for c in 0..3 {
            out[c * n + m] = -d[c];
        }
    }
    band.recycle(t);
    out
}

fn check_amplitude(t: f64, state: &[Complex64], vol: f64) -> Result<()> {
    let e: f64 = state.iter().map(|z| z.norm_sqr()).sum::<f64>() * vol;
    if !e.is_finite() {
        return Err(Error::BlowUp { time: t, reason: "non-finite amplitude".into() });
    }
    if e.sqrt() > BLOW_UP_NORM {
        return Err(Error::BlowUp { time: t, reason: format!("L2 norm {:e} above threshold", e.sqrt()) });
    }
    Ok(())
}

/// Time-stepper state for the full system. Dealiased modes are integrated;
/// the rest of the data only decays.
#[derive(Clone, Debug)]
pub struct UEvolution {
    grid: Grid,
    band: DealiasedBand,
    integ: IfRk4,
    state: Vec<Complex64>,
    /// Initial content off the band with its decay rates.
    outside: Option<(Vec<Complex64>, Vec<f64>)>,
    t: f64,
}

impl UEvolution {
    pub fn new(u0: &VectorField, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        if *u0.grid() != config.grid {
            return Err(Error::GridMismatch);
        }
        require_divergence_free(u0)?;
        let band = DealiasedBand::new(&config.grid);
        let rates = decay_rates(&config.grid, config.nu_h, config.nu_3);
        let band_rates = band.gather(&rates);
        let state = gather_vector(&band, u0);
        let mut rest = flatten(u0);
        let n = config.grid.size();
        for c in 0..3 {
            band.idx.iter().for_each(|&k| rest[c * n + k] = Complex64::default());
        }
        let outside = rest.iter().any(|z| *z != Complex64::default()).then_some((rest, rates));
        Ok(Self { grid: config.grid, integ: IfRk4::new(&band_rates, config.step_size()), band, state, outside, t: 0.0 })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> VectorField {
        let n = self.grid.size();
        let base = match &self.outside {
            Some((rest, rates)) => rest.iter().enumerate().map(|(i, z)| z * (-rates[i % n] * self.t).exp()).collect(),
            None => vec![Complex64::default(); 3 * n],
        };
        unflatten(self.grid, &scatter_onto(&self.band, &self.state, base)).with_claim(true)
    }

    pub fn step(&mut self) -> Result<()> {
        let band = &self.band;
        let next = self.integ.step(self.t, &self.state, |_, s| Ok(rhs_u_band(band, s)))?;
        self.t += self.integ.dt();
        check_amplitude(self.t, &next, self.grid.volume())?;
        self.state = next;
        Ok(())
    }
}

/// Time-stepper state for the Friedrichs system of the remainder `w`.
#[derive(Clone, Debug)]
pub struct WEvolution {
    grid: Grid,
    band: DealiasedBand,
    /// `u_F(0)` and its decay rates on the band.
    hh: Vec<Complex64>,
    hh_rates: Vec<f64>,
    integ: IfRk4,
    masks: FriedrichsMasks,
    band_masks: BandMasks,
    flow: HeatFlow,
    state: Vec<Complex64>,
    t: f64,
}

impl WEvolution {
    /// Starts from `w = P_n(u_0ll)` with the two-thirds rule applied.
    pub fn new(dec: &DyadicDecomposition, u0: &VectorField, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        if *u0.grid() != config.grid || *dec.grid() != config.grid {
            return Err(Error::GridMismatch);
        }
        require_divergence_free(u0)?;
        let flow = HeatFlow::new(dec, u0, config.nu_h, config.nu_3)?;
        let (_, ll) = dec.split_hh_ll(u0);
        let masks = friedrichs_projectors(&config.grid, config.n_cutoff)?;
        let w0 = masks.apply_n(&ll.dealias());
        let band = DealiasedBand::new(&config.grid);
        let rates = band.gather(&decay_rates(&config.grid, config.nu_h, config.nu_3));
        Ok(Self {
            grid: config.grid,
            hh: gather_vector(&band, flow.initial()),
            hh_rates: band.gather(flow.rates()),
            integ: IfRk4::new(&rates, config.step_size()),
            band_masks: masks.on_band(&band),
            masks,
            flow,
            state: gather_vector(&band, &w0),
            band,
            t: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> VectorField {
        let base = vec![Complex64::default(); 3 * self.grid.size()];
        unflatten(self.grid, &scatter_onto(&self.band, &self.state, base)).with_claim(true)
    }

    pub fn heat_flow(&self) -> &HeatFlow {
        &self.flow
    }

    pub fn masks(&self) -> &FriedrichsMasks {
        &self.masks
    }

    /// `u_F(t)` on the band.
    fn uf_band(&self, t: f64) -> Vec<Complex64> {
        let decay: Vec<f64> = self.hh_rates.iter().map(|r| (-r * t).exp()).collect();
        self.hh.chunks_exact(decay.len()).flat_map(|c| c.iter().zip(&decay).map(|(z, e)| z * e)).collect()
    }

    pub fn step(&mut self) -> Result<()> {
        let grid = self.grid;
        let next = self.integ.step(self.t, &self.state, |t, s| Ok(rhs_w_band(&self.band, &self.band_masks, s, &self.uf_band(t))))?;
        self.t += self.integ.dt();
        check_amplitude(self.t, &next, grid.volume())?;
        self.state = next;
        Ok(())
    }
}

trait Evolution {
    fn time(&self) -> f64;
    fn state(&self) -> VectorField;
    fn step(&mut self) -> Result<()>;
}

impl Evolution for UEvolution {
    fn time(&self) -> f64 {
        UEvolution::time(self)
    }
    fn state(&self) -> VectorField {
        UEvolution::state(self)
    }
    fn step(&mut self) -> Result<()> {
        UEvolution::step(self)
    }
}

impl Evolution for WEvolution {
    fn time(&self) -> f64 {
        WEvolution::time(self)
    }
    fn state(&self) -> VectorField {
        WEvolution::state(self)
    }
    fn step(&mut self) -> Result<()> {
        WEvolution::step(self)
    }
}

fn drive<E: Evolution>(
    mut ev: E,
    config: &SolverConfig,
    bands: bool,
    mut observer: impl FnMut(f64, &VectorField),
) -> Result<Run> {
    let dec = DyadicDecomposition::new(config.grid);
    let mut acc = NormAccumulator::new(dec, config.p, config.nu_h, config.nu_3);
    let mut record = RunRecord::default();
    let (mut snap_t, mut snap_f) = (Vec::new(), Vec::new());
    let steps = config.steps();
    let mut u = ev.state();
    for s in 0..=steps {
        let t = ev.time();
        record.push(t, &u, config.nu_h, config.nu_3);
        acc.update_vertical(t, &u)?;
        let last = s == steps;
        if bands && (s % config.accumulate_every == 0 || last) {
            acc.update_bands(t, &u)?;
        }
        observer(t, &u);
        if s % config.record_every == 0 || last {
            snap_t.push(t);
            snap_f.push(u.clone());
            record.norms.push((t, acc.b012_norm(), acc.besov_time_norm()));
        }
        if last {
            break;
        }
        match ev.step() {
            Ok(()) => u = ev.state(),
            Err(Error::BlowUp { time, reason }) => {
                record.blow_up = Some((time, reason));
                if snap_t.last() != Some(&t) {
                    snap_t.push(t);
                    snap_f.push(u.clone());
                    record.norms.push((t, acc.b012_norm(), acc.besov_time_norm()));
                }
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Run { record, accumulator: acc, snapshots: Snapshots::new(snap_t, snap_f)?, final_state: u })
}

/// Pseudo-spectral solve of the full system from `u0`.
pub fn solve_u(u0: &VectorField, config: &SolverConfig) -> Result<Run> {
    solve_u_observed(u0, config, |_, _| {})
}

/// [`solve_u`] calling `observer(t, u(t))` at every step.
pub fn solve_u_observed(u0: &VectorField, config: &SolverConfig, observer: impl FnMut(f64, &VectorField)) -> Result<Run> {
    drive(UEvolution::new(u0, config)?, config, true, observer)
}

/// Solve of the Friedrichs system for `w = u - u_F`. Only the vertical
/// statistics entering `B^{0,1/2}(T)` are accumulated.
pub fn solve_w(u0: &VectorField, config: &SolverConfig) -> Result<Run> {
    solve_w_observed(u0, config, |_, _| {})
}

pub fn solve_w_observed(u0: &VectorField, config: &SolverConfig, observer: impl FnMut(f64, &VectorField)) -> Result<Run> {
    let dec = DyadicDecomposition::new(config.grid);
    drive(WEvolution::new(&dec, u0, config)?, config, false, observer)
}

#[derive(Clone, Debug)]
pub struct ContinuousDependenceReport {
    /// `||u_01 - u_02||_{L^2}`.
    pub delta0: f64,
    /// `sup_t ||u_1(t) - u_2(t)||_{L^2} / ||u_01 - u_02||_{L^2}`.
    pub sup_ratio: f64,
    /// The ratio at every step.
    pub ratios: Vec<(f64, f64)>,
    /// `||u_i||_{B^{-1+2/p,1/2}_p(T)}`.
    pub norms: [f64; 2],
    /// `nu_h^{-1} (nu_h^{-(p+1)/(p-1)} + nu_3^{-(p+1)/(p-1)}) (sum_i ||u_i||)^{2p/(p-1)}`.
    pub exponent: f64,
    /// `ln(sup_ratio) / exponent`: the smallest constant making the
    /// exponential stability bound hold on this run.
    pub fitted_constant: f64,
    pub blow_up: bool,
}

/// Runs the full system from two data in lockstep and measures how their
/// distance evolves.
pub fn continuous_dependence_run(u01: &VectorField, u02: &VectorField, config: &SolverConfig) -> Result<ContinuousDependenceReport> {
    if config.nu_3 == 0.0 {
        return Err(Error::ZeroVerticalViscosity);
    }
    let mut a = UEvolution::new(u01, config)?;
    let mut b = UEvolution::new(u02, config)?;
    let dec = DyadicDecomposition::new(config.grid);
    let mut acc = [0, 1].map(|_| NormAccumulator::new(dec.clone(), config.p, config.nu_h, config.nu_3));
    let delta0 = u01.try_sub(u02)?.l2_norm();
    let mut ratios = Vec::new();
    let mut blow_up = false;
    let steps = config.steps();
    for s in 0..=steps {
        let t = a.time();
        let (ua, ub) = (a.state(), b.state());
        let d = ua.try_sub(&ub)?.l2_norm();
        ratios.push((t, if delta0 > 0.0 { d / delta0 } else { 1.0 }));
        let last = s == steps;
        for (acc, u) in acc.iter_mut().zip([&ua, &ub]) {
            acc.update_vertical(t, u)?;
            if s % config.accumulate_every == 0 || last {
                acc.update_bands(t, u)?;
            }
        }
        if last {
            break;
        }
        match a.step().and_then(|_| b.step()) {
            Ok(()) => {}
            Err(Error::BlowUp { .. }) => {
                blow_up = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let sup_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let norms = [acc[0].besov_time_norm(), acc[1].besov_time_norm()];
    let p = config.p;
    let e = (p + 1.0) / (p - 1.0);
    let exponent = (config.nu_h.powf(-e) + config.nu_3.powf(-e)) / config.nu_h * (norms[0] + norms[1]).powf(2.0 * p / (p - 1.0));
    let fitted_constant = if exponent > 0.0 { sup_ratio.ln().max(0.0) / exponent } else { 0.0 };
    Ok(ContinuousDependenceReport { delta0, sup_ratio, ratios, norms, exponent, fitted_constant, blow_up })
}
