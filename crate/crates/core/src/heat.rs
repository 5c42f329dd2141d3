//! The anisotropic heat semigroup and the free evolution `u_F` of the hh part.

use num_complex::Complex64;

use crate::besov::{band_matrices, besov_static, column_energy, BesovParams, Components};
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::fft::{self, Direction, HORIZONTAL_AXES};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::quadrature::{check_times, exponential_tail, geometric_times, lq_time};

/// Viscosities and the snapshot times `0 = t_0 < ... < t_M = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatFlowParams {
    pub nu_h: f64,
    pub nu_3: f64,
    times: Vec<f64>,
}

impl HeatFlowParams {
    pub fn new(nu_h: f64, nu_3: f64, times: Vec<f64>) -> Result<Self> {
        check_viscosity(nu_h, nu_3)?;
        check_times(&times)?;
        if times[0] != 0.0 || *times.last().unwrap() <= 0.0 {
            return Err(Error::InvalidParameter("time grid must start at 0 and end at T > 0".into()));
        }
        Ok(Self { nu_h, nu_3, times })
    }

    /// Geometric grid from `t_first` to `t_end` with the given ratio.
    pub fn geometric(nu_h: f64, nu_3: f64, t_first: f64, ratio: f64, t_end: f64) -> Result<Self> {
        Self::new(nu_h, nu_3, geometric_times(t_first, ratio, t_end)?)
    }

    /// Grid resolving the fastest mode of `flow` at the start and reaching
    /// the time where its slowest mode has decayed by `e^{-12}`.
    pub fn for_flow(flow: &HeatFlow, ratio: f64) -> Result<Self> {
        match (flow.slowest_rate(), flow.fastest_rate()) {
            (Some(lo), Some(hi)) => Self::geometric(flow.nu_h, flow.nu_3, 1e-3 / hi, ratio, (12.0 / lo).max(1e-3 / hi)),
            _ => Self::new(flow.nu_h, flow.nu_3, vec![0.0, 1.0]),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

fn check_viscosity(nu_h: f64, nu_3: f64) -> Result<()> {
    if !(nu_h > 0.0 && nu_h.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu_h = {nu_h} must be positive")));
    }
    if !(nu_3 >= 0.0 && nu_3.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu_3 = {nu_3} must be nonnegative")));
    }
    Ok(())
}

/// `nu_h |xi_h|^2 + nu_3 xi_3^2` per storage index.
pub fn decay_rates(grid: &Grid, nu_h: f64, nu_3: f64) -> Vec<f64> {
    let [k1, k2, k3] = [0, 1, 2].map(|a| grid.wavenumbers(a));
    let mut out = Vec::with_capacity(grid.size());
    for &a in &k1 {
        for &b in &k2 {
            let h = nu_h * (a * a + b * b);
            out.extend(k3.iter().map(|&c| h + nu_3 * c * c));
        }
    }
    out
}

/// `e^{t (nu_h Delta_h + nu_3 d_3^2)} a`.
pub fn semigroup(a: &SpectralField, t: f64, nu_h: f64, nu_3: f64) -> Result<SpectralField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let rates = decay_rates(a.grid(), nu_h, nu_3);
    Ok(apply_decay(a, &rates, t))
}

pub fn semigroup_vector(a: &VectorField, t: f64, nu_h: f64, nu_3: f64) -> Result<VectorField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let rates = decay_rates(a.grid(), nu_h, nu_3);
    Ok(apply_decay_vector(a, &rates, t))
}

fn apply_decay(a: &SpectralField, rates: &[f64], t: f64) -> SpectralField {
    let mut out = a.clone();
    for (c, &r) in out.coeffs_mut().iter_mut().zip(rates) {
        if *c != Complex64::default() {
            *c *= (-r * t).exp();
        }
    }
    out
}

fn apply_decay_vector(a: &VectorField, rates: &[f64], t: f64) -> VectorField {
    let claim = a.is_divergence_free();
    a.map(|c| apply_decay(c, rates, t)).with_claim(claim)
}

/// The heat evolution of the hh part of some initial data.
#[derive(Clone, Debug)]
pub struct HeatFlow {
    hh: VectorField,
    rates: Vec<f64>,
    nu_h: f64,
    nu_3: f64,
}

impl HeatFlow {
    pub fn new(dec: &DyadicDecomposition, u0: &VectorField, nu_h: f64, nu_3: f64) -> Result<Self> {
        require_divergence_free(u0)?;
        Self::from_hh(dec.split_hh_ll(u0).0, nu_h, nu_3)
    }

    pub fn from_hh(hh: VectorField, nu_h: f64, nu_3: f64) -> Result<Self> {
        check_viscosity(nu_h, nu_3)?;
        let rates = decay_rates(hh.grid(), nu_h, nu_3);
        Ok(Self { hh, rates, nu_h, nu_3 })
    }

    pub fn initial(&self) -> &VectorField {
        &self.hh
    }

    pub fn nu_h(&self) -> f64 {
        self.nu_h
    }

    pub fn nu_3(&self) -> f64 {
        self.nu_3
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn at(&self, t: f64) -> Result<VectorField> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(apply_decay_vector(&self.hh, &self.rates, t))
    }

    fn populated_rates(&self) -> impl Iterator<Item = f64> + '_ {
        let top = self.hh.max_abs_coeff();
        (0..self.rates.len())
            .filter(move |&i| self.hh.comps().iter().any(|c| c.coeffs()[i].norm() > 1e-14 * top))
            .map(|i| self.rates[i])
    }

    /// Smallest decay rate among modes carried by the data.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.populated_rates().fold(None, |m, r| Some(m.map_or(r, |m: f64| m.min(r))))
    }

    pub fn fastest_rate(&self) -> Option<f64> {
        self.populated_rates().fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }
}

pub(crate) fn require_divergence_free(u: &VectorField) -> Result<()> {
    if !u.is_divergence_free() {
        let r = u.divergence_residual();
        if r > 1e-10 {
            return Err(Error::InvalidParameter(format!("initial data is not divergence-free (residual {r:e})")));
        }
    }
    Ok(())
}

/// `u_F(t_i)` for every time of `params`.
pub fn make_uf(dec: &DyadicDecomposition, u0: &VectorField, params: &HeatFlowParams) -> Result<Vec<VectorField>> {
    let flow = HeatFlow::new(dec, u0, params.nu_h, params.nu_3)?;
    params.times().iter().map(|&t| flow.at(t)).collect()
}

/// Which branch of `min(nu_h^{-1/q} 2^{-2k/q}, nu_3^{-1/q} 2^{-2l/q})` is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayBranch {
    Horizontal,
    Vertical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub k: i32,
    pub l: i32,
    pub q: f64,
    pub p: f64,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub branch: DecayBranch,
    /// Initial band norm divided by `2^{(1-2/p)k} 2^{-l/2}`.
    pub content: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub vertical_branch_skipped: bool,
}

impl DecayReport {
    /// Rows whose normalized initial content is at least `fraction` of the
    /// largest one.
    pub fn populated(&self, fraction: f64) -> Vec<&DecayRow> {
        let top = self.rows.iter().map(|r| r.content).fold(0.0, f64::max);
        self.rows.iter().filter(|r| top > 0.0 && r.content >= fraction * top).collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    /// `max / min` of the ratio over populated rows.
    pub fn spread(&self, fraction: f64) -> f64 {
        let rows = self.populated(fraction);
        let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        if rows.is_empty() {
            1.0
        } else {
            hi / lo
        }
    }
}

fn pow2(x: f64) -> f64 {
    x.exp2()
}

/// Per-band `L^q_T(L^p_h(L^2_v))` norms of `u_F` against the dyadic decay
/// profile. `T = inf` is approximated by the last time of `params` plus an
/// exponential tail at the slowest populated rate.
pub fn verify_decay_lemma24(
    dec: &DyadicDecomposition,
    u0: &VectorField,
    params: &HeatFlowParams,
    q: f64,
    p: f64,
) -> Result<DecayReport> {
    if !(q >= 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 2")));
    }
    let flow = HeatFlow::new(dec, u0, params.nu_h, params.nu_3)?;
    let times = params.times();
    let mut series: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for &t in times {
        let snap = flow.at(t)?;
        let mut sq = vec![0.0; dec.k_range().count() * dec.l_range().count()];
        for c in snap.comps() {
            let m = band_matrices(dec, c, &[p])?.remove(0);
            for (s, v) in sq.iter_mut().zip(m.values()) {
                *s += v * v;
            }
        }
        series.push(sq.into_iter().map(f64::sqrt).collect());
    }
    let slowest = flow.slowest_rate().unwrap_or(0.0);
    let nl = dec.l_range().count();
    let vertical_branch_skipped = params.nu_3 == 0.0;
    let mut rows = Vec::new();
    for (ik, k) in dec.k_range().enumerate() {
        for (il, l) in dec.l_range().enumerate() {
            if k < l - 1 {
                continue;
            }
            let idx = ik * nl + il;
            let vals: Vec<f64> = series.iter().map(|s| s[idx]).collect();
            if vals[0] == 0.0 {
                continue;
            }
            let tail = exponential_tail(*vals.last().unwrap(), q, slowest);
            let lhs = lq_time(times, &vals, q, tail);
            let h = params.nu_h.powf(-1.0 / q) * pow2(-2.0 * k as f64 / q);
            let v = if vertical_branch_skipped {
                f64::INFINITY
            } else {
                params.nu_3.powf(-1.0 / q) * pow2(-2.0 * l as f64 / q)
            };
            let (m, branch) = if h <= v { (h, DecayBranch::Horizontal) } else { (v, DecayBranch::Vertical) };
            let scale = pow2((1.0 - 2.0 / p) * k as f64) * pow2(-(l as f64) / 2.0);
            let bound = scale * m;
            rows.push(DecayRow { k, l, q, p, lhs, bound, ratio: lhs / bound, branch, content: vals[0] / scale });
        }
    }
    Ok(DecayReport { rows, vertical_branch_skipped })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinfL2Row {
    pub j: i32,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinfL2Report {
    pub rows: Vec<LinfL2Row>,
    /// `||u_0||_{B^{-1+2/p,1/2}_p}`.
    pub besov_norm: f64,
    /// `sum_j ratio_j / ||u_0||`, the l^1 mass of the normalized sequence.
    pub normalized_sum: f64,
    /// `||u_F||_{L^2(R+; L^inf)}`.
    pub scalar_lhs: f64,
    /// `scalar_lhs / (nu_h^{-1/2} ||u_0||)`.
    pub scalar_constant: f64,
}

/// `||Delta^v_j u_F||_{L^2_T(L^inf_h(L^2_v))}` per band and
/// `||u_F||_{L^2_T(L^inf)}`, compared with `nu_h^{-1/2} 2^{-j/2}` and
/// `nu_h^{-1/2}` times the Besov norm of the data.
pub fn verify_linf_l2_lemma25(
    dec: &DyadicDecomposition,
    u0: &VectorField,
    params: &HeatFlowParams,
    p: f64,
) -> Result<LinfL2Report> {
    let flow = HeatFlow::new(dec, u0, params.nu_h, params.nu_3)?;
    let bp = BesovParams::new(p, params.nu_h, params.nu_3)?;
    let besov_norm = besov_static(dec, u0, &bp)?;
    let times = params.times();
    let nj = dec.l_range().count();
    let mut band_series = vec![Vec::with_capacity(times.len()); nj];
    let mut sup_series = Vec::with_capacity(times.len());
    for &t in times {
        let snap = flow.at(t)?;
        let mut band_sq = vec![0.0; nj];
        let mut sup_sq = 0.0;
        for c in snap.components() {
            let mut profile = c.coeffs().to_vec();
            fft::transform(dec.grid(), &mut profile, Direction::Inverse, HORIZONTAL_AXES);
            for (s, j) in band_sq.iter_mut().zip(dec.l_range()) {
                let e = column_energy(dec, &profile, Some(&dec.v_symbol(j)));
                *s += e.iter().copied().fold(0.0, f64::max);
            }
            let sup = c.to_physical_complex().iter().map(|z| z.norm()).fold(0.0, f64::max);
            sup_sq += sup * sup;
        }
        for (series, s) in band_series.iter_mut().zip(band_sq) {
            series.push(s.sqrt());
        }
        sup_series.push(sup_sq.sqrt());
    }
    let slowest = flow.slowest_rate().unwrap_or(0.0);
    let mut rows = Vec::new();
    for (series, j) in band_series.iter().zip(dec.l_range()) {
        let tail = exponential_tail(*series.last().unwrap(), 2.0, slowest);
        let lhs = lq_time(times, series, 2.0, tail);
        let bound = params.nu_h.powf(-0.5) * pow2(-(j as f64) / 2.0);
        rows.push(LinfL2Row { j, lhs, bound, ratio: lhs / bound });
    }
    let scalar_lhs = lq_time(times, &sup_series, 2.0, exponential_tail(*sup_series.last().unwrap(), 2.0, slowest));
    let ratio_sum: f64 = rows.iter().map(|r| r.ratio).sum();
    let (normalized_sum, scalar_constant) = if besov_norm > 0.0 {
        (ratio_sum / besov_norm, scalar_lhs / (params.nu_h.powf(-0.5) * besov_norm))
    } else {
        (0.0, 0.0)
    };
    Ok(LinfL2Report { rows, besov_norm, normalized_sum, scalar_lhs, scalar_constant })
}
