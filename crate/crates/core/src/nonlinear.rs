//! The convective nonlinearity, its vertical paraproduct split, the
//! smallness functional and the trilinear diagnostics.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::besov::{besov_b012, besov_static, half_weighted_sum, vertical_band_l2, BesovParams};
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Axis, SpectralField, VectorField};
use crate::grid::Grid;
use crate::heat::{HeatFlow, HeatFlowParams};
use crate::quadrature::{check_times, geometric_times, lq_time, trapezoid};

/// Index pairs of the upper triangle of a symmetric 3x3 tensor.
#[cfg_attr(not(test), allow(dead_code))]
const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

const SYM_SLOTS: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

pub(crate) fn sym_slot(i: usize, j: usize) -> usize {
    SYM_SLOTS[i][j]
}

/// Largest retained `|m|` per axis under the two-thirds rule.
pub(crate) fn dealias_limits(grid: &Grid) -> [usize; 3] {
    [0, 1, 2].map(|a| if grid.n()[a] == 1 { 0 } else { grid.dealias_limit(a).floor() as usize })
}

/// Physical samples of several real fields supported in the dealiased
/// cube, two per complex transform.
pub(crate) fn physical_many(grid: &Grid, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let limit = dealias_limits(grid);
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        if pair.len() == 2 {
            let (a, b) = fft::inverse_real_pair_band_limited(grid, pair[0], pair[1], limit);
            out.push(a);
            out.push(b);
        } else {
            let mut z = pair[0].to_vec();
            fft::transform_band_limited(grid, &mut z, fft::Direction::Inverse, limit);
            out.push(z.into_iter().map(|c| c.re).collect());
        }
    }
    out
}

/// Fourier coefficients in the dealiased cube of several real sample
/// arrays, two per transform. Coefficients outside the cube are zero.
pub(crate) fn spectral_many(grid: &Grid, samples: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let limit = dealias_limits(grid);
    let mut out = Vec::with_capacity(samples.len());
    for pair in samples.chunks(2) {
        if pair.len() == 2 {
            let (a, b) = fft::forward_real_pair_band_limited(grid, &pair[0], &pair[1], limit);
            out.push(a);
            out.push(b);
        } else {
            let mut z: Vec<Complex64> = pair[0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft::transform_band_limited(grid, &mut z, fft::Direction::Forward, limit);
            out.push(z);
        }
    }
    out
}

/// The modes kept by the two-thirds rule, with their wavevectors and the
/// positions of their negatives, for fused pseudo-spectral kernels.
#[derive(Clone, Debug)]
pub(crate) struct DealiasedBand {
    pub grid: Grid,
    limit: [usize; 3],
    pub idx: Vec<usize>,
    neg: Vec<usize>,
    pub xi: Vec<[f64; 3]>,
    /// Grid-sized work arrays handed back by [`DealiasedBand::recycle`].
    pool: RefCell<Vec<Vec<Complex64>>>,
}

impl DealiasedBand {
    pub fn new(grid: &Grid) -> Self {
        let limit = dealias_limits(grid);
        let (mut idx, mut neg, mut xi) = (Vec::new(), Vec::new(), Vec::new());
        let [n1, n2, n3] = grid.n();
        let inside = |a: usize, i: usize| grid.mode(a, i).unsigned_abs() as usize <= limit[a];
        for i1 in (0..n1).filter(|&i| inside(0, i)) {
            for i2 in (0..n2).filter(|&i| inside(1, i)) {
                for i3 in (0..n3).filter(|&i| inside(2, i)) {
                    let k = grid.index(i1, i2, i3);
                    idx.push(k);
                    neg.push(grid.negated_index(k));
                    xi.push([grid.wavenumber(0, i1), grid.wavenumber(1, i2), grid.wavenumber(2, i3)]);
                }
            }
        }
        Self { grid: *grid, limit, idx, neg, xi, pool: RefCell::new(Vec::new()) }
    }

    /// Number of band modes.
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    fn buffer(&self) -> Vec<Complex64> {
        self.pool.borrow_mut().pop().unwrap_or_else(|| vec![Complex64::default(); self.grid.size()])
    }

    /// Return work arrays obtained from this band for reuse.
    pub fn recycle(&self, bufs: impl IntoIterator<Item = Vec<Complex64>>) {
        self.pool.borrow_mut().extend(bufs);
    }

    /// Band coefficients of a full spectrum.
    pub fn gather<T: Copy>(&self, full: &[T]) -> Vec<T> {
        self.idx.iter().map(|&k| full[k]).collect()
    }

    /// Zero-padded spectrum of `a + i b` from band coefficients.
    fn packed(&self, a: &[Complex64], b: Option<&[Complex64]>) -> Vec<Complex64> {
        let mut z = self.buffer();
        z.fill(Complex64::default());
        match b {
            Some(b) => {
                for ((&k, x), y) in self.idx.iter().zip(a).zip(b) {
                    z[k] = x + Complex64::new(-y.im, y.re);
                }
            }
            None => self.idx.iter().zip(a).for_each(|(&k, x)| z[k] = *x),
        }
        z
    }

    /// Packed spectra of the six entries of `u (x) u` for a real vector
    /// field given by its band coefficients: `(u0 u0, u0 u1)`,
    /// `(u0 u2, u1 u1)`, `(u1 u2, u2 u2)`.
    pub fn square(&self, u: [&[Complex64]; 3]) -> [Vec<Complex64>; 3] {
        let mut inp = [self.packed(u[0], Some(u[1])), self.packed(u[2], None)];
        let mut out = [0, 1, 2].map(|_| self.buffer());
        fft::map_band_limited(&self.grid, self.limit, &mut inp, &mut out, |x, t| {
            for i in 0..x[0].len() {
                let (u0, u1, u2) = (x[0][i].re, x[0][i].im, x[1][i].re);
                t[0][i] = Complex64::new(u0 * u0, u0 * u1);
                t[1][i] = Complex64::new(u0 * u2, u1 * u1);
                t[2][i] = Complex64::new(u1 * u2, u2 * u2);
            }
        });
        self.recycle(inp);
        out
    }

    /// [`DealiasedBand::square`] of two vector fields at once.
    pub fn square_two(&self, u: [&[Complex64]; 3], f: [&[Complex64]; 3]) -> ([Vec<Complex64>; 3], [Vec<Complex64>; 3]) {
        let mut inp = [self.packed(u[0], Some(u[1])), self.packed(u[2], Some(f[0])), self.packed(f[1], Some(f[2]))];
        let mut out = [0, 1, 2, 3, 4, 5].map(|_| self.buffer());
        fft::map_band_limited(&self.grid, self.limit, &mut inp, &mut out, |x, t| {
            for i in 0..x[0].len() {
                let (u0, u1, u2) = (x[0][i].re, x[0][i].im, x[1][i].re);
                let (f0, f1, f2) = (x[1][i].im, x[2][i].re, x[2][i].im);
                t[0][i] = Complex64::new(u0 * u0, u0 * u1);
                t[1][i] = Complex64::new(u0 * u2, u1 * u1);
                t[2][i] = Complex64::new(u1 * u2, u2 * u2);
                t[3][i] = Complex64::new(f0 * f0, f0 * f1);
                t[4][i] = Complex64::new(f0 * f2, f1 * f1);
                t[5][i] = Complex64::new(f1 * f2, f2 * f2);
            }
        });
        self.recycle(inp);
        let [a, b, c, d, e, g] = out;
        ([a, b, c], [d, e, g])
    }

    /// Coefficients of `f` and `g` at band position `n` from the transform of `f + i g`.
    #[inline]
    pub fn split(&self, z: &[Complex64], n: usize) -> (Complex64, Complex64) {
        let zm = z[self.idx[n]];
        let zn = z[self.neg[n]].conj();
        ((zm + zn) * 0.5, (zm - zn) * Complex64::new(0.0, -0.5))
    }

    /// The six independent entries (in [`SYM_PAIRS`] order) of the tensor
    /// whose packed spectra are `t`, at band position `n`.
    #[inline]
    pub fn tensor_at(&self, t: &[Vec<Complex64>; 3], n: usize) -> [Complex64; 6] {
        let (a, b) = self.split(&t[0], n);
        let (c, d) = self.split(&t[1], n);
        let (e, f) = self.split(&t[2], n);
        [a, b, c, d, e, f]
    }
}

/// `i xi_j T_{ij}` for a symmetric tensor `T` in [`SYM_PAIRS`] order.
#[inline]
pub(crate) fn divergence_at(xi: &[f64; 3], t: &[Complex64; 6]) -> [Complex64; 3] {
    [0, 1, 2].map(|i| {
        let s = t[sym_slot(i, 0)] * xi[0] + t[sym_slot(i, 1)] * xi[1] + t[sym_slot(i, 2)] * xi[2];
        Complex64::new(-s.im, s.re)
    })
}

/// `xi_j xi_k T_{jk}`.
#[inline]
pub(crate) fn quadratic_at(xi: &[f64; 3], t: &[Complex64; 6]) -> Complex64 {
    t[0] * (xi[0] * xi[0])
        + t[3] * (xi[1] * xi[1])
        + t[5] * (xi[2] * xi[2])
        + (t[1] * (xi[0] * xi[1]) + t[2] * (xi[0] * xi[2]) + t[4] * (xi[1] * xi[2])) * 2.0
}

fn fields_from(grid: Grid, mut coeffs: Vec<Vec<Complex64>>) -> VectorField {
    let c = coeffs.pop().unwrap();
    let b = coeffs.pop().unwrap();
    let a = coeffs.pop().unwrap();
    VectorField::new(
        SpectralField::from_coeffs(grid, a).unwrap(),
        SpectralField::from_coeffs(grid, b).unwrap(),
        SpectralField::from_coeffs(grid, c).unwrap(),
    )
    .unwrap()
}

/// `u . grad a` restricted to the derivative directions in `axes`,
/// computed pseudo-spectrally with the two-thirds rule on inputs and output.
fn advect(u: &VectorField, a: &VectorField, axes: &[Axis]) -> Result<VectorField> {
    if u.grid() != a.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *u.grid();
    let u = u.dealias();
    let a = a.dealias();
    let mut spectra: Vec<Vec<Complex64>> = axes.iter().map(|&ax| u.comp(ax.index()).coeffs().to_vec()).collect();
    for i in 0..3 {
        for &ax in axes {
            spectra.push(a.comp(i).partial_derivative(ax).into_coeffs());
        }
    }
    let refs: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
    let phys = physical_many(&grid, &refs);
    let na = axes.len();
    let mut out = vec![vec![0.0; grid.size()]; 3];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..na {
            let uj = &phys[j];
            let da = &phys[na + i * na + j];
            for ((o, &x), &y) in o.iter_mut().zip(uj).zip(da) {
                *o += x * y;
            }
        }
    }
    Ok(fields_from(grid, spectral_many(&grid, &out)).dealias())
}

/// `u_j d_j a_i`, dealiased.
pub fn convect(u: &VectorField, a: &VectorField) -> Result<VectorField> {
    advect(u, a, &Axis::ALL)
}

/// `u_h . grad_h a`, dealiased.
pub fn convect_horizontal(u: &VectorField, a: &VectorField) -> Result<VectorField> {
    advect(u, a, &[Axis::X1, Axis::X2])
}

/// The two paraproduct pieces of `Delta^v_j (u_h . grad_h a)`:
/// `sum_{|j-j'| <= 5} Delta^v_j (S^v_{j'-1} u_h . grad_h Delta^v_{j'} a)` and
/// `sum_{j' >= j - 3} Delta^v_j (Delta^v_{j'} u_h . grad_h S^v_{j'+2} a)`.
pub fn bony_vertical_split(
    dec: &DyadicDecomposition,
    u: &VectorField,
    a: &VectorField,
    j: i32,
) -> Result<(VectorField, VectorField)> {
    const WINDOW: i32 = 5;
    const N0: i32 = 3;
    let grid = *u.grid();
    let lv = dec.l_range();
    let band = |f: &VectorField| f.map(|c| dec.delta_v(c, j));
    let mut low_high = VectorField::zeros(grid);
    for jp in (j - WINDOW).max(*lv.start())..=(j + WINDOW).min(*lv.end()) {
        let us = u.map(|c| dec.s_v(c, jp - 1));
        let ab = a.map(|c| dec.delta_v(c, jp));
        low_high = low_high.try_add(&band(&convect_horizontal(&us, &ab)?))?;
    }
    let mut high_low = VectorField::zeros(grid);
    for jp in (j - N0).max(*lv.start())..=*lv.end() {
        let ub = u.map(|c| dec.delta_v(c, jp));
        let asl = a.map(|c| dec.s_v(c, jp + 2));
        high_low = high_low.try_add(&band(&convect_horizontal(&ub, &asl)?))?;
    }
    Ok((low_high, high_low))
}

/// Vector fields sampled on a common time grid.
#[derive(Clone, Debug)]
pub struct Snapshots {
    pub times: Vec<f64>,
    pub fields: Vec<VectorField>,
}

impl Snapshots {
    pub fn new(times: Vec<f64>, fields: Vec<VectorField>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != fields.len() {
            return Err(Error::MisalignedTimes);
        }
        Ok(Self { times, fields })
    }

    /// A time-independent field sampled at `times`.
    pub fn frozen(field: &VectorField, times: Vec<f64>) -> Result<Self> {
        let fields = vec![field.clone(); times.len()];
        Self::new(times, fields)
    }
}

fn aligned(series: &[&Snapshots]) -> Result<()> {
    let t0 = &series[0].times;
    if series.iter().any(|s| s.times.len() != t0.len() || s.times.iter().zip(t0).any(|(a, b)| a != b)) {
        return Err(Error::MisalignedTimes);
    }
    Ok(())
}

fn band_inner(dec: &DyadicDecomposition, f: &VectorField, g: &VectorField, j: i32) -> Result<f64> {
    let fb = f.map(|c| dec.delta_v(c, j));
    let gb = g.map(|c| dec.delta_v(c, j));
    fb.inner(&gb)
}

/// `int_0^T |<Delta^v_j (u . grad a), Delta^v_j a>| dt`.
pub fn trilinear_fj(dec: &DyadicDecomposition, u: &Snapshots, a: &Snapshots, j: i32) -> Result<f64> {
    aligned(&[u, a])?;
    let vals = u
        .fields
        .iter()
        .zip(&a.fields)
        .map(|(uf, af)| Ok(band_inner(dec, &convect(uf, af)?, af, j)?.abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(trapezoid(&u.times, &vals))
}

/// `int_0^T |<Delta^v_j (a . grad u_F), Delta^v_j b>| dt`.
pub fn trilinear_gj(dec: &DyadicDecomposition, a: &Snapshots, b: &Snapshots, uf: &Snapshots, j: i32) -> Result<f64> {
    aligned(&[a, b, uf])?;
    let mut vals = Vec::with_capacity(a.times.len());
    for ((af, bf), ff) in a.fields.iter().zip(&b.fields).zip(&uf.fields) {
        vals.push(band_inner(dec, &convect(af, ff)?, bf, j)?.abs());
    }
    Ok(trapezoid(&a.times, &vals))
}

/// `||a||_{B^{0,1/2}(T)}` from snapshots:
/// `sum_j 2^{j/2} (||Delta^v_j a||_{L^inf_T(L^2)} + nu_h^{1/2} ||grad_h Delta^v_j a||_{L^2_T(L^2)}
/// + nu_3^{1/2} ||d_3 Delta^v_j a||_{L^2_T(L^2)})`.
pub fn b012_time_norm(dec: &DyadicDecomposition, a: &Snapshots, nu_h: f64, nu_3: f64) -> f64 {
    let n3 = dec.grid().n()[2];
    let xh = dec.horizontal_magnitudes();
    let xv = dec.vertical_magnitudes();
    let vol = dec.grid().volume();
    let mut total = 0.0;
    for j in dec.l_range() {
        let v = dec.v_symbol(j);
        let mut sup: f64 = 0.0;
        let (mut gh, mut gv) = (Vec::new(), Vec::new());
        for f in &a.fields {
            let (mut e, mut eh, mut ev) = (0.0, 0.0, 0.0);
            for c in f.comps() {
                for (i, z) in c.coeffs().iter().enumerate() {
                    let w = v[i % n3].powi(2) * z.norm_sqr();
                    e += w;
                    eh += w * xh[i / n3].powi(2);
                    ev += w * xv[i % n3].powi(2);
                }
            }
            sup = sup.max((vol * e).sqrt());
            gh.push(vol * eh);
            gv.push(vol * ev);
        }
        let h = trapezoid(&a.times, &gh).sqrt();
        let vv = trapezoid(&a.times, &gv).sqrt();
        total += (j as f64 / 2.0).exp2() * (sup + nu_h.sqrt() * h + nu_3.sqrt() * vv);
    }
    total
}

/// `sum_j 2^{j/2} ||Delta^v_j u||_{L^{2p/(p-1)}_T(L^{2p}_h(L^2_v))}`.
pub fn tilde_l_norm(dec: &DyadicDecomposition, u: &Snapshots, p: f64) -> Result<f64> {
    let qt = 2.0 * p / (p - 1.0);
    let mut per_j = vec![Vec::with_capacity(u.times.len()); dec.l_range().count()];
    for f in &u.fields {
        let mut sq = vec![0.0; per_j.len()];
        for c in f.comps() {
            let mut profile = c.coeffs().to_vec();
            fft::transform(dec.grid(), &mut profile, fft::Direction::Inverse, fft::HORIZONTAL_AXES);
            for (s, j) in sq.iter_mut().zip(dec.l_range()) {
                let e = crate::besov::column_energy(dec, &profile, Some(&dec.v_symbol(j)));
                *s += crate::besov::lp_of_energy(dec, &e, 2.0 * p).powi(2);
            }
        }
        for (series, s) in per_j.iter_mut().zip(sq) {
            series.push(s.sqrt());
        }
    }
    let seq: Vec<(i32, f64)> = dec.l_range().zip(per_j.iter().map(|s| lq_time(&u.times, s, qt, 0.0))).collect();
    Ok(half_weighted_sum(&seq))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrilinearAggregateReport {
    /// `(j, F_j(T))`.
    pub f: Vec<(i32, f64)>,
    /// `sum_j 2^j F_j(T)`.
    pub lhs: f64,
    pub a_norm: f64,
    pub u_norm: f64,
    /// `nu_h^{-1/2 - 1/(2p)} a_norm^2 u_norm`.
    pub rhs: f64,
    pub fitted_c: f64,
}

/// Measures the aggregate trilinear bound with its fitted constant.
pub fn trilinear_aggregate(
    dec: &DyadicDecomposition,
    u: &Snapshots,
    a: &Snapshots,
    p: f64,
    nu_h: f64,
    nu_3: f64,
) -> Result<TrilinearAggregateReport> {
    let f = dec.l_range().map(|j| Ok((j, trilinear_fj(dec, u, a, j)?))).collect::<Result<Vec<_>>>()?;
    let lhs = f.iter().map(|&(j, v)| (j as f64).exp2() * v).sum();
    let a_norm = b012_time_norm(dec, a, nu_h, nu_3);
    let u_norm = tilde_l_norm(dec, u, p)?;
    let rhs = nu_h.powf(-0.5 - 0.5 / p) * a_norm * a_norm * u_norm;
    let fitted_c = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(TrilinearAggregateReport { f, lhs, a_norm, u_norm, rhs, fitted_c })
}

/// `sum_j 2^{j/2} ||Delta^v_j (u_F . grad u_F)(t)||_{L^2}` on each time of a grid.
pub fn forcing_integrand(dec: &DyadicDecomposition, flow: &HeatFlow, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let uf = flow.at(t)?;
            besov_b012(dec, &convect(&uf, &uf)?)
        })
        .collect()
}

/// `||u_F . grad u_F||_{L^1_T(B^{0,1/2})}` with `T` the last time of `params`.
pub fn forcing_norm_l1t_b012(dec: &DyadicDecomposition, u0: &VectorField, params: &HeatFlowParams) -> Result<f64> {
    let flow = HeatFlow::new(dec, u0, params.nu_h, params.nu_3)?;
    Ok(trapezoid(params.times(), &forcing_integrand(dec, &flow, params.times())?))
}

/// The same norm over `(0, inf)`: geometric grid up to the time where the
/// slowest populated mode of `u_F` has decayed by `e^{-12}`, plus the
/// exponential tail of the integrand (which decays at least at twice that
/// rate).
pub fn forcing_norm_infinite(dec: &DyadicDecomposition, flow: &HeatFlow, ratio: f64) -> Result<f64> {
    let (Some(lo), Some(hi)) = (flow.slowest_rate(), flow.fastest_rate()) else {
        return Ok(0.0);
    };
    let t_end = (12.0 / lo).max(2e-3 / hi);
    let times = geometric_times(1e-3 / hi, ratio, t_end)?;
    let vals = forcing_integrand(dec, flow, &times)?;
    Ok(trapezoid(&times, &vals) + vals.last().unwrap() / (2.0 * lo))
}

/// `[a]_{E^p_T} = ||a||_{B^{-1+2/p,1/2}_p} + ||a_F . grad a_F||_{L^1_T(B^{0,1/2})}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EFunctionalReport {
    pub besov_part: f64,
    pub forcing_part: f64,
    pub total: f64,
    pub horizon: f64,
}

pub fn e_functional(
    dec: &DyadicDecomposition,
    u0: &VectorField,
    besov: &BesovParams,
    params: &HeatFlowParams,
) -> Result<EFunctionalReport> {
    let besov_part = besov_static(dec, u0, besov)?;
    let forcing_part = forcing_norm_l1t_b012(dec, u0, params)?;
    Ok(EFunctionalReport { besov_part, forcing_part, total: besov_part + forcing_part, horizon: params.horizon() })
}

/// `[a]_{E^p_inf}`, see [`forcing_norm_infinite`].
pub fn e_functional_infinite(
    dec: &DyadicDecomposition,
    u0: &VectorField,
    besov: &BesovParams,
    ratio: f64,
) -> Result<EFunctionalReport> {
    let besov_part = besov_static(dec, u0, besov)?;
    let flow = HeatFlow::new(dec, u0, besov.nu_h, besov.nu_3)?;
    let forcing_part = forcing_norm_infinite(dec, &flow, ratio)?;
    Ok(EFunctionalReport { besov_part, forcing_part, total: besov_part + forcing_part, horizon: f64::INFINITY })
}

/// `||Delta^v_j f||_{L^2}` for every resolvable band of a vector field.
pub fn vertical_band_l2_vector(dec: &DyadicDecomposition, f: &VectorField) -> Vec<(i32, f64)> {
    let per: Vec<Vec<(i32, f64)>> = f.comps().iter().map(|c| vertical_band_l2(dec, c)).collect();
    (0..per[0].len())
        .map(|n| (per[0][n].0, per.iter().map(|p| p[n].1.powi(2)).sum::<f64>().sqrt()))
        .collect()
}
