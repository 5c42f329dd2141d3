//! Anisotropic Besov-type norms built from per-band mixed norms.

use num_complex::Complex64;

use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::fft::{self, Direction, HORIZONTAL_AXES};
use crate::field::{check_exponent, lp_of_horizontal, SpectralField, VectorField};

/// Exponent and viscosities shared by the norm and solver layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub p: f64,
    pub nu_h: f64,
    pub nu_3: f64,
}

impl BesovParams {
    pub fn new(p: f64, nu_h: f64, nu_3: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 2")));
        }
        if !(nu_h > 0.0 && nu_h.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu_h = {nu_h} must be positive")));
        }
        if !(nu_3 >= 0.0 && nu_3.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu_3 = {nu_3} must be nonnegative")));
        }
        Ok(Self { p, nu_h, nu_3 })
    }
}

/// Anything made of scalar components; vector norms combine component
/// norms as a root sum of squares.
pub trait Components {
    fn components(&self) -> Vec<&SpectralField>;
}

impl Components for SpectralField {
    fn components(&self) -> Vec<&SpectralField> {
        vec![self]
    }
}

impl Components for VectorField {
    fn components(&self) -> Vec<&SpectralField> {
        self.comps().iter().collect()
    }
}

fn rss<T: Components + ?Sized>(a: &T, f: impl Fn(&SpectralField) -> f64) -> f64 {
    a.components().into_iter().map(|c| f(c).powi(2)).sum::<f64>().sqrt()
}

fn check_grid<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T) -> Result<()> {
    if a.components().iter().any(|c| c.grid() != dec.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

#[inline]
fn pow2(x: f64) -> f64 {
    x.exp2()
}

/// Per-band values indexed by `(k, l)` over the resolvable ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix {
    k_min: i32,
    l_min: i32,
    nk: usize,
    nl: usize,
    values: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(dec: &DyadicDecomposition) -> Self {
        let nk = dec.k_range().count();
        let nl = dec.l_range().count();
        Self { k_min: dec.k_min(), l_min: dec.l_min().unwrap_or(0), nk, nl, values: vec![0.0; nk * nl] }
    }

    fn slot(&self, k: i32, l: i32) -> Option<usize> {
        let (dk, dl) = (k - self.k_min, l - self.l_min);
        (dk >= 0 && dl >= 0 && (dk as usize) < self.nk && (dl as usize) < self.nl)
            .then(|| dk as usize * self.nl + dl as usize)
    }

    /// Value at `(k, l)`, zero outside the stored ranges.
    pub fn get(&self, k: i32, l: i32) -> f64 {
        self.slot(k, l).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, k: i32, l: i32, v: f64) {
        let i = self.slot(k, l).expect("band outside resolvable range");
        self.values[i] = v;
    }

    pub fn k_range(&self) -> std::ops::Range<i32> {
        self.k_min..self.k_min + self.nk as i32
    }

    pub fn l_range(&self) -> std::ops::Range<i32> {
        self.l_min..self.l_min + self.nl as i32
    }

    /// Iterate `(k, l, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.k_min + (i / self.nl) as i32, self.l_min + (i % self.nl) as i32, v))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// `Delta^h_k a` transformed back along the horizontal axes only, so the
/// vertical spectrum of every column is still available.
pub(crate) fn horizontal_band_profile(dec: &DyadicDecomposition, a: &SpectralField, k: i32) -> Vec<Complex64> {
    let mut data = dec.delta_h(a, k).into_coeffs();
    fft::transform(dec.grid(), &mut data, Direction::Inverse, HORIZONTAL_AXES);
    data
}

/// `||f(x_h, .)||^2_{L^2_v}` per column for the vertical multiplier `v`
/// applied to a horizontal profile.
pub(crate) fn column_energy(dec: &DyadicDecomposition, profile: &[Complex64], v: Option<&[f64]>) -> Vec<f64> {
    let g = dec.grid();
    let n3 = g.n()[2];
    let lv = if g.is_planar() { 1.0 } else { g.lengths()[2] };
    profile
        .chunks_exact(n3)
        .map(|col| {
            let s: f64 = match v {
                Some(v) => col.iter().zip(v).map(|(z, w)| w * w * z.norm_sqr()).sum(),
                None => col.iter().map(|z| z.norm_sqr()).sum(),
            };
            lv * s
        })
        .collect()
}

/// `L^p_h` norm of a column-energy profile.
pub(crate) fn lp_of_energy(dec: &DyadicDecomposition, energy: &[f64], p: f64) -> f64 {
    let g = dec.grid();
    let dh = g.spacing(0) * g.spacing(1);
    if p == 2.0 {
        return (energy.iter().sum::<f64>() * dh).sqrt();
    }
    let amp: Vec<f64> = energy.iter().map(|e| e.sqrt()).collect();
    lp_of_horizontal(&amp, dh, p)
}

/// `||Delta^h_k Delta^v_l a||_{L^p_h(L^2_v)}` for every resolvable band and
/// every requested `p`.
pub fn band_matrices(dec: &DyadicDecomposition, a: &SpectralField, ps: &[f64]) -> Result<Vec<BandMatrix>> {
    for &p in ps {
        check_exponent(p)?;
    }
    check_grid(dec, a)?;
    let mut out = vec![BandMatrix::zeros(dec); ps.len()];
    if ps.iter().all(|&p| p == 2.0) {
        let m = band_matrix_l2(dec, a);
        out.iter_mut().for_each(|o| *o = m.clone());
        return Ok(out);
    }
    for k in dec.k_range() {
        let profile = horizontal_band_profile(dec, a, k);
        for l in dec.l_range() {
            let energy = column_energy(dec, &profile, Some(&dec.v_symbol(l)));
            for (m, &p) in out.iter_mut().zip(ps) {
                m.set(k, l, lp_of_energy(dec, &energy, p));
            }
        }
    }
    Ok(out)
}

/// The `p = 2` band matrix by Parseval.
fn band_matrix_l2(dec: &DyadicDecomposition, a: &SpectralField) -> BandMatrix {
    let n3 = dec.grid().n()[2];
    let vol = dec.grid().volume();
    let ks: Vec<i32> = dec.k_range().collect();
    let ls: Vec<i32> = dec.l_range().collect();
    let hs: Vec<_> = ks.iter().map(|&k| dec.h_symbol(k)).collect();
    let vs: Vec<_> = ls.iter().map(|&l| dec.v_symbol(l)).collect();
    let mut m = BandMatrix::zeros(dec);
    let nl = ls.len();
    let mut col_l = vec![0.0; nl];
    for (col, c) in a.coeffs().chunks_exact(n3).enumerate() {
        for (s, v) in col_l.iter_mut().zip(&vs) {
            *s = c.iter().zip(v.iter()).map(|(z, w)| w * w * z.norm_sqr()).sum();
        }
        for (ik, h) in hs.iter().enumerate() {
            let hw = h[col] * h[col];
            if hw == 0.0 {
                continue;
            }
            for (il, s) in col_l.iter().enumerate() {
                m.values[ik * nl + il] += hw * s;
            }
        }
    }
    m.values.iter_mut().for_each(|v| *v = (vol * *v).sqrt());
    m
}

pub fn band_matrix(dec: &DyadicDecomposition, a: &SpectralField, p: f64) -> Result<BandMatrix> {
    Ok(band_matrices(dec, a, &[p])?.remove(0))
}

/// `||Delta^h_k a||_{L^q_h(L^2_v)}` per resolvable horizontal band.
pub fn horizontal_band_norms(dec: &DyadicDecomposition, a: &SpectralField, q: f64) -> Result<Vec<(i32, f64)>> {
    check_exponent(q)?;
    check_grid(dec, a)?;
    Ok(dec
        .k_range()
        .map(|k| {
            let profile = horizontal_band_profile(dec, a, k);
            (k, lp_of_energy(dec, &column_energy(dec, &profile, None), q))
        })
        .collect())
}

/// `||m(D) a||_{L^2}` for a real symbol, by Parseval.
pub(crate) fn l2_of_symbol(a: &SpectralField, symbol: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = a.coeffs().iter().enumerate().map(|(i, c)| symbol(i).powi(2) * c.norm_sqr()).sum();
    (a.grid().volume() * s).sqrt()
}

/// `||Delta^v_j a||_{L^2}` per resolvable vertical band.
pub fn vertical_band_l2(dec: &DyadicDecomposition, a: &SpectralField) -> Vec<(i32, f64)> {
    let n3 = dec.grid().n()[2];
    dec.l_range()
        .map(|j| {
            let v = dec.v_symbol(j);
            (j, l2_of_symbol(a, |i| v[i % n3]))
        })
        .collect()
}

/// `||S^h_{j-1} Delta^v_j a||_{L^2}` per resolvable vertical band.
pub fn low_vertical_band_l2(dec: &DyadicDecomposition, a: &SpectralField) -> Vec<(i32, f64)> {
    let n3 = dec.grid().n()[2];
    dec.l_range()
        .map(|j| {
            let v = dec.v_symbol(j);
            let h = dec.s_h_symbol(j - 1);
            (j, l2_of_symbol(a, |i| h[i / n3] * v[i % n3]))
        })
        .collect()
}

/// `sum_l 2^{l/2} (sum_{k >= l-1} 2^{(-2+4/p)k} B(k,l)^2)^{1/2}`.
pub fn besov_high_part(dec: &DyadicDecomposition, bands: &BandMatrix, p: f64) -> f64 {
    dec.l_range()
        .map(|l| {
            let inner: f64 = dec
                .k_range()
                .filter(|&k| k >= l - 1)
                .map(|k| pow2((-2.0 + 4.0 / p) * k as f64) * bands.get(k, l).powi(2))
                .sum();
            pow2(l as f64 / 2.0) * inner.sqrt()
        })
        .sum()
}

/// `sum_j 2^{j/2} n_j` over a vertical band sequence.
pub fn half_weighted_sum(seq: &[(i32, f64)]) -> f64 {
    seq.iter().map(|&(j, v)| pow2(j as f64 / 2.0) * v).sum()
}

fn besov_scalar_multi(dec: &DyadicDecomposition, a: &SpectralField, ps: &[f64]) -> Result<Vec<f64>> {
    let bands = band_matrices(dec, a, ps)?;
    let low = half_weighted_sum(&low_vertical_band_l2(dec, a));
    Ok(bands.iter().zip(ps).map(|(b, &p)| besov_high_part(dec, b, p) + low).collect())
}

/// `||a||_{B^{-1+2/p,1/2}_p}` for several `p` sharing one band pass.
pub fn besov_static_multi<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T, ps: &[f64]) -> Result<Vec<f64>> {
    check_grid(dec, a)?;
    let mut acc = vec![0.0; ps.len()];
    for c in a.components() {
        for (s, v) in acc.iter_mut().zip(besov_scalar_multi(dec, c, ps)?) {
            *s += v * v;
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// `||a||_{B^{-1+2/p,1/2}_p}`: the hh band sum plus the low-horizontal
/// vertical sum.
pub fn besov_static<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T, params: &BesovParams) -> Result<f64> {
    Ok(besov_static_multi(dec, a, &[params.p])?[0])
}

/// `||a||_{B^{0,1/2}} = sum_j 2^{j/2} ||Delta^v_j a||_{L^2}`.
pub fn besov_b012<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T) -> Result<f64> {
    check_grid(dec, a)?;
    Ok(rss(a, |c| half_weighted_sum(&vertical_band_l2(dec, c))))
}

/// `(sum_j 2^{2js} ||Delta^v_j a||^2_{L^2})^{1/2}`.
pub fn h0s_norm<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T, s: f64) -> Result<f64> {
    check_grid(dec, a)?;
    Ok(rss(a, |c| {
        vertical_band_l2(dec, c).iter().map(|&(j, v)| pow2(2.0 * j as f64 * s) * v * v).sum::<f64>().sqrt()
    }))
}

/// Inhomogeneous `(sum_{j >= -1} 2^{-j} ||Delta^{vi}_j a||^2_{L^2})^{1/2}`
/// with `Delta^{vi}_{-1} = S^v_0`.
pub fn cal_h_norm<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T) -> Result<f64> {
    check_grid(dec, a)?;
    let n3 = dec.grid().n()[2];
    let low = dec.s_v_symbol(0);
    Ok(rss(a, |c| {
        let mut s = 2.0 * l2_of_symbol(c, |i| low[i % n3]).powi(2);
        for (j, v) in vertical_band_l2(dec, c) {
            if j >= 0 {
                s += pow2(-j as f64) * v * v;
            }
        }
        s.sqrt()
    }))
}

/// `(sum_{k, j >= 0} 2^{j - k(2 - 4/p)} ||Delta^h_k Delta^v_j a||^2_{L^p_h(L^2_v)})^{1/2}`.
pub fn cal_b_norm<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T, p: f64) -> Result<f64> {
    check_grid(dec, a)?;
    let mut total = 0.0;
    for c in a.components() {
        let bands = band_matrix(dec, c, p)?;
        total += bands
            .iter()
            .filter(|&(_, j, _)| j >= 0)
            .map(|(k, j, v)| pow2(j as f64 - k as f64 * (2.0 - 4.0 / p)) * v * v)
            .sum::<f64>();
    }
    Ok(total.sqrt())
}

fn lq_sequence(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `|| 2^{-k} ||Delta_k f||_{L^inf} ||_{l^q_k}` over isotropic bands.
pub fn b_neg1_inf_q<T: Components + ?Sized>(dec: &DyadicDecomposition, a: &T, q: f64) -> Result<f64> {
    check_exponent(q)?;
    check_grid(dec, a)?;
    Ok(rss(a, |c| {
        let seq = dec.iso_range().map(|k| {
            let sup = dec.delta_iso(c, k).to_physical_complex().iter().map(|z| z.norm()).fold(0.0, f64::max);
            pow2(-k as f64) * sup
        });
        lq_sequence(seq, q)
    }))
}

/// The three one-scale norms of a horizontal profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prop1Norms {
    /// `||S^h_0 a||_{L^2} + sum_{k>=0} 2^{-sigma k} ||Delta^h_k a||_{L^q}`
    pub tilde_b: f64,
    /// `sum_k 2^{-alpha k} ||Delta^h_k a||_{L^q}`
    pub dot_b1: f64,
    /// `sup_k 2^{-sigma k} ||Delta^h_k a||_{L^q}`
    pub dot_binf: f64,
}

/// One-scale horizontal norms of a planar (or `x_3`-independent) field.
pub fn prop1_norms(dec: &DyadicDecomposition, phi: &SpectralField, sigma: f64, alpha: f64, q: f64) -> Result<Prop1Norms> {
    check_exponent(q)?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let upper = 2.0 * (1.0 - 1.0 / q);
    if !(alpha > 0.0 && alpha < upper) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, {upper})")));
    }
    let bands = planar_band_norms(dec, phi, q)?;
    let low = {
        let s = dec.s_h_symbol(0);
        let n3 = dec.grid().n()[2];
        l2_of_symbol(phi, |i| s[i / n3]) / vertical_extent(dec)
    };
    let tilde_b = low + bands.iter().filter(|b| b.0 >= 0).map(|&(k, v)| pow2(-sigma * k as f64) * v).sum::<f64>();
    let dot_b1 = bands.iter().map(|&(k, v)| pow2(-alpha * k as f64) * v).sum();
    let dot_binf = bands.iter().map(|&(k, v)| pow2(-sigma * k as f64) * v).fold(0.0, f64::max);
    Ok(Prop1Norms { tilde_b, dot_b1, dot_binf })
}

fn vertical_extent(dec: &DyadicDecomposition) -> f64 {
    let g = dec.grid();
    if g.is_planar() {
        1.0
    } else {
        g.lengths()[2].sqrt()
    }
}

/// Horizontal `L^q` band norms of a field with no vertical dependence.
fn planar_band_norms(dec: &DyadicDecomposition, phi: &SpectralField, q: f64) -> Result<Vec<(i32, f64)>> {
    check_grid(dec, phi)?;
    let g = dec.grid();
    if !g.is_planar() {
        let n3 = g.n()[2];
        let stray = phi.coeffs().iter().enumerate().filter(|(i, _)| i % n3 != 0).map(|(_, c)| c.norm()).fold(0.0, f64::max);
        if stray > 1e-12 * phi.max_abs_coeff().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter("field depends on x_3".into()));
        }
    }
    let scale = vertical_extent(dec);
    Ok(horizontal_band_norms(dec, phi, q)?.into_iter().map(|(k, v)| (k, v / scale)).collect())
}

/// `mu(r) = r (1 - log2 r) log2(1 - log2 r)` for `0 < r <= 1`.
pub fn osgood_mu(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in (0, 1]")));
    }
    let a = 1.0 - r.log2();
    Ok(r * a * a.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::mixed_norm;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn noise(grid: Grid, seed: u64) -> SpectralField {
        let mut s = seed;
        let samples: Vec<f64> = (0..grid.size())
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        SpectralField::forward_transform(&samples, grid).unwrap()
    }

    #[test]
    fn band_matrix_matches_direct_mixed_norms() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let a = noise(g, 11);
        let ms = band_matrices(&dec, &a, &[2.0, 4.0, f64::INFINITY]).unwrap();
        for k in dec.k_range() {
            for l in dec.l_range() {
                let piece = dec.delta_hv(&a, k, l);
                for (m, p) in ms.iter().zip([2.0, 4.0, f64::INFINITY]) {
                    let direct = mixed_norm(&piece, p, 2.0).unwrap();
                    assert!((m.get(k, l) - direct).abs() <= 1e-12 * direct.max(1e-300), "k={k} l={l} p={p}");
                }
            }
        }
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let z = VectorField::zeros(g);
        let params = BesovParams::new(4.0, 1.0, 0.1).unwrap();
        assert_eq!(besov_static(&dec, &z, &params).unwrap(), 0.0);
        assert_eq!(besov_b012(&dec, &z).unwrap(), 0.0);
        assert_eq!(h0s_norm(&dec, &z, 0.5).unwrap(), 0.0);
        assert_eq!(cal_h_norm(&dec, &z).unwrap(), 0.0);
        assert_eq!(cal_b_norm(&dec, &z, 4.0).unwrap(), 0.0);
        assert_eq!(b_neg1_inf_q(&dec, &z, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_vertical_band_weights() {
        let g = Grid::new(32, 32, 32).unwrap();
        let dec = DyadicDecomposition::new(g);
        // |xi_3| = 2^3 with phi(1) < 1, so normalize by the band itself.
        let mut a = SpectralField::zeros(g);
        a.set_coeff([0, 1, 8], Complex64::new(0.5, 0.0));
        a.set_coeff([0, -1, -8], Complex64::new(0.5, 0.0));
        let band = vertical_band_l2(&dec, &a);
        let total: f64 = band.iter().map(|b| b.1).sum();
        let b = besov_b012(&dec, &a).unwrap();
        let expected: f64 = band.iter().map(|&(j, v)| 2f64.powf(j as f64 / 2.0) * v).sum();
        assert!((b - expected).abs() < 1e-14 * b);
        assert!(total > 0.0);
    }

    #[test]
    fn cal_h_low_vertical_spectrum() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut a = SpectralField::zeros(g);
        a.set_coeff([3, 1, 0], Complex64::new(1.0, 0.3));
        a.set_coeff([-3, -1, 0], Complex64::new(1.0, -0.3));
        let v = cal_h_norm(&dec, &a).unwrap();
        assert!((v - 2f64.sqrt() * a.l2_norm()).abs() < 1e-12 * v);
    }

    #[test]
    fn osgood_values() {
        assert_eq!(osgood_mu(1.0).unwrap(), 0.0);
        assert!((osgood_mu(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((osgood_mu(0.25).unwrap() - 0.75 * 3f64.log2()).abs() < 1e-15);
        assert!(osgood_mu(0.0).is_err());
        assert!(osgood_mu(1.5).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(BesovParams::new(1.5, 1.0, 0.0).is_err());
        assert!(BesovParams::new(2.0, 0.0, 0.0).is_err());
        assert!(BesovParams::new(2.0, 1.0, -1.0).is_err());
        assert!(BesovParams::new(2.0, 1.0, 0.0).is_ok());
    }
}
