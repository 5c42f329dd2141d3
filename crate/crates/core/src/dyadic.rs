//! Horizontal, vertical and isotropic Littlewood-Paley operators on a grid.

use std::borrow::Cow;
use std::ops::RangeInclusive;

use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::partition::{chi, PartitionFunction, CHI_EDGE, CHI_FLAT};

/// Band ranges and cached multiplier masks for one grid.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: Grid,
    phi: PartitionFunction,
    k_range: (i32, i32),
    l_range: Option<(i32, i32)>,
    iso_range: (i32, i32),
    xi_h: Vec<f64>,
    xi_v: Vec<f64>,
    h_masks: Vec<Vec<f64>>,
    v_masks: Vec<Vec<f64>>,
}

/// Smallest band reaching above `lowest` and the smallest band count that
/// makes the bands sum to one up to `highest`.
fn band_range(lowest: f64, highest: f64) -> (i32, i32) {
    let lo = (lowest / CHI_EDGE).log2().floor() as i32 + 1;
    let hi = (highest / CHI_FLAT).log2().ceil() as i32;
    (lo, hi.max(lo))
}

#[inline]
fn dyadic(k: i32) -> f64 {
    (k as f64).exp2()
}

impl DyadicDecomposition {
    pub fn new(grid: Grid) -> Self {
        Self::with_partition(grid, PartitionFunction::default())
    }

    pub fn with_partition(grid: Grid, phi: PartitionFunction) -> Self {
        let [n1, n2, _] = grid.n();
        let k1 = grid.wavenumbers(0);
        let k2 = grid.wavenumbers(1);
        let mut xi_h = Vec::with_capacity(n1 * n2);
        for &a in &k1 {
            for &b in &k2 {
                xi_h.push(a.hypot(b));
            }
        }
        let xi_v: Vec<f64> = grid.wavenumbers(2).iter().map(|v| v.abs()).collect();
        let k_range = band_range(grid.min_horizontal_frequency(), grid.max_horizontal_frequency());
        let l_range = grid
            .min_vertical_frequency()
            .zip(grid.max_vertical_frequency())
            .map(|(lo, hi)| band_range(lo, hi));
        let iso_lo = grid.min_horizontal_frequency().min(grid.min_vertical_frequency().unwrap_or(f64::INFINITY));
        let iso_hi = grid.max_horizontal_frequency().hypot(grid.max_vertical_frequency().unwrap_or(0.0));
        let iso_range = band_range(iso_lo, iso_hi);

        let mut dec = Self {
            grid,
            phi,
            k_range,
            l_range,
            iso_range,
            xi_h,
            xi_v,
            h_masks: Vec::new(),
            v_masks: Vec::new(),
        };
        dec.h_masks = dec.k_range().map(|k| dec.band_symbol(&dec.xi_h, k)).collect();
        dec.v_masks = dec.l_range().map(|l| dec.band_symbol(&dec.xi_v, l)).collect();
        dec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn partition(&self) -> &PartitionFunction {
        &self.phi
    }

    /// Resolvable horizontal bands.
    pub fn k_range(&self) -> RangeInclusive<i32> {
        self.k_range.0..=self.k_range.1
    }

    /// Resolvable vertical bands; empty on planar grids.
    pub fn l_range(&self) -> RangeInclusive<i32> {
        match self.l_range {
            Some((a, b)) => a..=b,
            #[allow(clippy::reversed_empty_ranges)]
            None => 0..=-1,
        }
    }

    pub fn iso_range(&self) -> RangeInclusive<i32> {
        self.iso_range.0..=self.iso_range.1
    }

    pub fn k_min(&self) -> i32 {
        self.k_range.0
    }

    pub fn k_max(&self) -> i32 {
        self.k_range.1
    }

    pub fn l_min(&self) -> Option<i32> {
        self.l_range.map(|r| r.0)
    }

    pub fn l_max(&self) -> Option<i32> {
        self.l_range.map(|r| r.1)
    }

    /// `|xi_h|` per horizontal storage index `i1 * n2 + i2`.
    pub fn horizontal_magnitudes(&self) -> &[f64] {
        &self.xi_h
    }

    /// `|xi_3|` per vertical storage index.
    pub fn vertical_magnitudes(&self) -> &[f64] {
        &self.xi_v
    }

    fn band_symbol(&self, mags: &[f64], k: i32) -> Vec<f64> {
        let s = dyadic(-k);
        mags.iter().map(|&m| self.phi.eval(s * m)).collect()
    }

    fn lowpass_symbol(mags: &[f64], k: i32) -> Vec<f64> {
        let s = dyadic(-(k - 1));
        mags.iter().map(|&m| chi(s * m)).collect()
    }

    /// `phi(2^{-k} |xi_h|)` per horizontal storage index.
    pub fn h_symbol(&self, k: i32) -> Cow<'_, [f64]> {
        match self.k_range().contains(&k) {
            true => Cow::Borrowed(&self.h_masks[(k - self.k_range.0) as usize]),
            false => Cow::Owned(self.band_symbol(&self.xi_h, k)),
        }
    }

    /// `phi(2^{-l} |xi_3|)` per vertical storage index.
    pub fn v_symbol(&self, l: i32) -> Cow<'_, [f64]> {
        match self.l_range {
            Some((a, b)) if (a..=b).contains(&l) => Cow::Borrowed(&self.v_masks[(l - a) as usize]),
            _ => Cow::Owned(self.band_symbol(&self.xi_v, l)),
        }
    }

    /// `chi(2^{-(k-1)} |xi_h|)`, the symbol of `S^h_k`.
    pub fn s_h_symbol(&self, k: i32) -> Vec<f64> {
        Self::lowpass_symbol(&self.xi_h, k)
    }

    pub fn s_v_symbol(&self, l: i32) -> Vec<f64> {
        Self::lowpass_symbol(&self.xi_v, l)
    }

    /// Multiply by a separable symbol `h(i1, i2) * v(i3)`.
    pub fn apply_separable(&self, a: &SpectralField, h: Option<&[f64]>, v: Option<&[f64]>) -> SpectralField {
        let n3 = self.grid.n()[2];
        let mut out = a.clone();
        for (col, c) in out.coeffs_mut().chunks_exact_mut(n3).enumerate() {
            let hw = h.map_or(1.0, |h| h[col]);
            if hw == 0.0 {
                c.iter_mut().for_each(|z| *z = Default::default());
                continue;
            }
            match v {
                Some(v) => c.iter_mut().zip(v).for_each(|(z, &w)| *z *= hw * w),
                None => c.iter_mut().for_each(|z| *z *= hw),
            }
        }
        out
    }

    pub fn delta_h(&self, a: &SpectralField, k: i32) -> SpectralField {
        self.apply_separable(a, Some(&self.h_symbol(k)), None)
    }

    pub fn delta_v(&self, a: &SpectralField, l: i32) -> SpectralField {
        self.apply_separable(a, None, Some(&self.v_symbol(l)))
    }

    /// `Delta^h_k Delta^v_l a`.
    pub fn delta_hv(&self, a: &SpectralField, k: i32, l: i32) -> SpectralField {
        self.apply_separable(a, Some(&self.h_symbol(k)), Some(&self.v_symbol(l)))
    }

    pub fn s_h(&self, a: &SpectralField, k: i32) -> SpectralField {
        self.apply_separable(a, Some(&self.s_h_symbol(k)), None)
    }

    pub fn s_v(&self, a: &SpectralField, l: i32) -> SpectralField {
        self.apply_separable(a, None, Some(&self.s_v_symbol(l)))
    }

    /// `phi(2^{-k} |xi|)` on the full grid.
    pub fn iso_symbol(&self, k: i32) -> Vec<f64> {
        let s = dyadic(-k);
        let mut out = Vec::with_capacity(self.grid.size());
        for &h in &self.xi_h {
            for &v in &self.xi_v {
                out.push(self.phi.eval(s * h.hypot(v)));
            }
        }
        out
    }

    pub fn delta_iso(&self, a: &SpectralField, k: i32) -> SpectralField {
        let sym = self.iso_symbol(k);
        let mut out = a.clone();
        out.coeffs_mut().iter_mut().zip(&sym).for_each(|(z, &w)| *z *= w);
        out
    }

    /// `S_k` for the isotropic decomposition, `chi(2^{-(k-1)} |xi|)`.
    pub fn s_iso(&self, a: &SpectralField, k: i32) -> SpectralField {
        let s = dyadic(-(k - 1));
        let mut out = a.clone();
        let mut idx = 0;
        let coeffs = out.coeffs_mut();
        for &h in &self.xi_h {
            for &v in &self.xi_v {
                coeffs[idx] *= chi(s * h.hypot(v));
                idx += 1;
            }
        }
        out
    }

    /// Symbol of the hh projection
    /// `sum_l phi(2^{-l} |xi_3|) sum_{k >= l-1} phi(2^{-k} |xi_h|)`.
    /// The inner sum telescopes to `1 - chi(2^{-(l-2)} |xi_h|)`.
    pub fn hh_symbol(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.size()];
        let n3 = self.grid.n()[2];
        for l in self.l_range() {
            let v = self.v_symbol(l);
            let s = dyadic(-(l - 2));
            for (col, &h) in self.xi_h.iter().enumerate() {
                let hw = 1.0 - chi(s * h);
                if hw == 0.0 {
                    continue;
                }
                for (i3, &vw) in v.iter().enumerate() {
                    out[col * n3 + i3] += hw * vw;
                }
            }
        }
        out
    }

    /// Split `u0` into its hh part and the remainder. The ll part carries
    /// `sum_j S^h_{j-1} Delta^v_j u0` together with the `xi_3 = 0` layer,
    /// so the two parts reconstruct `u0`.
    pub fn split_hh_ll(&self, u0: &VectorField) -> (VectorField, VectorField) {
        let sym = self.hh_symbol();
        let claim = u0.is_divergence_free();
        let hh = u0.map(|c| {
            let mut out = c.clone();
            out.coeffs_mut().iter_mut().zip(&sym).for_each(|(z, &w)| *z *= w);
            out
        });
        let ll = u0.try_sub(&hh).expect("same grid");
        (hh.with_claim(claim), ll.with_claim(claim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn default_ranges_on_standard_box() {
        let dec = DyadicDecomposition::new(Grid::new(64, 64, 64).unwrap());
        assert_eq!(dec.k_min(), -1);
        assert_eq!(dec.l_min(), Some(-1));
        assert_eq!(dec.k_max(), 5);
        assert_eq!(dec.l_max(), Some(5));
        let planar = DyadicDecomposition::new(Grid::planar(16, 16).unwrap());
        assert!(planar.l_range().is_empty());
    }

    #[test]
    fn reconstruction_over_resolvable_bands() {
        let g = Grid::new(16, 12, 20).unwrap();
        let dec = DyadicDecomposition::new(g);
        let a = noise(g, 3);
        let mut sum = dec.s_h(&a, dec.k_min());
        for k in dec.k_range() {
            sum = &sum + &dec.delta_h(&a, k);
        }
        assert!(max_diff(&sum, &a) < 1e-12);
        let mut sum = dec.s_v(&a, dec.l_min().unwrap());
        for l in dec.l_range() {
            sum = &sum + &dec.delta_v(&a, l);
        }
        assert!(max_diff(&sum, &a) < 1e-12);
        let mut sum = dec.s_iso(&a, *dec.iso_range().start());
        for k in dec.iso_range() {
            sum = &sum + &dec.delta_iso(&a, k);
        }
        assert!(max_diff(&sum, &a) < 1e-12);
    }

    #[test]
    fn lowpass_telescopes() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let a = noise(g, 5);
        for k in dec.k_range() {
            let mut sum = dec.s_h(&a, k);
            for kk in k..=dec.k_max() {
                sum = &sum + &dec.delta_h(&a, kk);
            }
            assert!(max_diff(&sum, &a) < 1e-12);
        }
    }

    #[test]
    fn distant_bands_are_orthogonal() {
        let g = Grid::new(32, 32, 32).unwrap();
        let dec = DyadicDecomposition::new(g);
        let a = noise(g, 7);
        for k in dec.k_range() {
            for kk in k + 2..=dec.k_max() {
                assert_eq!(dec.delta_h(&dec.delta_h(&a, k), kk).max_abs_coeff(), 0.0);
                assert_eq!(dec.delta_v(&dec.delta_v(&a, k), kk).max_abs_coeff(), 0.0);
            }
        }
    }

    #[test]
    fn bands_commute() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let a = noise(g, 9);
        let x = dec.delta_v(&dec.delta_h(&a, 2), 1);
        let y = dec.delta_h(&dec.delta_v(&a, 1), 2);
        assert!(max_diff(&x, &y) < 1e-16);
        assert!(max_diff(&x, &dec.delta_hv(&a, 2, 1)) < 1e-16);
    }

    #[test]
    fn constant_survives_lowpass() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut a = SpectralField::zeros(g);
        a.set_coeff([0, 0, 0], Complex64::new(2.0, 0.0));
        for k in dec.k_range() {
            assert_eq!(dec.s_h(&a, k), a);
            assert_eq!(dec.delta_h(&a, k).max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn vertical_bands_ignore_planar_layer() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut a = SpectralField::zeros(g);
        a.set_coeff([3, 1, 0], Complex64::new(1.0, 0.5));
        for l in dec.l_range() {
            assert_eq!(dec.delta_v(&a, l).max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn hh_ll_reconstruct_and_sort_spectra() {
        let g = Grid::new(32, 32, 32).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut horiz = SpectralField::zeros(g);
        horiz.set_coeff([12, 0, 1], Complex64::new(1.0, 0.0));
        let mut vert = SpectralField::zeros(g);
        vert.set_coeff([0, 0, 12], Complex64::new(1.0, 0.0));
        let z = SpectralField::zeros(g);
        let u = VectorField::new(horiz.clone(), vert.clone(), z).unwrap();
        let (hh, ll) = dec.split_hh_ll(&u);
        assert!(max_diff(hh.comp(0), &horiz) < 1e-15);
        assert!(ll.comp(0).max_abs_coeff() < 1e-15);
        assert!(hh.comp(1).max_abs_coeff() < 1e-15);
        assert!(max_diff(ll.comp(1), &vert) < 1e-15);
    }
}
