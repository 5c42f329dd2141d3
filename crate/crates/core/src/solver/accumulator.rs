use crate::besov::{band_matrices, BandMatrix};
use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::VectorField;

/// Per-vertical-band instantaneous quantities: `||Delta^v_j a||^2`,
/// `||grad_h Delta^v_j a||^2`, `||d_3 Delta^v_j a||^2` and the same three
/// for `S^h_{j-1} Delta^v_j a`.
type VerticalSample = [f64; 6];

#[derive(Clone, Debug, Default, PartialEq)]
struct Trapezoid {
    last: Option<(f64, Vec<f64>)>,
    sup: Vec<f64>,
    integral: Vec<f64>,
}

impl Trapezoid {
    fn push(&mut self, t: f64, values: Vec<f64>) -> Result<()> {
        match &self.last {
            None => {
                self.sup = values.clone();
                self.integral = vec![0.0; values.len()];
            }
            Some((t0, prev)) => {
                if t < *t0 {
                    return Err(Error::MisalignedTimes);
                }
                let dt = t - t0;
                for i in 0..values.len() {
                    self.sup[i] = self.sup[i].max(values[i]);
                    self.integral[i] += 0.5 * dt * (prev[i] + values[i]);
                }
            }
        }
        self.last = Some((t, values));
        Ok(())
    }
}

/// Running time statistics of the dyadic pieces of a field: `L^inf_T` and
/// `L^2_T` of every `(k, l)` band norm in `L^p_h(L^2_v)`, and the vertical
/// band energies entering the `B^{0,1/2}(T)` norm.
#[derive(Clone, Debug)]
pub struct NormAccumulator {
    dec: DyadicDecomposition,
    p: f64,
    nu_h: f64,
    nu_3: f64,
    /// Squared band norms: sup is `||.||^2_{L^inf_T}`, integral is `||.||^2_{L^2_T}`.
    bands: Trapezoid,
    vertical: Trapezoid,
    elapsed: f64,
}

impl NormAccumulator {
    pub fn new(dec: DyadicDecomposition, p: f64, nu_h: f64, nu_3: f64) -> Self {
        Self { dec, p, nu_h, nu_3, bands: Trapezoid::default(), vertical: Trapezoid::default(), elapsed: 0.0 }
    }

    pub fn decomposition(&self) -> &DyadicDecomposition {
        &self.dec
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Add a sample of every statistic at time `t`.
    pub fn update(&mut self, t: f64, a: &VectorField) -> Result<()> {
        self.update_vertical(t, a)?;
        self.update_bands(t, a)
    }

    /// Add a sample of the (cheap, Parseval-based) vertical statistics.
    pub fn update_vertical(&mut self, t: f64, a: &VectorField) -> Result<()> {
        let sample = self.vertical_sample(a);
        self.vertical.push(t, sample.into_iter().flatten().collect())?;
        self.elapsed = self.elapsed.max(t);
        Ok(())
    }

    /// Add a sample of the `(k, l)` band statistics.
    pub fn update_bands(&mut self, t: f64, a: &VectorField) -> Result<()> {
        let mut sq: Vec<f64> = Vec::new();
        for c in a.comps() {
            let m = band_matrices(&self.dec, c, &[self.p])?.remove(0);
            if sq.is_empty() {
                sq = vec![0.0; m.values().len()];
            }
            for (s, v) in sq.iter_mut().zip(m.values()) {
                *s += v * v;
            }
        }
        self.bands.push(t, sq)?;
        self.elapsed = self.elapsed.max(t);
        Ok(())
    }

    fn vertical_sample(&self, a: &VectorField) -> Vec<VerticalSample> {
        let g = self.dec.grid();
        let n3 = g.n()[2];
        let xh = self.dec.horizontal_magnitudes();
        let xv = self.dec.vertical_magnitudes();
        let js: Vec<i32> = self.dec.l_range().collect();
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n3];
        for (n, &j) in js.iter().enumerate() {
            for (i3, &v) in self.dec.v_symbol(j).iter().enumerate() {
                if v != 0.0 {
                    by_row[i3].push((n, v * v));
                }
            }
        }
        let low: Vec<Vec<f64>> = js.iter().map(|&j| self.dec.s_h_symbol(j - 1).iter().map(|x| x * x).collect()).collect();
        let mut out = vec![[0.0; 6]; js.len()];
        for c in a.comps() {
            for (col, chunk) in c.coeffs().chunks_exact(n3).enumerate() {
                let h2 = xh[col] * xh[col];
                for (i3, z) in chunk.iter().enumerate() {
                    let e = z.norm_sqr();
                    if e == 0.0 {
                        continue;
                    }
                    let v2 = xv[i3] * xv[i3];
                    for &(n, w) in &by_row[i3] {
                        let w = w * e;
                        let lw = low[n][col];
                        let s = &mut out[n];
                        s[0] += w;
                        s[1] += w * h2;
                        s[2] += w * v2;
                        s[3] += w * lw;
                        s[4] += w * lw * h2;
                        s[5] += w * lw * v2;
                    }
                }
            }
        }
        let vol = g.volume();
        out.into_iter().map(|s| s.map(|x| x * vol)).collect()
    }

    /// `(j, ||Delta^v_j a||_{L^inf_T(L^2)}, ||grad_h Delta^v_j a||_{L^2_T(L^2)}, ||d_3 Delta^v_j a||_{L^2_T(L^2)})`.
    pub fn vertical_rows(&self) -> Vec<(i32, f64, f64, f64)> {
        self.vertical_pieces(0)
    }

    fn vertical_pieces(&self, offset: usize) -> Vec<(i32, f64, f64, f64)> {
        if self.vertical.last.is_none() {
            return Vec::new();
        }
        self.dec
            .l_range()
            .enumerate()
            .map(|(n, j)| {
                let b = n * 6 + offset;
                (j, self.vertical.sup[b].sqrt(), self.vertical.integral[b + 1].sqrt(), self.vertical.integral[b + 2].sqrt())
            })
            .collect()
    }

    fn b012_from(&self, rows: &[(i32, f64, f64, f64)]) -> f64 {
        rows.iter()
            .map(|&(j, sup, h, v)| (j as f64 / 2.0).exp2() * (sup + self.nu_h.sqrt() * h + self.nu_3.sqrt() * v))
            .sum()
    }

    /// `||a||_{B^{0,1/2}(T)}`.
    pub fn b012_norm(&self) -> f64 {
        self.b012_from(&self.vertical_pieces(0))
    }

    /// `||a||_{B^{-1+2/p,1/2}_p(T)}`.
    pub fn besov_time_norm(&self) -> f64 {
        let low = self.b012_from(&self.vertical_pieces(3));
        if self.bands.last.is_none() {
            return low;
        }
        let p = self.p;
        let sup = self.band_matrix(&self.bands.sup);
        let int = self.band_matrix(&self.bands.integral);
        let mut high = 0.0;
        for l in self.dec.l_range() {
            let mut inner = 0.0;
            for k in self.dec.k_range().filter(|&k| k >= l - 1) {
                let kf = k as f64;
                inner += ((-2.0 + 4.0 / p) * kf).exp2() * sup.get(k, l)
                    + self.nu_h * (4.0 / p * kf).exp2() * int.get(k, l)
                    + self.nu_3 * ((-2.0 + 4.0 / p) * kf + 2.0 * l as f64).exp2() * int.get(k, l);
            }
            high += (l as f64 / 2.0).exp2() * inner.sqrt();
        }
        high + low
    }

    fn band_matrix(&self, values: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::zeros(&self.dec);
        m.values_mut().copy_from_slice(values);
        m
    }

    /// `||Delta^h_k Delta^v_l a||_{L^inf_T(L^p_h(L^2_v))}`.
    pub fn band_linf(&self, k: i32, l: i32) -> f64 {
        if self.bands.last.is_none() {
            return 0.0;
        }
        self.band_matrix(&self.bands.sup).get(k, l).sqrt()
    }

    /// `||Delta^h_k Delta^v_l a||_{L^2_T(L^p_h(L^2_v))}`.
    pub fn band_l2(&self, k: i32, l: i32) -> f64 {
        if self.bands.last.is_none() {
            return 0.0;
        }
        self.band_matrix(&self.bands.integral).get(k, l).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn initial_sample_sets_sup_and_zero_integrals() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut f = SpectralField::zeros(g);
        f.set_coeff([4, 0, 2], Complex64::new(0.5, 0.0));
        f.set_coeff([-4, 0, -2], Complex64::new(0.5, 0.0));
        let z = SpectralField::zeros(g);
        let v = VectorField::new(z.clone(), f, z).unwrap();
        let mut acc = NormAccumulator::new(dec.clone(), 4.0, 1.0, 0.1);
        acc.update(0.0, &v).unwrap();
        for (_, _, h, vv) in acc.vertical_rows() {
            assert_eq!(h, 0.0);
            assert_eq!(vv, 0.0);
        }
        let b = crate::besov::band_matrix(&dec, v.comp(1), 4.0).unwrap();
        for (k, l, val) in b.iter() {
            assert!((acc.band_linf(k, l) - val).abs() <= 1e-14 * val.max(1e-300));
            assert_eq!(acc.band_l2(k, l), 0.0);
        }
        assert!(acc.update(-1.0, &v).is_err());
    }

    #[test]
    fn frozen_field_integrals_grow_linearly() {
        let g = Grid::new(16, 16, 16).unwrap();
        let dec = DyadicDecomposition::new(g);
        let mut f = SpectralField::zeros(g);
        f.set_coeff([3, 1, 4], Complex64::new(0.5, 0.2));
        f.set_coeff([-3, -1, -4], Complex64::new(0.5, -0.2));
        let z = SpectralField::zeros(g);
        let v = VectorField::new(f, z.clone(), z).unwrap();
        let mut acc = NormAccumulator::new(dec, 2.0, 1.0, 0.5);
        let mut prev = 0.0;
        for s in 0..=4 {
            acc.update(s as f64 * 0.25, &v).unwrap();
            let n = acc.besov_time_norm();
            assert!(n >= prev);
            prev = n;
        }
        let rows = acc.vertical_rows();
        let xi_h2 = 10.0;
        let total: f64 = rows.iter().map(|r| r.2 * r.2).sum();
        let l2sq = v.l2_norm().powi(2);
        // sum_j phi_j^2 <= 1, so the banded gradient energy is at most the full one.
        assert!(total <= xi_h2 * l2sq * (1.0 + 1e-12));
        assert!(total > 0.0);
    }
}
