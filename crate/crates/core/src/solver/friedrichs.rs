use num_complex::Complex64;

use super::config::max_resolvable_radius;
use crate::error::{Error, Result};
use super::run::unflatten;
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::nonlinear::{divergence_at, quadratic_at, DealiasedBand};

/// Indicator masks of `P_n` (`|xi| <= n`), `P_1n` (`|xi| <= n`, `|xi_3| >= 1/n`)
/// and `P_2n` (`|xi_3| < 1/n`).
#[derive(Clone, Debug, PartialEq)]
pub struct FriedrichsMasks {
    pub n: f64,
    pub p_n: Vec<bool>,
    pub p_1n: Vec<bool>,
    pub p_2n: Vec<bool>,
}

pub fn friedrichs_projectors(grid: &Grid, n: f64) -> Result<FriedrichsMasks> {
    let r = max_resolvable_radius(grid);
    if !(n > 0.0 && n <= r) {
        return Err(Error::InvalidParameter(format!("Friedrichs radius {n} must lie in (0, {r}]")));
    }
    let [k1, k2, k3] = [0, 1, 2].map(|a| grid.wavenumbers(a));
    let mut p_n = Vec::with_capacity(grid.size());
    let mut p_1n = Vec::with_capacity(grid.size());
    let mut p_2n = Vec::with_capacity(grid.size());
    for &a in &k1 {
        for &b in &k2 {
            for &c in &k3 {
                let ball = a * a + b * b + c * c <= n * n;
                let low = c.abs() < 1.0 / n;
                p_n.push(ball);
                p_1n.push(ball && !low);
                p_2n.push(low);
            }
        }
    }
    Ok(FriedrichsMasks { n, p_n, p_1n, p_2n })
}

fn mask_field(f: &SpectralField, mask: &[bool]) -> SpectralField {
    let mut out = f.clone();
    out.coeffs_mut().iter_mut().zip(mask).for_each(|(c, &m)| {
        if !m {
            *c = Complex64::default();
        }
    });
    out
}

impl FriedrichsMasks {
    pub fn apply_n(&self, v: &VectorField) -> VectorField {
        let claim = v.is_divergence_free();
        v.map(|c| mask_field(c, &self.p_n)).with_claim(claim)
    }

    pub fn apply_1n(&self, v: &VectorField) -> VectorField {
        let claim = v.is_divergence_free();
        v.map(|c| mask_field(c, &self.p_1n)).with_claim(claim)
    }

    pub fn apply_2n(&self, v: &VectorField) -> VectorField {
        let claim = v.is_divergence_free();
        v.map(|c| mask_field(c, &self.p_2n)).with_claim(claim)
    }

    /// Largest amplitude outside the ball.
    pub fn outside_residual(&self, v: &VectorField) -> f64 {
        v.comps()
            .iter()
            .flat_map(|c| c.coeffs().iter().zip(&self.p_n).filter(|(_, &m)| !m).map(|(z, _)| z.norm()))
            .fold(0.0, f64::max)
    }
}

/// Nonlinear right-hand side of the Friedrichs system for `w` (viscous
/// terms excluded):
/// `-P_n(U.grad U - u_F.grad u_F) - P_1n(u_F.grad u_F)
///  - P_n grad (-Delta)^{-1} d_j d_k (U^j U^k - P_2n(u_F^j u_F^k))`
/// with `U = u_F + w`. Convective terms use the divergence form, which
/// coincides with `U.grad U` for divergence-free fields.
pub fn rhs_w(w: &VectorField, uf: &VectorField, masks: &FriedrichsMasks) -> Result<VectorField> {
    if w.grid() != uf.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *w.grid();
    if masks.p_n.len() != grid.size() {
        return Err(Error::GridMismatch);
    }
    let residual = masks.outside_residual(w);
    if residual > 0.0 {
        return Err(Error::SupportViolation(residual));
    }
    let band = DealiasedBand::new(&grid);
    let bm = masks.on_band(&band);
    let gather = |v: &VectorField| v.comps().iter().flat_map(|c| band.gather(c.coeffs())).collect::<Vec<_>>();
    let out = rhs_w_band(&band, &bm, &gather(w), &gather(uf));
    let n = band.len();
    let mut full = vec![Complex64::default(); 3 * grid.size()];
    for (m, &k) in band.idx.iter().enumerate() {
        for c in 0..3 {
            full[c * grid.size() + k] = out[c * n + m];
        }
    }
    Ok(unflatten(grid, &full))
}

/// `(P_n, P_1n, P_2n)` membership of each band mode.
pub(crate) type BandMasks = Vec<[bool; 3]>;

impl FriedrichsMasks {
    pub(crate) fn on_band(&self, band: &DealiasedBand) -> BandMasks {
        band.idx.iter().map(|&k| [self.p_n[k], self.p_1n[k], self.p_2n[k]]).collect()
    }
}

/// [`rhs_w`] on band coefficients (three consecutive blocks per field);
/// `w` must vanish off `P_n`.
pub(crate) fn rhs_w_band(band: &DealiasedBand, masks: &BandMasks, w: &[Complex64], uf: &[Complex64]) -> Vec<Complex64> {
    let n = band.len();
    let total: Vec<Complex64> = w.iter().zip(uf).map(|(a, b)| a + b).collect();
    let (u, f) = (total.chunks_exact(n).collect::<Vec<_>>(), uf.chunks_exact(n).collect::<Vec<_>>());
    let (tu, tf) = band.square_two([u[0], u[1], u[2]], [f[0], f[1], f[2]]);
    let mut out = vec![Complex64::default(); 3 * n];
    for (m, &[pn, p1n, p2n]) in masks.iter().enumerate() {
        let xi = &band.xi[m];
        let uu = band.tensor_at(&tu, m);
        let ff = band.tensor_at(&tf, m);
        let mut v = [Complex64::default(); 3];
        if pn {
            let diff: [Complex64; 6] = std::array::from_fn(|s| uu[s] - ff[s]);
            let conv = divergence_at(xi, &diff);
            let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            let pi = if k2 > 0.0 {
                let t = if p2n { &diff } else { &uu };
                -quadratic_at(xi, t) / k2
            } else {
                Complex64::default()
            };
            for i in 0..3 {
                v[i] -= conv[i] + Complex64::new(-pi.im, pi.re) * xi[i];
            }
        }
        if p1n {
            let conv = divergence_at(xi, &ff);
            for i in 0..3 {
                v[i] -= conv[i];
            }
        }
        for i in 0..3 {
            out[i * n + m] = v[i];
        }
    }
    band.recycle(tu);
    band.recycle(tf);
    out
}
