//! Scalar and vector fields stored as Fourier amplitudes on a periodic grid.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{self, Direction, ALL_AXES};
use crate::grid::Grid;

/// Coordinate axis; `X3` is the vertical direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// Parse the 1-based axis number used on the command line.
    pub fn from_number(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::InvalidParameter(format!("axis {n} not in {{1,2,3}}"))),
        }
    }
}

/// Fourier amplitudes `coeff(m)` of a field with
/// `f(x) = sum_m coeff(m) e^{i xi_m . x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.size()] }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::DimensionMismatch { expected: grid.size(), got: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    /// Discrete Fourier coefficients of real samples taken at `x_j = j L / n`.
    pub fn forward_transform(samples: &[f64], grid: Grid) -> Result<Self> {
        let data = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::forward_transform_complex(data, grid)
    }

    pub fn forward_transform_complex(mut samples: Vec<Complex64>, grid: Grid) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::DimensionMismatch { expected: grid.size(), got: samples.len() });
        }
        fft::transform(&grid, &mut samples, Direction::Forward, ALL_AXES);
        Ok(Self { grid, coeffs: samples })
    }

    /// Real physical samples (the imaginary residue is dropped).
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().into_iter().map(|c| c.re).collect()
    }

    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::transform(&self.grid, &mut data, Direction::Inverse, ALL_AXES);
        data
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Amplitude of the signed mode `(m1, m2, m3)`.
    pub fn coeff(&self, m: [i64; 3]) -> Complex64 {
        self.coeffs[self.mode_index(m)]
    }

    pub fn set_coeff(&mut self, m: [i64; 3], value: Complex64) {
        let idx = self.mode_index(m);
        self.coeffs[idx] = value;
    }

    fn mode_index(&self, m: [i64; 3]) -> usize {
        let g = &self.grid;
        g.index(g.storage_index(0, m[0]), g.storage_index(1, m[1]), g.storage_index(2, m[2]))
    }

    /// Multiply every amplitude by a real symbol of the wavevector.
    pub fn apply_symbol(&self, symbol: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        out.apply_symbol_in_place(symbol);
        out
    }

    pub fn apply_symbol_in_place(&mut self, symbol: impl Fn(f64, f64, f64) -> f64) {
        let [k1, k2, k3] = [0, 1, 2].map(|a| self.grid.wavenumbers(a));
        let mut idx = 0;
        for &x1 in &k1 {
            for &x2 in &k2 {
                for &x3 in &k3 {
                    self.coeffs[idx] *= symbol(x1, x2, x3);
                    idx += 1;
                }
            }
        }
    }

    /// `d/dx_axis`: amplitudes multiplied by `i xi_axis`.
    pub fn partial_derivative(&self, axis: Axis) -> Self {
        let a = axis.index();
        let ks = self.grid.wavenumbers(a);
        let [_, n2, n3] = self.grid.n();
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let i = match a {
                0 => idx / (n2 * n3),
                1 => (idx / n3) % n2,
                _ => idx % n3,
            };
            *c *= Complex64::new(0.0, ks[i]);
        }
        out
    }

    /// Two-thirds rule: zero every amplitude with `|m_i| > n_i / 3` on some axis.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let mask = DealiasMask::new(&self.grid);
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !mask.keeps(idx) {
                *c = Complex64::default();
            }
        }
    }

    /// `||f||_{L^2}` over the box, by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Real L2 inner product `Re int f conj(g) dx`, by Parseval.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(self.grid.volume() * s)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `coeff(-m) = conj(coeff(m))`.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.negated_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    /// The same trigonometric polynomial on another grid of the same box.
    /// Modes not strictly below the Nyquist index of both grids are dropped.
    pub fn resampled(&self, grid: Grid) -> Result<Self> {
        if grid.lengths() != self.grid.lengths() {
            return Err(Error::GridMismatch);
        }
        let (from, to) = (self.grid.n(), grid.n());
        let lim = |n: usize| if n == 1 { 0 } else { n as i64 / 2 - 1 };
        let k = [0, 1, 2].map(|a| lim(from[a]).min(lim(to[a])));
        let mut out = Self::zeros(grid);
        for m1 in -k[0]..=k[0] {
            for m2 in -k[1]..=k[1] {
                for m3 in -k[2]..=k[2] {
                    out.set_coeff([m1, m2, m3], self.coeff([m1, m2, m3]));
                }
            }
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.try_add(rhs).expect("grid mismatch in field addition")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.try_sub(rhs).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

/// Precomputed two-thirds-rule membership per storage index.
#[derive(Clone, Debug)]
pub struct DealiasMask {
    keep: Vec<bool>,
}

impl DealiasMask {
    pub fn new(grid: &Grid) -> Self {
        let [n1, n2, n3] = grid.n();
        let ok = |axis: usize, i: usize| (grid.mode(axis, i).unsigned_abs() as f64) <= grid.dealias_limit(axis);
        let mut keep = Vec::with_capacity(grid.size());
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    keep.push(ok(0, i1) && ok(1, i2) && (n3 == 1 || ok(2, i3)));
                }
            }
        }
        Self { keep }
    }

    #[inline]
    pub fn keeps(&self, idx: usize) -> bool {
        self.keep[idx]
    }
}

/// Three scalar fields on a shared grid with a divergence-free claim.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [SpectralField; 3],
    divergence_free: bool,
}

impl VectorField {
    pub fn new(u1: SpectralField, u2: SpectralField, u3: SpectralField) -> Result<Self> {
        if u1.grid != u2.grid || u1.grid != u3.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { comps: [u1, u2, u3], divergence_free: false })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = SpectralField::zeros(grid);
        Self { comps: [z.clone(), z.clone(), z], divergence_free: true }
    }

    pub fn from_physical(samples: [&[f64]; 3], grid: Grid) -> Result<Self> {
        Self::new(
            SpectralField::forward_transform(samples[0], grid)?,
            SpectralField::forward_transform(samples[1], grid)?,
            SpectralField::forward_transform(samples[2], grid)?,
        )
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn comps(&self) -> &[SpectralField; 3] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &SpectralField {
        &self.comps[i]
    }

    pub fn comps_mut(&mut self) -> &mut [SpectralField; 3] {
        self.divergence_free = false;
        &mut self.comps
    }

    pub fn into_comps(self) -> [SpectralField; 3] {
        self.comps
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// Record the divergence-free claim after checking it at the given tolerance.
    pub fn claim_divergence_free(mut self, tol: f64) -> Result<Self> {
        let r = self.divergence_residual();
        if r > tol {
            return Err(Error::InvalidParameter(format!("divergence residual {r:e} exceeds {tol:e}")));
        }
        self.divergence_free = true;
        Ok(self)
    }

    pub(crate) fn with_claim(mut self, claim: bool) -> Self {
        self.divergence_free = claim;
        self
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        let comps = [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])];
        Self { comps, divergence_free: false }
    }

    /// Apply a scalar symbol to every component; the divergence-free claim
    /// survives because scalar multipliers commute with the divergence.
    pub fn apply_symbol(&self, symbol: impl Fn(f64, f64, f64) -> f64 + Copy) -> Self {
        let mut out = self.map(|c| c.apply_symbol(symbol));
        out.divergence_free = self.divergence_free;
        out
    }

    pub fn dealias(&self) -> Self {
        let mut out = self.map(SpectralField::dealias);
        out.divergence_free = self.divergence_free;
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.map(|f| f.scaled(c));
        out.divergence_free = self.divergence_free;
        out
    }

    /// Componentwise [`SpectralField::resampled`]; dropping whole modes
    /// keeps the divergence-free claim.
    pub fn resampled(&self, grid: Grid) -> Result<Self> {
        let [a, b, c] = self.comps.each_ref().map(|f| f.resampled(grid));
        Ok(Self { comps: [a?, b?, c?], divergence_free: self.divergence_free })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let comps = [
            self.comps[0].try_add(&other.comps[0])?,
            self.comps[1].try_add(&other.comps[1])?,
            self.comps[2].try_add(&other.comps[2])?,
        ];
        Ok(Self { comps, divergence_free: self.divergence_free && other.divergence_free })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let comps = [
            self.comps[0].try_sub(&other.comps[0])?,
            self.comps[1].try_sub(&other.comps[1])?,
            self.comps[2].try_sub(&other.comps[2])?,
        ];
        Ok(Self { comps, divergence_free: self.divergence_free && other.divergence_free })
    }

    pub fn divergence(&self) -> SpectralField {
        let mut out = self.comps[0].partial_derivative(Axis::X1);
        let d2 = self.comps[1].partial_derivative(Axis::X2);
        let d3 = self.comps[2].partial_derivative(Axis::X3);
        for ((o, a), b) in out.coeffs.iter_mut().zip(&d2.coeffs).zip(&d3.coeffs) {
            *o += a + b;
        }
        out
    }

    /// `max_m |xi . u(xi)| / max(1, |u(xi)|)`.
    pub fn divergence_residual(&self) -> f64 {
        let g = *self.grid();
        let [k1, k2, k3] = [0, 1, 2].map(|a| g.wavenumbers(a));
        let [a, b, c] = [0, 1, 2].map(|i| self.comps[i].coeffs());
        let mut worst: f64 = 0.0;
        let mut idx = 0;
        for &x1 in &k1 {
            for &x2 in &k2 {
                for &x3 in &k3 {
                    let d = a[idx] * x1 + b[idx] * x2 + c[idx] * x3;
                    let mag = (a[idx].norm_sqr() + b[idx].norm_sqr() + c[idx].norm_sqr()).sqrt();
                    worst = worst.max(d.norm() / mag.max(1.0));
                    idx += 1;
                }
            }
        }
        worst
    }

    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        let mut s = 0.0;
        for i in 0..3 {
            s += self.comps[i].inner(&other.comps[i])?;
        }
        Ok(s)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(SpectralField::is_finite)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.iter().map(SpectralField::max_abs_coeff).fold(0.0, f64::max)
    }
}

/// Leray projection `v - grad (-Delta)^{-1} div v`: at each nonzero
/// wavevector, removes the component of `v(xi)` along `xi`. The mean mode
/// passes through unchanged.
pub fn leray_project(v: &VectorField) -> VectorField {
    let g = *v.grid();
    let [k1, k2, k3] = [0, 1, 2].map(|a| g.wavenumbers(a));
    let mut out = v.clone();
    {
        let [a, b, c] = &mut out.comps;
        let (a, b, c) = (a.coeffs_mut(), b.coeffs_mut(), c.coeffs_mut());
        let mut idx = 0;
        for &x1 in &k1 {
            for &x2 in &k2 {
                for &x3 in &k3 {
                    let k2sum = x1 * x1 + x2 * x2 + x3 * x3;
                    if k2sum > 0.0 {
                        let d = (a[idx] * x1 + b[idx] * x2 + c[idx] * x3) / k2sum;
                        a[idx] -= d * x1;
                        b[idx] -= d * x2;
                        c[idx] -= d * x3;
                    }
                    idx += 1;
                }
            }
        }
    }
    out.divergence_free = true;
    out
}

/// Mixed Lebesgue norm `|| ||f(x_h, .)||_{L^{q_v}_v} ||_{L^{p_h}_h}` by the
/// rectangle rule on the grid. Exponents may be `f64::INFINITY`.
/// Complex-valued data is measured through its modulus.
pub fn mixed_norm(f: &SpectralField, p_h: f64, q_v: f64) -> Result<f64> {
    check_exponent(p_h)?;
    check_exponent(q_v)?;
    let values = f.to_physical_complex();
    Ok(mixed_norm_of_samples(f.grid(), &values, p_h, q_v))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// [`mixed_norm`] of physical samples in storage order.
pub fn mixed_norm_of_samples(grid: &Grid, values: &[Complex64], p_h: f64, q_v: f64) -> f64 {
    let [_, _, n3] = grid.n();
    let dz = if grid.is_planar() { 1.0 } else { grid.spacing(2) };
    let dh = grid.spacing(0) * grid.spacing(1);
    let inner: Vec<f64> = values
        .chunks_exact(n3)
        .map(|col| {
            if q_v.is_infinite() {
                col.iter().map(|c| c.norm()).fold(0.0, f64::max)
            } else {
                (col.iter().map(|c| c.norm().powf(q_v)).sum::<f64>() * dz).powf(1.0 / q_v)
            }
        })
        .collect();
    lp_of_horizontal(&inner, dh, p_h)
}

/// `(sum_x g(x)^p dx)^{1/p}` over nonnegative samples, max for `p = inf`.
pub(crate) fn lp_of_horizontal(values: &[f64], dh: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.iter().map(|v| v * v).sum::<f64>() * dh).sqrt()
    } else {
        (values.iter().map(|v| v.powf(p)).sum::<f64>() * dh).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
        let [n1, n2, n3] = grid.n();
        let mut out = Vec::with_capacity(grid.size());
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    out.push(f(
                        i1 as f64 * grid.spacing(0),
                        i2 as f64 * grid.spacing(1),
                        i3 as f64 * grid.spacing(2),
                    ));
                }
            }
        }
        out
    }

    #[test]
    fn constant_field_has_only_mean_mode() {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = SpectralField::forward_transform(&vec![3.0; g.size()], g).unwrap();
        assert!((f.coeff([0, 0, 0]) - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        let rest: f64 = f.coeffs().iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-15);
    }

    #[test]
    fn sine_has_two_imaginary_modes() {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = SpectralField::forward_transform(&sample(&g, |x, _, _| x.sin()), g).unwrap();
        assert!((f.coeff([1, 0, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((f.coeff([-1, 0, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let total: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = SpectralField::forward_transform(&sample(&g, |x, _, _| x.sin()), g).unwrap();
        let c = SpectralField::forward_transform(&sample(&g, |x, _, _| x.cos()), g).unwrap();
        let d = f.partial_derivative(Axis::X1);
        for (a, b) in d.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(f.partial_derivative(Axis::X3).max_abs_coeff(), 0.0);
    }

    #[test]
    fn mixed_derivatives_commute() {
        let g = Grid::new(8, 10, 8).unwrap();
        let f = SpectralField::forward_transform(&sample(&g, |x, y, z| (x + 2.0 * y).sin() * z.cos() + (3.0 * y).cos()), g)
            .unwrap();
        let a = f.partial_derivative(Axis::X1).partial_derivative(Axis::X2);
        let b = f.partial_derivative(Axis::X2).partial_derivative(Axis::X1);
        let diff = a.try_sub(&b).unwrap().max_abs_coeff();
        assert!(diff <= 1e-15 * a.max_abs_coeff());
    }

    #[test]
    fn resampling_refines_quadrature() {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = SpectralField::forward_transform(&sample(&g, |x, _, _| (2.0 * x).cos()), g).unwrap();
        let fine = f.resampled(Grid::new(16, 16, 8).unwrap()).unwrap();
        assert!((fine.l2_norm() - f.l2_norm()).abs() < 1e-13);
        assert!(fine.resampled(g).unwrap().try_sub(&f).unwrap().max_abs_coeff() < 1e-15);
        // int cos^4 = 3/8 per unit volume; on 8 points the cos(8x) term aliases onto the mean.
        let exact = (3.0f64 / 8.0 * g.volume()).powf(0.25);
        assert!((mixed_norm(&fine, 4.0, 4.0).unwrap() - exact).abs() < 1e-12);
        assert!((mixed_norm(&f, 4.0, 4.0).unwrap() - exact).abs() > 1e-3);
        assert!(f.resampled(Grid::with_lengths([8, 8, 8], [1.0; 3]).unwrap()).is_err());
    }

    #[test]
    fn mixed_norm_of_constant_and_tensor_products() {
        let g = Grid::new(8, 8, 8).unwrap();
        let one = SpectralField::forward_transform(&vec![1.0; g.size()], g).unwrap();
        let n = mixed_norm(&one, 2.0, 2.0).unwrap();
        assert!((n - (2.0 * PI).powf(1.5)).abs() < 1e-12);

        let gh = |x: f64, y: f64| 2.0 + x.sin() * y.cos();
        let hv = |z: f64| 1.5 + (2.0 * z).cos();
        let f = SpectralField::forward_transform(&sample(&g, |x, y, z| gh(x, y) * hv(z)), g).unwrap();
        let (p, q) = (3.0, 4.0);
        let dh = g.spacing(0) * g.spacing(1);
        let mut gp = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                gp += gh(i as f64 * g.spacing(0), j as f64 * g.spacing(1)).abs().powf(p) * dh;
            }
        }
        let hq: f64 = (0..8).map(|k| hv(k as f64 * g.spacing(2)).abs().powf(q) * g.spacing(2)).sum();
        let expected = gp.powf(1.0 / p) * hq.powf(1.0 / q);
        assert!((mixed_norm(&f, p, q).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn mixed_norm_rejects_small_exponents() {
        let g = Grid::new(8, 8, 8).unwrap();
        let f = SpectralField::zeros(g);
        assert_eq!(mixed_norm(&f, 0.5, 2.0), Err(Error::InvalidExponent(0.5)));
        assert!(mixed_norm(&f, 2.0, f64::NAN).is_err());
        assert!(mixed_norm(&f, f64::INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn dealias_keeps_inner_modes_and_kills_outer() {
        let g = Grid::new(8, 8, 8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff([2, -2, 1], Complex64::new(1.0, 2.0));
        assert_eq!(f.dealias(), f);
        let mut h = SpectralField::zeros(g);
        h.set_coeff([3, 0, 0], Complex64::new(1.0, 0.0));
        assert_eq!(h.dealias().max_abs_coeff(), 0.0);
    }

    #[test]
    fn leray_annihilates_gradients() {
        let g = Grid::new(8, 8, 8).unwrap();
        let q = SpectralField::forward_transform(&sample(&g, |x, y, z| (x + y).sin() + (2.0 * z - y).cos()), g).unwrap();
        let grad = VectorField::new(
            q.partial_derivative(Axis::X1),
            q.partial_derivative(Axis::X2),
            q.partial_derivative(Axis::X3),
        )
        .unwrap();
        assert!(leray_project(&grad).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn leray_passes_mean_mode() {
        let g = Grid::new(8, 8, 8).unwrap();
        let mut a = SpectralField::zeros(g);
        a.set_coeff([0, 0, 0], Complex64::new(1.5, 0.0));
        let v = VectorField::new(a.clone(), a.clone(), a).unwrap();
        assert_eq!(leray_project(&v).comps(), v.comps());
    }
}
