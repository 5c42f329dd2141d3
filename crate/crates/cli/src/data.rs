//! Initial-data generators: modulated ring profiles and seeded random
//! band-limited fields.

use std::f64::consts::PI;

use ans_core::{leray_project, make_partition, Error, Grid, Result, SpectralField, VectorField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Support of the partition function, onto which profile rings are mapped.
fn phi_ring() -> (f64, f64) {
    make_partition().support()
}

/// Parameters of `u_0 = eps^{-1+2/q} sin(x_1/eps) (0, -d_3 Phi, d_2 Phi)` with
/// `Phi = phi_0(x_3) phi_1(x_h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatoryDataSpec {
    pub epsilon: f64,
    pub q: f64,
    /// Spectral ring of the horizontal profile `phi_1`.
    pub ring_h: (f64, f64),
    /// Spectral ring of the vertical profile `phi_0`.
    pub ring_v: (f64, f64),
}

impl OscillatoryDataSpec {
    pub fn new(epsilon: f64, q: f64) -> Self {
        Self { epsilon, q, ring_h: phi_ring(), ring_v: phi_ring() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if !(self.q >= 2.0) {
            return Err(Error::InvalidParameter(format!("q = {} must be at least 2", self.q)));
        }
        for (name, (a, b)) in [("horizontal", self.ring_h), ("vertical", self.ring_v)] {
            if !(a > 0.0 && b > a && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} ring ({a}, {b}) must satisfy 0 < a < b")));
            }
        }
        Ok(())
    }

    /// The amplitude factor `eps^{-1+2/q}`.
    pub fn amplitude(&self) -> f64 {
        self.epsilon.powf(-1.0 + 2.0 / self.q)
    }
}

/// Profile spectrum: the partition function with its support mapped
/// affinely onto `ring`.
pub fn ring_profile(r: f64, ring: (f64, f64)) -> f64 {
    let (a, b) = ring;
    if r <= a || r >= b {
        return 0.0;
    }
    let (lo, hi) = phi_ring();
    let tau = lo + (r - a) * (hi - lo) / (b - a);
    make_partition().eval(tau)
}

/// The carrier `1/eps` snapped to the nearest wavenumber of the `x_1` axis,
/// as `(mode index, wavenumber)`.
pub fn snapped_carrier(grid: &Grid, epsilon: f64) -> (i64, f64) {
    let unit = 2.0 * PI / grid.lengths()[0];
    let m = (1.0 / (epsilon * unit)).round() as i64;
    (m, m as f64 * unit)
}

fn dealiased_wavenumber(grid: &Grid, axis: usize) -> f64 {
    2.0 * PI / grid.lengths()[axis] * grid.dealias_limit(axis).floor()
}

/// Fails unless the snapped carrier plus the profile ring stays inside the
/// dealiased range of every axis.
pub fn check_resolvable(grid: &Grid, spec: &OscillatoryDataSpec) -> Result<()> {
    spec.validate()?;
    let (shift, omega) = snapped_carrier(grid, spec.epsilon);
    if shift < 1 {
        return Err(Error::Unresolvable(format!("epsilon = {} is larger than the box", spec.epsilon)));
    }
    let limit = dealiased_wavenumber(grid, 0);
    if omega + spec.ring_h.1 > limit || spec.ring_h.1 > dealiased_wavenumber(grid, 1) {
        return Err(Error::Unresolvable(format!(
            "epsilon = {}: carrier {omega} plus ring {} exceeds the dealiased wavenumber {limit}",
            spec.epsilon, spec.ring_h.1
        )));
    }
    if !grid.is_planar() && spec.ring_v.1 > dealiased_wavenumber(grid, 2) {
        return Err(Error::Unresolvable(format!("vertical ring {:?} exceeds the dealiased range", spec.ring_v)));
    }
    Ok(())
}

/// The oscillatory datum on `grid`. Fails when the carrier plus the
/// profile ring leaves the dealiased range.
pub fn gen_oscillatory(spec: &OscillatoryDataSpec, grid: &Grid) -> Result<VectorField> {
    check_resolvable(grid, spec)?;
    let shift = snapped_carrier(grid, spec.epsilon).0;
    let [n1, n2, n3] = grid.n();
    let amp = spec.amplitude();
    let profile = |i1: usize, i2: usize, i3: usize| {
        let (a, b) = (grid.wavenumber(0, i1), grid.wavenumber(1, i2));
        let v = if grid.is_planar() { 1.0 } else { ring_profile(grid.wavenumber(2, i3).abs(), spec.ring_v) };
        ring_profile(a.hypot(b), spec.ring_h) * v
    };
    let mut u2 = SpectralField::zeros(*grid);
    let mut u3 = SpectralField::zeros(*grid);
    let i = Complex64::new(0.0, 1.0);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                let phi = profile(i1, i2, i3);
                if phi == 0.0 {
                    continue;
                }
                let (x2, x3) = (grid.wavenumber(1, i2), grid.wavenumber(2, i3));
                // (0, -d_3 Phi, d_2 Phi) at this mode, then sin(w x_1) = (e^{iwx} - e^{-iwx}) / 2i.
                let g2 = -i * x3 * phi * amp;
                let g3 = i * x2 * phi * amp;
                let m = [grid.mode(0, i1), grid.mode(1, i2), grid.mode(2, i3)];
                for (s, sign) in [(shift, 1.0), (-shift, -1.0)] {
                    let target = [m[0] + s, m[1], m[2]];
                    let c = sign / (2.0 * i);
                    u2.set_coeff(target, u2.coeff(target) + g2 * c);
                    u3.set_coeff(target, u3.coeff(target) + g3 * c);
                }
            }
        }
    }
    VectorField::new(SpectralField::zeros(*grid), u2, u3)?.claim_divergence_free(1e-10)
}

/// The planar profile `e^{i x_1 / eps} phi(x_h)` with the carrier snapped as
/// in [`gen_oscillatory`]. Complex-valued; must fit below the Nyquist
/// wavenumber.
pub fn modulated_profile(grid: &Grid, epsilon: f64, ring: (f64, f64)) -> Result<SpectralField> {
    let (shift, omega) = snapped_carrier(grid, epsilon);
    let nyquist = PI / grid.spacing(0);
    if shift < 1 || omega + ring.1 >= nyquist || ring.1 >= PI / grid.spacing(1) {
        return Err(Error::Unresolvable(format!("epsilon = {epsilon} on this grid")));
    }
    let [n1, n2, n3] = grid.n();
    let mut f = SpectralField::zeros(*grid);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let phi = ring_profile(grid.wavenumber(0, i1).hypot(grid.wavenumber(1, i2)), ring);
            if phi == 0.0 {
                continue;
            }
            for i3 in 0..n3 {
                if grid.mode(2, i3) == 0 {
                    f.set_coeff([grid.mode(0, i1) + shift, grid.mode(1, i2), 0], Complex64::new(phi, 0.0));
                }
            }
        }
    }
    Ok(f)
}

/// Dyadic band ranges of a random field: `k` horizontal, `l` vertical
/// (`None` means unrestricted).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandRanges {
    pub k: Option<(i32, i32)>,
    pub l: Option<(i32, i32)>,
}

impl BandRanges {
    pub fn new(k: (i32, i32), l: (i32, i32)) -> Self {
        Self { k: Some(k), l: Some(l) }
    }

    /// Spectral weight `sum_k phi(2^{-k}|xi_h|) sum_l phi(2^{-l}|xi_3|)`.
    pub fn weight(&self, xi: [f64; 3]) -> f64 {
        let phi = make_partition();
        let part = |r: f64, range: Option<(i32, i32)>| match range {
            Some((lo, hi)) => phi.dyadic_sum(r, lo, hi),
            None => 1.0,
        };
        part(xi[0].hypot(xi[1]), self.k) * part(xi[2].abs(), self.l)
    }
}

fn random_real_spectrum(grid: &Grid, rng: &mut ChaCha8Rng, weight: &impl Fn([f64; 3]) -> f64) -> SpectralField {
    let [n1, n2, n3] = grid.n();
    let mut c = Vec::with_capacity(grid.size());
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                let w = weight([grid.wavenumber(0, i1), grid.wavenumber(1, i2), grid.wavenumber(2, i3)]);
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                c.push(z * w);
            }
        }
    }
    let sym: Vec<Complex64> = (0..c.len()).map(|k| (c[k] + c[grid.negated_index(k)].conj()) * 0.5).collect();
    let mut f = SpectralField::from_coeffs(*grid, sym).expect("length matches grid");
    f.coeffs_mut()[0] = Complex64::default();
    f.dealias()
}

fn rms(f_l2: f64, grid: &Grid) -> f64 {
    f_l2 / grid.volume().sqrt()
}

/// Seeded random real scalar field with spectrum `weight(xi)` times uniform
/// complex noise, zero mean, dealiased, scaled to root-mean-square `amplitude`.
pub fn gen_random_scalar(grid: &Grid, seed: u64, weight: impl Fn([f64; 3]) -> f64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_real_spectrum(grid, &mut rng, &weight);
    let r = rms(f.l2_norm(), grid);
    if r > 0.0 {
        f.scaled(amplitude / r)
    } else {
        f
    }
}

/// Seeded random divergence-free vector field with spectral weight
/// `weight`, scaled to root-mean-square `amplitude`.
pub fn gen_random_weighted(grid: &Grid, seed: u64, weight: impl Fn([f64; 3]) -> f64, amplitude: f64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [a, b, c] = [0, 1, 2].map(|_| random_real_spectrum(grid, &mut rng, &weight));
    let v = leray_project(&VectorField::new(a, b, c).expect("shared grid"));
    let r = rms(v.l2_norm(), grid);
    if r > 0.0 {
        v.scaled(amplitude / r)
    } else {
        v
    }
}

/// [`gen_random_weighted`] with the weight of dyadic band ranges.
pub fn gen_random_bandlimited(grid: &Grid, seed: u64, bands: &BandRanges, amplitude: f64) -> VectorField {
    gen_random_weighted(grid, seed, |xi| bands.weight(xi), amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_data_is_real_and_divergence_free() {
        let g = Grid::new(48, 16, 16).unwrap();
        let u = gen_oscillatory(&OscillatoryDataSpec::new(0.125, 4.0), &g).unwrap();
        assert!(u.divergence_residual() < 1e-12);
        assert_eq!(u.comp(0).max_abs_coeff(), 0.0);
        for c in u.comps() {
            assert!(c.conjugate_symmetry_residual() < 1e-14);
            let imag = c.to_physical_complex().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(imag < 1e-10);
        }
    }

    #[test]
    fn carrier_sets_the_spectral_offset() {
        let g = Grid::new(64, 32, 16).unwrap();
        let peak = |eps: f64| {
            let u = gen_oscillatory(&OscillatoryDataSpec::new(eps, 4.0), &g).unwrap();
            let c = u.comp(2);
            let mut best = (0, 0.0);
            for i1 in 0..64 {
                let e: f64 = (0..32 * 16).map(|r| c.coeffs()[i1 * 512 + r].norm_sqr()).sum();
                if e > best.1 {
                    best = (g.mode(0, i1).abs(), e);
                }
            }
            best.0
        };
        let (a, b) = (peak(1.0 / 8.0), peak(1.0 / 16.0));
        assert!((7..=10).contains(&a), "{a}");
        assert!((15..=18).contains(&b), "{b}");
    }

    #[test]
    fn unresolvable_epsilon_is_refused() {
        let g = Grid::new(32, 32, 16).unwrap();
        assert!(gen_oscillatory(&OscillatoryDataSpec::new(1.0 / 16.0, 4.0), &g).is_err());
        assert!(gen_oscillatory(&OscillatoryDataSpec::new(0.125, 1.0), &g).is_err());
    }

    #[test]
    fn random_fields_are_seeded_and_divergence_free() {
        let g = Grid::new(16, 16, 16).unwrap();
        let bands = BandRanges::new((0, 2), (0, 2));
        let a = gen_random_bandlimited(&g, 7, &bands, 0.01);
        let b = gen_random_bandlimited(&g, 7, &bands, 0.01);
        let c = gen_random_bandlimited(&g, 8, &bands, 0.01);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.divergence_residual() < 1e-14);
        assert!((a.l2_norm() / g.volume().sqrt() - 0.01).abs() < 1e-14);
        for comp in a.comps() {
            assert!(comp.conjugate_symmetry_residual() < 1e-15);
        }
    }
}
