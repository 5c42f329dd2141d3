//! Direct reference computations: explicit DFT sums, coefficient-list
//! convolution and nested-loop quadrature. Quadratic cost; for small grids.
//! Only `ans_core` paths are used so the file can be shared with tests.

use std::f64::consts::PI;

use ans_core::{make_partition, Grid, SpectralField, VectorField};
use num_complex::Complex64;

/// `e^{sign 2 pi i m j / n}` for all `m, j < n`.
fn twiddles(n: usize, sign: f64) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|m| (0..n).map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * (m * j % n) as f64 / n as f64)).collect())
        .collect()
}

fn direct_sum(grid: &Grid, input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let [n1, n2, n3] = grid.n();
    let (w1, w2, w3) = (twiddles(n1, sign), twiddles(n2, sign), twiddles(n3, sign));
    let mut out = vec![Complex64::default(); grid.size()];
    for a1 in 0..n1 {
        for a2 in 0..n2 {
            for a3 in 0..n3 {
                let mut s = Complex64::default();
                for b1 in 0..n1 {
                    for b2 in 0..n2 {
                        let w = w1[a1][b1] * w2[a2][b2];
                        for b3 in 0..n3 {
                            s += input[grid.index(b1, b2, b3)] * w * w3[a3][b3];
                        }
                    }
                }
                out[grid.index(a1, a2, a3)] = s;
            }
        }
    }
    out
}

/// `hat f(m) = N^{-1} sum_x f(x) e^{-i m . x}` by explicit summation.
pub fn dft_forward(grid: &Grid, samples: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / grid.size() as f64;
    direct_sum(grid, samples, -1.0).into_iter().map(|c| c * scale).collect()
}

/// `f(x) = sum_m hat f(m) e^{i m . x}` by explicit summation.
pub fn dft_inverse(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    direct_sum(grid, coeffs, 1.0)
}

fn kept_modes(grid: &Grid) -> Vec<([i64; 3], [f64; 3])> {
    let [n1, n2, n3] = grid.n();
    let mut out = Vec::new();
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                let m = [grid.mode(0, i1), grid.mode(1, i2), grid.mode(2, i3)];
                if kept(grid, m) {
                    out.push((m, [grid.wavenumber(0, i1), grid.wavenumber(1, i2), grid.wavenumber(2, i3)]));
                }
            }
        }
    }
    out
}

fn kept(grid: &Grid, m: [i64; 3]) -> bool {
    (0..3).all(|ax| {
        let n = grid.n()[ax];
        if n == 1 {
            m[ax] == 0
        } else {
            3 * m[ax].abs() < n as i64
        }
    })
}

/// `f g` from the coefficient lists of the two-thirds truncations,
/// `sum_{p + q = m} f(p) g(q)`, truncated to the same set.
pub fn product(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let modes = kept_modes(&grid);
    let mut out = SpectralField::zeros(grid);
    for (p, _) in &modes {
        for (q, _) in &modes {
            let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            if kept(&grid, m) {
                let v = out.coeff(m) + f.coeff(*p) * g.coeff(*q);
                out.set_coeff(m, v);
            }
        }
    }
    out
}

/// `(u . grad) a` from the coefficient lists of the two-thirds truncations,
/// `sum_{p + q = m} sum_j u_j(p) i q_j a_i(q)`, truncated to the same set.
pub fn convect(u: &VectorField, a: &VectorField) -> VectorField {
    let grid = *u.grid();
    let modes = kept_modes(&grid);
    let mut out = [0, 1, 2].map(|_| SpectralField::zeros(grid));
    for (p, _) in &modes {
        for (q, xq) in &modes {
            let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            if !kept(&grid, m) {
                continue;
            }
            let mut grad = Complex64::default();
            for (j, x) in xq.iter().enumerate() {
                grad += u.comp(j).coeff(*p) * Complex64::new(0.0, *x);
            }
            for (i, o) in out.iter_mut().enumerate() {
                let v = o.coeff(m) + grad * a.comp(i).coeff(*q);
                o.set_coeff(m, v);
            }
        }
    }
    let [a1, a2, a3] = out;
    VectorField::new(a1, a2, a3).expect("shared grid")
}

/// `(sum_{x_h} (sum_{x_3} |f|^q dx_3)^{p/q} dx_h)^{1/p}` over the samples
/// of `f`, with the sup over the corresponding axis for infinite exponents.
pub fn mixed_norm(grid: &Grid, samples: &[Complex64], p: f64, q: f64) -> f64 {
    let [n1, n2, n3] = grid.n();
    let dz = if n3 == 1 { 1.0 } else { grid.lengths()[2] / n3 as f64 };
    let dh = grid.lengths()[0] / n1 as f64 * grid.lengths()[1] / n2 as f64;
    let mut outer = 0.0f64;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let mut inner = 0.0f64;
            for i3 in 0..n3 {
                let v = samples[grid.index(i1, i2, i3)].norm();
                if q.is_infinite() {
                    inner = inner.max(v);
                } else {
                    inner += v.powf(q) * dz;
                }
            }
            if q.is_finite() {
                inner = inner.powf(1.0 / q);
            }
            if p.is_infinite() {
                outer = outer.max(inner);
            } else {
                outer += inner.powf(p) * dh;
            }
        }
    }
    if p.is_infinite() {
        outer
    } else {
        outer.powf(1.0 / p)
    }
}

/// `Delta^v_j` by the partition function evaluated at each `2^{-j} |xi_3|`.
pub fn vertical_band(f: &SpectralField, j: i32) -> SpectralField {
    let grid = *f.grid();
    let phi = make_partition();
    let mut out = f.clone();
    let n3 = grid.n()[2];
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= phi.eval((-j as f64).exp2() * grid.wavenumber(2, idx % n3).abs());
    }
    out
}

/// `int f . g dx` by the rectangle rule on directly synthesized samples.
pub fn inner_by_quadrature(f: &VectorField, g: &VectorField) -> f64 {
    let grid = *f.grid();
    let cell = grid.volume() / grid.size() as f64;
    (0..3)
        .map(|i| {
            let a = dft_inverse(&grid, f.comp(i).coeffs());
            let b = dft_inverse(&grid, g.comp(i).coeffs());
            a.iter().zip(&b).map(|(x, y)| x.re * y.re).sum::<f64>() * cell
        })
        .sum()
}

/// `T |<Delta^v_j (u . grad a), Delta^v_j a>|` for time-independent `u, a`.
pub fn frozen_fj(u: &VectorField, a: &VectorField, j: i32, horizon: f64) -> f64 {
    let band = |f: &VectorField| {
        let [x, y, z] = [0, 1, 2].map(|i| vertical_band(f.comp(i), j));
        VectorField::new(x, y, z).expect("shared grid")
    };
    horizon * inner_by_quadrature(&band(&convect(u, a)), &band(a)).abs()
}
