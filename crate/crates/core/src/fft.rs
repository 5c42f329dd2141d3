//! Batched multi-dimensional FFTs over the flat grid layout.
//!
//! Conventions: `Forward` computes `(1/N) sum_x f(x) e^{-i xi.x}` over the
//! transformed axes, `Inverse` computes the unnormalized synthesis
//! `sum_m c_m e^{i xi.x}`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let d = match dir {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, d))
}

/// All three axes.
pub const ALL_AXES: [bool; 3] = [true, true, true];
/// Only the two horizontal axes.
pub const HORIZONTAL_AXES: [bool; 3] = [true, true, false];

/// In-place transform of `data` (laid out as in [`Grid::index`]) along the
/// selected axes.
pub fn transform(grid: &Grid, data: &mut [Complex64], dir: Direction, axes: [bool; 3]) {
    let [n1, n2, n3] = grid.n();
    assert_eq!(data.len(), n1 * n2 * n3);
    let all = [vec![true; n1], vec![true; n2], vec![true; n3]];
    if axes[2] {
        pass_axis3(grid, data, dir, &all[0], &all[1]);
    }
    if axes[1] {
        pass_axis2(grid, data, dir, &all[0], &all[2]);
    }
    if axes[0] {
        pass_axis1(grid, data, dir, &all[1], &all[2]);
    }
    if dir == Direction::Forward {
        let count: usize = (0..3).filter(|&a| axes[a]).map(|a| grid.n()[a]).product();
        let s = 1.0 / count as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

fn band_masks(grid: &Grid, limit: [usize; 3]) -> [Vec<bool>; 3] {
    [0, 1, 2].map(|a| (0..grid.n()[a]).map(|i| grid.mode(a, i).unsigned_abs() as usize <= limit[a]).collect())
}

/// Full three-dimensional transform of data whose spectrum is confined to
/// `|m_a| <= limit[a]`. `Inverse` ignores input outside that box; `Forward`
/// only computes coefficients inside it and zeroes the rest.
pub fn transform_band_limited(grid: &Grid, data: &mut [Complex64], dir: Direction, limit: [usize; 3]) {
    let [n1, n2, n3] = grid.n();
    assert_eq!(data.len(), n1 * n2 * n3);
    let band = band_masks(grid, limit);
    let all = [vec![true; n1], vec![true; n2], vec![true; n3]];
    match dir {
        Direction::Inverse => {
            zero_outside(grid, data, &band, 1.0);
            inverse_passes(grid, data, &band, &all);
        }
        Direction::Forward => {
            pass_axis3(grid, data, dir, &all[0], &all[1]);
            pass_axis2(grid, data, dir, &all[0], &band[2]);
            pass_axis1(grid, data, dir, &band[1], &band[2]);
            zero_outside(grid, data, &band, 1.0 / (n1 * n2 * n3) as f64);
        }
    }
}

fn inverse_passes(grid: &Grid, data: &mut [Complex64], band: &[Vec<bool>; 3], all: &[Vec<bool>; 3]) {
    pass_axis1(grid, data, Direction::Inverse, &band[1], &band[2]);
    pass_axis2(grid, data, Direction::Inverse, &all[0], &band[2]);
    pass_axis3(grid, data, Direction::Inverse, &all[0], &all[1]);
}

/// Band-limited synthesis of `inputs`, a map `f` applied on each
/// `x3`-column of samples, and band-limited analysis of the `outputs` it
/// writes. Each column is mapped right after its last inverse pass, while
/// it is still in cache. Inputs must vanish outside the box; they are
/// overwritten.
pub(crate) fn map_band_limited<const I: usize, const O: usize>(
    grid: &Grid,
    limit: [usize; 3],
    inputs: &mut [Vec<Complex64>; I],
    outputs: &mut [Vec<Complex64>; O],
    mut f: impl FnMut(&[&[Complex64]; I], &mut [&mut [Complex64]; O]),
) {
    let [n1, n2, n3] = grid.n();
    let band = band_masks(grid, limit);
    let all = [vec![true; n1], vec![true; n2], vec![true; n3]];
    for z in inputs.iter_mut() {
        pass_axis1(grid, z, Direction::Inverse, &band[1], &band[2]);
        pass_axis2(grid, z, Direction::Inverse, &all[0], &band[2]);
    }
    let inv = plan(n3, Direction::Inverse);
    let fwd = plan(n3, Direction::Forward);
    let mut scratch = vec![Complex64::default(); inv.get_inplace_scratch_len().max(fwd.get_inplace_scratch_len())];
    for c in 0..n1 * n2 {
        let r = c * n3..(c + 1) * n3;
        if n3 > 1 {
            for z in inputs.iter_mut() {
                inv.process_with_scratch(&mut z[r.clone()], &mut scratch);
            }
        }
        let cols: [&[Complex64]; I] = std::array::from_fn(|k| &inputs[k][r.clone()]);
        let mut outs: [&mut [Complex64]; O] = outputs.each_mut().map(|o| &mut o[r.clone()]);
        f(&cols, &mut outs);
        if n3 > 1 {
            for o in outs.iter_mut() {
                fwd.process_with_scratch(o, &mut scratch);
            }
        }
    }
    for o in outputs.iter_mut() {
        pass_axis2(grid, o, Direction::Forward, &all[0], &band[2]);
        pass_axis1(grid, o, Direction::Forward, &band[1], &band[2]);
        zero_outside(grid, o, &band, 1.0 / (n1 * n2 * n3) as f64);
    }
}

fn zero_outside(grid: &Grid, data: &mut [Complex64], band: &[Vec<bool>; 3], scale: f64) {
    let [_, n2, n3] = grid.n();
    for (c, col) in data.chunks_exact_mut(n3).enumerate() {
        let keep = band[0][c / n2] && band[1][c % n2];
        for (v, &k3) in col.iter_mut().zip(&band[2]) {
            if keep && k3 {
                *v *= scale;
            } else {
                *v = Complex64::default();
            }
        }
    }
}

/// Transforms along `x3` for the columns `(i1, i2)` selected by the masks.
fn pass_axis3(grid: &Grid, data: &mut [Complex64], dir: Direction, m1: &[bool], m2: &[bool]) {
    let [_, n2, n3] = grid.n();
    if n3 == 1 {
        return;
    }
    let fft = plan(n3, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let full2 = m2.iter().all(|&b| b);
    for (block, _) in data.chunks_exact_mut(n2 * n3).zip(m1).filter(|(_, &k)| k) {
        if full2 {
            fft.process_with_scratch(block, &mut scratch);
            continue;
        }
        for (col, _) in block.chunks_exact_mut(n3).zip(m2).filter(|(_, &k)| k) {
            fft.process_with_scratch(col, &mut scratch);
        }
    }
}

/// Transforms along `x2` for the lines `(i1, i3)` selected by the masks.
fn pass_axis2(grid: &Grid, data: &mut [Complex64], dir: Direction, m1: &[bool], m3: &[bool]) {
    let [_, n2, n3] = grid.n();
    if n2 == 1 {
        return;
    }
    let fft = plan(n2, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let sel: Vec<usize> = (0..n3).filter(|&i| m3[i]).collect();
    let ld = padded(n2);
    let mut buf = vec![Complex64::default(); ld * sel.len()];
    for (block, _) in data.chunks_exact_mut(n2 * n3).zip(m1).filter(|(_, &k)| k) {
        for (i2, row) in block.chunks_exact(n3).enumerate() {
            for (s, &i3) in sel.iter().enumerate() {
                buf[s * ld + i2] = row[i3];
            }
        }
        for line in buf.chunks_exact_mut(ld) {
            fft.process_with_scratch(&mut line[..n2], &mut scratch);
        }
        for (i2, row) in block.chunks_exact_mut(n3).enumerate() {
            for (s, &i3) in sel.iter().enumerate() {
                row[i3] = buf[s * ld + i2];
            }
        }
    }
}

/// Line stride for gathered transforms, padded off powers of two so the
/// strided writes do not collide in cache.
fn padded(n: usize) -> usize {
    n + 4
}

/// Transforms along `x1` for the lines `(i2, i3)` selected by the masks.
fn pass_axis1(grid: &Grid, data: &mut [Complex64], dir: Direction, m2: &[bool], m3: &[bool]) {
    let [n1, n2, n3] = grid.n();
    if n1 == 1 {
        return;
    }
    let fft = plan(n1, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let stride = n2 * n3;
    let sel: Vec<usize> = (0..n3).filter(|&i| m3[i]).collect();
    let ld = padded(n1);
    let mut buf = vec![Complex64::default(); ld * sel.len()];
    for i2 in (0..n2).filter(|&i| m2[i]) {
        for i1 in 0..n1 {
            let row = &data[i1 * stride + i2 * n3..i1 * stride + (i2 + 1) * n3];
            for (s, &i3) in sel.iter().enumerate() {
                buf[s * ld + i1] = row[i3];
            }
        }
        for line in buf.chunks_exact_mut(ld) {
            fft.process_with_scratch(&mut line[..n1], &mut scratch);
        }
        for i1 in 0..n1 {
            let row = &mut data[i1 * stride + i2 * n3..i1 * stride + (i2 + 1) * n3];
            for (s, &i3) in sel.iter().enumerate() {
                row[i3] = buf[s * ld + i1];
            }
        }
    }
}

/// Synthesize two real fields from their (conjugate-symmetric) coefficient
/// arrays with a single complex transform.
pub fn inverse_real_pair(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    transform(grid, &mut z, Direction::Inverse, ALL_AXES);
    split_real(&z)
}

/// Analyze two real sample arrays with a single complex transform, splitting
/// the result through conjugate symmetry.
pub fn forward_real_pair(grid: &Grid, f: &[f64], g: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = f.iter().zip(g).map(|(&x, &y)| Complex64::new(x, y)).collect();
    transform(grid, &mut z, Direction::Forward, ALL_AXES);
    split_spectrum(grid, &z)
}

/// [`inverse_real_pair`] for coefficients supported in `|m_a| <= limit[a]`.
pub fn inverse_real_pair_band_limited(grid: &Grid, a: &[Complex64], b: &[Complex64], limit: [usize; 3]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    transform_band_limited(grid, &mut z, Direction::Inverse, limit);
    split_real(&z)
}

/// [`forward_real_pair`] keeping only the coefficients in `|m_a| <= limit[a]`.
pub fn forward_real_pair_band_limited(grid: &Grid, f: &[f64], g: &[f64], limit: [usize; 3]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = f.iter().zip(g).map(|(&x, &y)| Complex64::new(x, y)).collect();
    transform_band_limited(grid, &mut z, Direction::Forward, limit);
    split_spectrum(grid, &z)
}

fn split_real(z: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
}

fn split_spectrum(grid: &Grid, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let [n1, n2, n3] = grid.n();
    let mut fa = vec![Complex64::default(); z.len()];
    let mut ga = vec![Complex64::default(); z.len()];
    let half_i = Complex64::new(0.0, -0.5);
    for i1 in 0..n1 {
        let j1 = (n1 - i1) % n1;
        for i2 in 0..n2 {
            let j2 = (n2 - i2) % n2;
            let base = (i1 * n2 + i2) * n3;
            let nbase = (j1 * n2 + j2) * n3;
            for i3 in 0..n3 {
                let idx = base + i3;
                let zm = z[idx];
                let zn = z[nbase + (n3 - i3) % n3].conj();
                fa[idx] = (zm + zn) * 0.5;
                ga[idx] = (zm - zn) * half_i;
            }
        }
    }
    (fa, ga)
}
