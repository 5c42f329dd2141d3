//! Uniform periodic grids standing in for the whole space.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A periodic box `[0, L1) x [0, L2) x [0, L3)` sampled on `n1 x n2 x n3` points.
///
/// Axis sizes are even and at least 8. The one exception is `n3 == 1`, which
/// denotes a purely horizontal (two-dimensional) grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    len: [f64; 3],
}

impl Grid {
    /// The default `(2 pi)^3` box.
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        Self::with_lengths([n1, n2, n3], [2.0 * PI; 3])
    }

    /// A two-dimensional horizontal grid (`n3 = 1`) on a `(2 pi)^2` box.
    pub fn planar(n1: usize, n2: usize) -> Result<Self> {
        Self::with_lengths([n1, n2, 1], [2.0 * PI; 3])
    }

    pub fn with_lengths(n: [usize; 3], len: [f64; 3]) -> Result<Self> {
        for (axis, &ni) in n.iter().enumerate() {
            let planar_axis = axis == 2 && ni == 1;
            if !planar_axis && (ni < 8 || ni % 2 != 0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has {} points; need an even count >= 8",
                    axis + 1,
                    ni
                )));
            }
        }
        if len.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid(format!("box lengths {len:?} must be positive")));
        }
        Ok(Self { n, len })
    }

    /// Multiply each box side of the default box by `scale[i]`.
    pub fn with_box_scale(n: [usize; 3], scale: [f64; 3]) -> Result<Self> {
        Self::with_lengths(n, [2.0 * PI * scale[0], 2.0 * PI * scale[1], 2.0 * PI * scale[2]])
    }

    /// Same sample counts on a box shrunk by `factor`: every wavenumber is
    /// multiplied by `factor`. With the amplitude multiplied by `factor` this
    /// realizes the Navier-Stokes scaling `u -> factor * u(factor * x)`.
    pub fn shrunk(&self, factor: f64) -> Result<Self> {
        Self::with_lengths(self.n, [self.len[0] / factor, self.len[1] / factor, self.len[2] / factor])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.len
    }

    pub fn size(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn horizontal_size(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_planar(&self) -> bool {
        self.n[2] == 1
    }

    /// Measure of the box. For planar grids this is the horizontal area.
    pub fn volume(&self) -> f64 {
        if self.is_planar() {
            self.len[0] * self.len[1]
        } else {
            self.len[0] * self.len[1] * self.len[2]
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.size() as f64
    }

    /// Signed integer mode number of storage index `i` along `axis`
    /// (FFT ordering: `0, 1, ..., n/2 - 1, -n/2, ..., -1`).
    pub fn mode(&self, axis: usize, i: usize) -> i64 {
        let n = self.n[axis];
        if i < n / 2 || n == 1 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Storage index of the signed mode number `m` along `axis`.
    pub fn storage_index(&self, axis: usize, m: i64) -> usize {
        let n = self.n[axis] as i64;
        m.rem_euclid(n) as usize
    }

    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * PI / self.len[axis] * self.mode(axis, i) as f64
    }

    /// Wavenumbers for every storage index along `axis`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    /// Flat index with the third axis fastest.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n[1] + i2) * self.n[2] + i3
    }

    /// Storage index of `-m` for the mode stored at flat index `idx`.
    pub fn negated_index(&self, idx: usize) -> usize {
        let [n1, n2, n3] = self.n;
        let i3 = idx % n3;
        let i2 = (idx / n3) % n2;
        let i1 = idx / (n2 * n3);
        self.index((n1 - i1) % n1, (n2 - i2) % n2, (n3 - i3) % n3)
    }

    /// Smallest nonzero horizontal frequency magnitude.
    pub fn min_horizontal_frequency(&self) -> f64 {
        (2.0 * PI / self.len[0]).min(2.0 * PI / self.len[1])
    }

    pub fn max_horizontal_frequency(&self) -> f64 {
        let k1 = PI / self.len[0] * self.n[0] as f64;
        let k2 = PI / self.len[1] * self.n[1] as f64;
        k1.hypot(k2)
    }

    /// Smallest nonzero vertical frequency, `None` on planar grids.
    pub fn min_vertical_frequency(&self) -> Option<f64> {
        (!self.is_planar()).then(|| 2.0 * PI / self.len[2])
    }

    pub fn max_vertical_frequency(&self) -> Option<f64> {
        (!self.is_planar()).then(|| PI / self.len[2] * self.n[2] as f64)
    }

    /// Largest `|m_i|` kept by the two-thirds rule on `axis`: the largest
    /// `m` with `3 m < n`, so that quadratic products never alias back
    /// into the kept set.
    pub fn dealias_limit(&self, axis: usize) -> f64 {
        ((self.n[axis].max(1) - 1) / 3) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_axes() {
        assert!(Grid::new(8, 8, 8).is_ok());
        assert!(Grid::new(9, 8, 8).is_err());
        assert!(Grid::new(6, 8, 8).is_err());
        assert!(Grid::new(8, 8, 1).is_ok());
        assert!(Grid::new(8, 1, 8).is_err());
        assert!(Grid::with_lengths([8, 8, 8], [1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn wavenumbers_follow_fft_ordering() {
        let g = Grid::new(8, 8, 8).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.mode(0, i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.storage_index(0, -1), 7);
        assert_eq!(g.storage_index(0, 3), 3);
        let g = Grid::with_lengths([8, 8, 8], [PI, 2.0 * PI, 4.0 * PI]).unwrap();
        assert_eq!(g.wavenumber(0, 1), 2.0);
        assert_eq!(g.wavenumber(2, 1), 0.5);
    }

    #[test]
    fn negated_index_round_trips() {
        let g = Grid::new(8, 10, 12).unwrap();
        for idx in [0, 1, 17, 333, g.size() - 1] {
            assert_eq!(g.negated_index(g.negated_index(idx)), idx);
        }
        assert_eq!(g.negated_index(0), 0);
    }
}
