use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Integrating-factor fourth-order Runge-Kutta.
    #[default]
    IfRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dealiasing {
    #[default]
    TwoThirds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub nu_h: f64,
    pub nu_3: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Friedrichs radius `n`: the w system lives on `|xi| <= n`.
    pub n_cutoff: f64,
    pub integrator: Integrator,
    pub dealiasing: Dealiasing,
    pub p: f64,
    /// Store a snapshot every this many steps.
    pub record_every: usize,
    /// Update the band statistics of the norm accumulator every this many steps.
    pub accumulate_every: usize,
}

/// Largest `|xi|` represented on the grid.
pub fn max_resolvable_radius(grid: &Grid) -> f64 {
    let v = grid.max_vertical_frequency().unwrap_or(0.0);
    grid.max_horizontal_frequency().hypot(v)
}

/// Radius of the largest ball inside the dealiased cube.
pub fn dealiased_radius(grid: &Grid) -> f64 {
    let axes = if grid.is_planar() { 2 } else { 3 };
    (0..axes)
        .map(|a| 2.0 * std::f64::consts::PI / grid.lengths()[a] * grid.dealias_limit(a).floor())
        .fold(f64::INFINITY, f64::min)
}

impl SolverConfig {
    /// Defaults: `dt = 1e-3`, `T = 1`, `p = 4`, Friedrichs ball inscribed in
    /// the dealiased cube, snapshots every 100 steps, band statistics every 10 steps.
    pub fn new(grid: Grid, nu_h: f64, nu_3: f64) -> Self {
        Self {
            grid,
            nu_h,
            nu_3,
            dt: 1e-3,
            t_end: 1.0,
            n_cutoff: dealiased_radius(&grid),
            integrator: Integrator::IfRk4,
            dealiasing: Dealiasing::TwoThirds,
            p: 4.0,
            record_every: 100,
            accumulate_every: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.nu_h > 0.0 && self.nu_h.is_finite()) {
            return bad(format!("nu_h = {} must be positive", self.nu_h));
        }
        if !(self.nu_3 >= 0.0 && self.nu_3.is_finite()) {
            return bad(format!("nu_3 = {} must be nonnegative", self.nu_3));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!("T = {} must be at least dt = {}", self.t_end, self.dt));
        }
        let r = max_resolvable_radius(&self.grid);
        if !(self.n_cutoff > 0.0 && self.n_cutoff <= r) {
            return bad(format!("Friedrichs radius {} must lie in (0, {r}]", self.n_cutoff));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be finite and >= 2", self.p));
        }
        if self.record_every == 0 || self.accumulate_every == 0 {
            return bad("strides must be positive".into());
        }
        Ok(())
    }

    /// Number of steps; `dt` is adjusted by [`Self::step_size`] to land on `T`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    pub fn step_size(&self) -> f64 {
        self.t_end / self.steps() as f64
    }
}
