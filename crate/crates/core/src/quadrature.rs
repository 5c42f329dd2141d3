//! Time quadrature on snapshot grids.

use crate::error::{Error, Result};

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times[0] < 0.0 {
        return Err(Error::NegativeTime(times[0]));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Composite trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// `(int |v|^q dt)^{1/q}` by the trapezoid rule on `|v|^q`, `max |v|` for
/// `q = inf`. `tail` is added to the integral of `|v|^q` before the root.
pub fn lq_time(times: &[f64], values: &[f64], q: f64, tail: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    (trapezoid(times, &powered) + tail).powf(1.0 / q)
}

/// `int_{T}^{inf} (v e^{-lambda (t - T)})^q dt = v^q / (q lambda)`.
pub fn exponential_tail(v_end: f64, q: f64, lambda: f64) -> f64 {
    if q.is_infinite() || v_end == 0.0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return f64::INFINITY;
    }
    v_end.abs().powf(q) / (q * lambda)
}

/// Composite Simpson rule on uniformly spaced samples; an odd number of
/// intervals closes with the three-eighths rule.
pub fn simpson_uniform(h: f64, values: &[f64]) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        3 => 3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ => {
            let even = if n % 2 == 0 { n } else { n - 3 };
            let mut s = values[0] + values[even];
            for (i, v) in values.iter().enumerate().take(even).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = h / 3.0 * s;
            if even < n {
                total += simpson_uniform(h, &values[even..]);
            }
            total
        }
    }
}

/// `0, t_first, t_first r, t_first r^2, ...` up to and including `t_end`.
pub fn geometric_times(t_first: f64, ratio: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(t_first > 0.0 && ratio > 1.0 && t_end >= t_first) {
        return Err(Error::InvalidParameter(format!(
            "geometric grid needs 0 < t_first <= t_end and ratio > 1 (got {t_first}, {ratio}, {t_end})"
        )));
    }
    let mut out = vec![0.0];
    let mut t = t_first;
    while t < t_end * (1.0 - 1e-12) {
        out.push(t);
        t *= ratio;
    }
    out.push(t_end);
    Ok(out)
}
