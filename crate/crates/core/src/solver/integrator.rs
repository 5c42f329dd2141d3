use num_complex::Complex64;

use crate::error::{Error, Result};

/// Integrating-factor RK4 for `u' = -lambda u + N(t, u)` with a diagonal
/// linear part. The state may hold several blocks sharing one rate array.
#[derive(Clone, Debug)]
pub struct IfRk4 {
    dt: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
}

impl IfRk4 {
    pub fn new(rates: &[f64], dt: f64) -> Self {
        Self {
            dt,
            e_half: rates.iter().map(|r| (-r * dt / 2.0).exp()).collect(),
            e_full: rates.iter().map(|r| (-r * dt).exp()).collect(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step from `(t, u)`.
    pub fn step<F>(&self, t: f64, u: &[Complex64], mut rhs: F) -> Result<Vec<Complex64>>
    where
        F: FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>>,
    {
        let h = self.dt;
        let k1 = rhs(t, u)?;
        let s2 = combine(u, &k1, &self.e_half, |x, y, p| (x + y * (h / 2.0)) * p);
        let k2 = rhs(t + h / 2.0, &s2)?;
        let s3 = combine(u, &k2, &self.e_half, |x, y, p| x * p + y * (h / 2.0));
        let k3 = rhs(t + h / 2.0, &s3)?;
        let mut s4 = combine(u, &k3, &self.e_full, |x, _, q| x * q);
        for ((s, k), p) in s4.iter_mut().zip(&k3).zip(self.e_half.iter().cycle()) {
            *s += k * (h * p);
        }
        let k4 = rhs(t + h, &s4)?;
        let mut out = combine(u, &k1, &self.e_full, |x, y, q| (x + y * (h / 6.0)) * q);
        let mid = combine(&k2, &k3, &self.e_half, |x, y, p| (x + y) * (h / 3.0 * p));
        for ((o, m), k) in out.iter_mut().zip(&mid).zip(&k4) {
            *o += m + k * (h / 6.0);
        }
        if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::BlowUp { time: t + h, reason: "non-finite amplitude".into() });
        }
        Ok(out)
    }
}

/// `f(a_i, b_i, e_i)` with the multiplier array repeated across blocks.
fn combine(a: &[Complex64], b: &[Complex64], e: &[f64], f: impl Fn(Complex64, Complex64, f64) -> Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len());
    for ((ca, cb), ce) in a.chunks(e.len()).zip(b.chunks(e.len())).zip(std::iter::repeat(e)) {
        out.extend(ca.iter().zip(cb).zip(ce).map(|((&x, &y), &p)| f(x, y, p)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(dt: f64, steps: usize, lambda: f64, omega: f64) -> Complex64 {
        let integ = IfRk4::new(&[lambda], dt);
        let mut u = vec![Complex64::new(1.0, 0.0)];
        let mut t = 0.0;
        for _ in 0..steps {
            u = integ.step(t, &u, |_, v| Ok(vec![v[0] * Complex64::new(0.0, omega)])).unwrap();
            t += dt;
        }
        u[0]
    }

    #[test]
    fn pure_decay_is_exact() {
        let integ = IfRk4::new(&[2.0, 0.5], 0.1);
        let u = vec![Complex64::new(1.0, 1.0); 4];
        let out = integ.step(0.0, &u, |_, v| Ok(vec![Complex64::default(); v.len()])).unwrap();
        assert!((out[0] - u[0] * (-0.2f64).exp()).norm() < 1e-15);
        assert!((out[1] - u[1] * (-0.05f64).exp()).norm() < 1e-15);
        assert!((out[2] - u[2] * (-0.2f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn fourth_order_convergence() {
        let (lambda, omega, t) = (0.7, 3.0, 1.0);
        let exact = Complex64::new(0.0, omega * t).exp() * (-lambda * t as f64).exp();
        let e1 = (run(t / 20.0, 20, lambda, omega) - exact).norm();
        let e2 = (run(t / 40.0, 40, lambda, omega) - exact).norm();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_forcing_is_fourth_order() {
        // u' = -u + cos t, u(0) = 0.
        let exact = |t: f64| 0.5 * (t.cos() + t.sin() - (-t).exp());
        let err = |n: usize| {
            let dt = 2.0 / n as f64;
            let integ = IfRk4::new(&[1.0], dt);
            let mut u = vec![Complex64::default()];
            for s in 0..n {
                u = integ.step(s as f64 * dt, &u, |t, _| Ok(vec![Complex64::new(t.cos(), 0.0)])).unwrap();
            }
            (u[0].re - exact(2.0)).abs()
        };
        let ratio = err(16) / err(32);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }
}
