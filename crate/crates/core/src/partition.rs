//! The dyadic partition of unity `phi(tau) = chi(tau) - chi(2 tau)`.

/// Smooth step `chi`: 1 on `[0, 3/2]`, 0 on `[8/3, inf)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionFunction {
    ratio: f64,
}

pub const CHI_FLAT: f64 = 1.5;
pub const CHI_EDGE: f64 = 8.0 / 3.0;

fn h(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Cumulative low-pass profile.
pub fn chi(tau: f64) -> f64 {
    let t = tau.abs();
    if t <= CHI_FLAT {
        1.0
    } else if t >= CHI_EDGE {
        0.0
    } else {
        let a = h(CHI_EDGE - t);
        a / (a + h(t - CHI_FLAT))
    }
}

impl Default for PartitionFunction {
    fn default() -> Self {
        Self { ratio: 2.0 }
    }
}

impl PartitionFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// `chi(tau) - chi(ratio * tau)`. Only `ratio = 2` telescopes to a
    /// partition of unity over dyadic dilations; other ratios exist to
    /// exercise the checks that detect a broken partition.
    pub fn with_ratio(ratio: f64) -> Self {
        Self { ratio }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn eval(&self, tau: f64) -> f64 {
        chi(tau) - chi(self.ratio * tau)
    }

    /// Open support interval `(lower, upper)`.
    pub fn support(&self) -> (f64, f64) {
        (CHI_FLAT / self.ratio, CHI_EDGE)
    }

    /// `sum_{j = lo..=hi} phi(2^{-j} tau)`.
    pub fn dyadic_sum(&self, tau: f64, lo: i32, hi: i32) -> f64 {
        (lo..=hi).map(|j| self.eval(tau * (-j as f64).exp2())).sum()
    }
}

pub fn make_partition() -> PartitionFunction {
    PartitionFunction::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishes_outside_support() {
        let phi = make_partition();
        assert_eq!(phi.eval(0.5), 0.0);
        assert_eq!(phi.eval(3.0), 0.0);
        assert_eq!(phi.eval(0.75), 0.0);
        assert_eq!(phi.eval(8.0 / 3.0), 0.0);
        assert!(phi.eval(1.0) > 0.0);
    }

    #[test]
    fn dyadic_sum_at_sample_point() {
        let phi = make_partition();
        let direct: f64 = (-8..=8).map(|j| phi.eval(5.37 / 2f64.powi(j))).sum();
        assert!((direct - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tampered_ratio_breaks_partition() {
        let phi = PartitionFunction::with_ratio(2.5);
        let worst = (0..200)
            .map(|i| 1.0 + i as f64 * 0.01)
            .map(|t| (phi.dyadic_sum(t, -10, 10) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    proptest! {
        #[test]
        fn partition_of_unity(tau in 0.02f64..40.0) {
            let phi = make_partition();
            prop_assert!((phi.dyadic_sum(tau, -12, 12) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn bounded_between_zero_and_one(tau in 0.0f64..10.0) {
            let v = make_partition().eval(tau);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn chi_is_monotone(a in 0.0f64..4.0, b in 0.0f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(chi(lo) >= chi(hi));
        }
    }
}
