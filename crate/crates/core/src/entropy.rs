//! The entropy kernel `eta(x) = -x ln x` and compensated summation.

use crate::error::{KsError, Result};
use crate::tolerance::Tolerances;

/// `eta(x) = -x ln x`, extended continuously by `eta(0) = 0`.
///
/// Rejects arguments outside `[0, 1]` beyond the configured slack; values
/// inside the slack band are clamped.
pub fn eta(x: f64, tol: &Tolerances) -> Result<f64> {
    if x < -tol.domain_slack || x > 1.0 + tol.domain_slack {
        return Err(KsError::EtaDomain(x));
    }
    Ok(eta_clamped(x))
}

/// `eta` without the domain check; arguments are clamped into `[0, 1]`.
/// Internal sums use this after their own validation.
#[inline]
pub fn eta_clamped(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Kahan compensated accumulator.
///
/// Entropy sequences subtract sums over up to ~1e5 atoms from each other;
/// naive accumulation error is of the same order as the 1e-10 gates on the
/// increments, compensation keeps it near one ulp.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of an iterator of f64.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Shannon entropy `sum_i eta(w_i)` of a weight vector.
///
/// The result lies in `[0, ln n]` for `n` weights.
pub fn shannon_entropy(weights: &crate::decomposition::WeightVector) -> f64 {
    kahan_sum(weights.iter().map(eta_clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::WeightVector;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn eta_endpoints() {
        assert_eq!(eta(0.0, &TOL).unwrap(), 0.0);
        assert_eq!(eta(1.0, &TOL).unwrap(), 0.0);
    }

    #[test]
    fn eta_fixed_point_of_scaling() {
        let x = 1.0 / std::f64::consts::E;
        assert!((eta(x, &TOL).unwrap() - x).abs() < 1e-15);
    }

    #[test]
    fn eta_quarter() {
        let expected = -0.25f64 * 0.25f64.ln();
        assert!((eta(0.25, &TOL).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.346_573_590_279_972_64).abs() < 1e-12);
    }

    #[test]
    fn eta_domain_errors() {
        assert!(eta(-0.1, &TOL).is_err());
        assert!(eta(1.1, &TOL).is_err());
        // slack band clamps instead of erroring
        assert_eq!(eta(-1e-13, &TOL).unwrap(), 0.0);
        assert_eq!(eta(1.0 + 1e-13, &TOL).unwrap(), 0.0);
    }

    #[test]
    fn shannon_point_mass_is_zero() {
        let w = WeightVector::new(vec![1.0], &TOL).unwrap();
        assert_eq!(shannon_entropy(&w), 0.0);
    }

    #[test]
    fn shannon_fair_coin_is_ln2() {
        let w = WeightVector::new(vec![0.5, 0.5], &TOL).unwrap();
        assert!((shannon_entropy(&w) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn shannon_quarter_three_quarter() {
        let w = WeightVector::new(vec![0.25, 0.75], &TOL).unwrap();
        assert!((shannon_entropy(&w) - 0.562_335_144_618_808_3).abs() < 1e-12);
    }

    #[test]
    fn kahan_beats_naive_on_many_small_terms() {
        let n = 1 << 17;
        let v = 1.0 / n as f64;
        let sum = kahan_sum(std::iter::repeat(v).take(n));
        assert!((sum - 1.0).abs() < 1e-15);
    }
}
