//! Scalar math on top of `libm`, plus log-space helpers.

use alloc::vec::Vec;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Natural log of the gamma function for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln(sum(exp(xs)))`, stable for large magnitudes. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| exp(x - max)).sum();
    max + ln(sum)
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }
}

impl LogSumExp {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += exp(x - self.max);
        } else {
            self.scaled = self.scaled * exp(self.max - x) + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + ln(self.scaled)
        }
    }
}

/// Cached `ln Γ(a + m) − ln Γ(a)` for `m = 0..=max_count`.
#[derive(Debug, Clone)]
pub struct LnGammaRatio {
    a: f64,
    table: Vec<f64>,
}

impl LnGammaRatio {
    pub fn new(a: f64, max_count: usize) -> Self {
        let base = ln_gamma(a);
        let table = (0..=max_count)
            .map(|m| if m == 0 { 0.0 } else { ln_gamma(a + m as f64) - base })
            .collect();
        Self { a, table }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        self.table[m]
    }
}

/// `x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-15);
        assert!((ln_gamma(2.0)).abs() < 1e-15);
        // Γ(5) = 24
        assert!((ln_gamma(5.0) - ln(24.0)).abs() < 1e-13);
        // Γ(1/2) = √π
        assert!((ln_gamma(0.5) - 0.5 * ln(core::f64::consts::PI)).abs() < 1e-14);
        // Γ(0.1) = 9.513507698668731836...
        assert!((ln_gamma(0.1) - ln(9.513_507_698_668_732)).abs() < 1e-13);
    }

    #[test]
    fn log_sum_exp_matches_streaming() {
        let xs = [-1000.0, -1001.5, -999.25, f64::NEG_INFINITY];
        let mut acc = LogSumExp::default();
        for &x in &xs {
            acc.push(x);
        }
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(LogSumExp::default().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn ratio_table_agrees_with_direct() {
        let t = LnGammaRatio::new(0.25, 50);
        for m in [0usize, 1, 7, 50] {
            let direct = ln_gamma(0.25 + m as f64) - ln_gamma(0.25);
            assert!((t.get(m) - direct).abs() < 1e-12);
        }
    }
}
