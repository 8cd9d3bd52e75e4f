//! Standard normal distribution function.

use core::f64::consts::SQRT_2;

/// Standard normal CDF, computed through `erfc` so that both tails keep full
/// relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        // Φ(1) and Φ(-1.96) from standard tables (15 digits).
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_4).abs() < 1e-12);
        assert!((normal_sf(1.0) + normal_cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn far_tail_keeps_precision() {
        // 1 - Φ(8) ≈ 6.22e-16; the naive 1 - cdf would round to 0 or 1.1e-16.
        let tail = normal_sf(8.0);
        assert!((tail / 6.220_960_574_271_78e-16 - 1.0).abs() < 1e-9);
    }
}
