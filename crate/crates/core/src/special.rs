//! Gaussian tail function.

use libm::erfc;
use std::f64::consts::SQRT_2;

/// Gaussian Q-function, `Pr[Z > z]` for standard normal `Z`.
#[inline]
pub fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(q_function(0.0), 0.5);
        // Q(1) and Q(3) from standard tables
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        assert!((q_function(3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-17);
        assert!((q_function(-1.0) - 0.841_344_746_068_543).abs() < 1e-15);
    }

    #[test]
    fn far_tail_keeps_relative_accuracy() {
        // Q(10) = 7.619853024160527e-24
        let rel = (q_function(10.0) - 7.619_853_024_160_526e-24).abs() / 7.6e-24;
        assert!(rel < 1e-12, "{rel}");
    }
}
