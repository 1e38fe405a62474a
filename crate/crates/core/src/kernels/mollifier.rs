use serde::{Deserialize, Serialize};

use crate::error::{DddError, Result};

/// Normalization `N_φ` of the Gaussian line profile
/// `η^ε(t) = (N_φ/ε) exp(-t²/(4ε²))`.
///
/// Fixed by least-squares matching of the spherical-quadrature kernel to the
/// real-space convolution kernel (isotropic λ = μ = 1, ε = 1, five probe
/// points); regenerate with `cargo run --release -p ddd-core --example calibrate_normalization`.
/// The fitted value equals `√π / (2π)³` to 15 digits.
pub const GAUSSIAN_NORMALIZATION: f64 = 7.145_544_550_467_036e-3;

/// Radially symmetric mollifier kind. Only the Gaussian
/// `φ¹(x) = (2π)^{-3/2} exp(-|x|²/2)` is provided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MollifierKind {
    #[default]
    Gaussian,
}

/// Regularization profile: the one-dimensional function `η^ε` that enters
/// both kernel representations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierProfile {
    pub epsilon: f64,
    pub kind: MollifierKind,
    pub normalization: f64,
}

impl MollifierProfile {
    pub fn gaussian(epsilon: f64) -> Result<Self> {
        Self::with_normalization(epsilon, GAUSSIAN_NORMALIZATION)
    }

    pub fn with_normalization(epsilon: f64, normalization: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(DddError::invalid(
                "epsilon",
                format!("must be positive and finite, got {epsilon}"),
            ));
        }
        if !(normalization > 0.0) {
            return Err(DddError::invalid(
                "normalization",
                format!("must be positive, got {normalization}"),
            ));
        }
        Ok(MollifierProfile {
            epsilon,
            kind: MollifierKind::Gaussian,
            normalization,
        })
    }

    /// Coefficient `c` in `exp(-c t²)`.
    #[inline(always)]
    pub fn exponent(&self) -> f64 {
        0.25 / (self.epsilon * self.epsilon)
    }

    /// `η^ε(0)`.
    #[inline(always)]
    pub fn peak(&self) -> f64 {
        self.normalization / self.epsilon
    }

    /// `η^ε` and its first two derivatives in closed form.
    pub fn eta(&self, t: f64, derivative_order: u8) -> f64 {
        let c = self.exponent();
        let g = self.peak() * (-c * t * t).exp();
        match derivative_order {
            0 => g,
            1 => -2.0 * c * t * g,
            2 => (4.0 * c * c * t * t - 2.0 * c) * g,
            _ => panic!("eta derivatives above order 2 are not provided"),
        }
    }

    /// `η^ε` derivatives of order 0..=3, used by the directional scans.
    pub fn eta_upto3(&self, t: f64) -> [f64; 4] {
        let c = self.exponent();
        let g = self.peak() * (-c * t * t).exp();
        let ct = c * t;
        [
            g,
            -2.0 * ct * g,
            (4.0 * ct * ct - 2.0 * c) * g,
            (12.0 * c * ct - 8.0 * ct * ct * ct) * g,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_shape() {
        let p = MollifierProfile::gaussian(0.3).unwrap();
        assert_eq!(p.eta(0.0, 0), GAUSSIAN_NORMALIZATION / 0.3);
        for t in [-1.0, 0.1, 0.7, 2.5] {
            let ratio = p.eta(t, 0) / p.eta(0.0, 0);
            let expected = (-t * t / (4.0 * 0.09f64)).exp();
            assert!((ratio - expected).abs() < 1e-14);
        }
        assert_eq!(p.eta(0.0, 1), 0.0);
    }

    #[test]
    fn scaling_relation() {
        let one = MollifierProfile::gaussian(1.0).unwrap();
        for eps in [0.2, 1.7] {
            let p = MollifierProfile::gaussian(eps).unwrap();
            for t in [0.0, 0.4, -1.3] {
                let lhs = p.eta(t, 0);
                let rhs = one.eta(t / eps, 0) / eps;
                assert!((lhs - rhs).abs() < 1e-14 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = MollifierProfile::gaussian(0.8).unwrap();
        let h = 1e-5;
        for t in [-1.2, 0.3, 2.0] {
            let fd1 = (p.eta(t + h, 0) - p.eta(t - h, 0)) / (2.0 * h);
            let fd2 = (p.eta(t + h, 1) - p.eta(t - h, 1)) / (2.0 * h);
            let fd3 = (p.eta(t + h, 2) - p.eta(t - h, 2)) / (2.0 * h);
            assert!((fd1 - p.eta(t, 1)).abs() < 1e-8);
            assert!((fd2 - p.eta(t, 2)).abs() < 1e-8);
            assert!((fd3 - p.eta_upto3(t)[3]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        assert!(MollifierProfile::gaussian(0.0).is_err());
        assert!(MollifierProfile::gaussian(-1.0).is_err());
    }
}
