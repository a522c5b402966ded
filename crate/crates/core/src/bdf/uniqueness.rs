use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of `0 ≤ (απ/4){1 − α((π/2)√((α/2)/(1−απ/4)) + π^{1/6}2^{11/6})‖n‖_𝒞}⁻¹ ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessCheck {
    pub passed: bool,
    /// The middle quantity; infinite when the brace is not positive.
    pub middle: f64,
    pub brace: f64,
    pub reason: Option<String>,
}

/// Evaluates the uniqueness and neutrality condition for coupling `alpha` and
/// Coulomb norm `norm = ‖n‖_𝒞`.
pub fn uniqueness_condition_check(alpha: f64, norm: f64) -> Result<UniquenessCheck> {
    let limit = 4.0 / PI;
    if !(0.0..=limit).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha = {alpha} lies outside [0, 4/π]")));
    }
    if !(norm >= 0.0 && norm.is_finite()) {
        return Err(Error::Parameter(format!("Coulomb norm must be finite and non-negative, got {norm}")));
    }
    let brace = if norm == 0.0 {
        1.0
    } else {
        let root = ((alpha / 2.0) / (1.0 - alpha * PI / 4.0)).sqrt();
        1.0 - alpha * (PI / 2.0 * root + PI.powf(1.0 / 6.0) * 2f64.powf(11.0 / 6.0)) * norm
    };
    if !(brace > 0.0) {
        return Ok(UniquenessCheck {
            passed: false,
            middle: f64::INFINITY,
            brace,
            reason: Some(format!("brace factor {brace:e} is not positive")),
        });
    }
    let middle = alpha * PI / 4.0 / brace;
    let passed = (0.0..=1.0 + 1e-15).contains(&middle);
    let reason = (!passed).then(|| format!("middle quantity {middle} exceeds 1"));
    Ok(UniquenessCheck { passed, middle, brace, reason })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_case_reduces_to_alpha_pi_over_four() {
        let c = uniqueness_condition_check(1.0, 0.0).unwrap();
        assert!(c.passed && (c.middle - PI / 4.0).abs() < 1e-15);
        let c = uniqueness_condition_check(4.0 / PI, 0.0).unwrap();
        assert!(c.passed && (c.middle - 1.0).abs() < 1e-15);
    }

    #[test]
    fn strong_density_fails() {
        let c = uniqueness_condition_check(1.0, 10.0).unwrap();
        assert!(!c.passed && c.brace < 0.0);
        assert!(uniqueness_condition_check(1.5, 0.0).is_err());
    }
}
