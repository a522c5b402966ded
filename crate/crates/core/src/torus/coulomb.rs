//! Periodic Coulomb potential `W_L(x) = L⁻³(Σ_{k≠0} 4π/|k|² e^{ik·x} + μL²)`,
//! normalized so that its minimum over the cell is 0.
//!
//! `W_L(x) = W_1(x/L)/L`, so everything reduces to the unit cell, where the
//! zero-mean part is summed by Ewald's method.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Ewald splitting parameter for the unit cell.
const EWALD_ETA: f64 = 1.772_453_850_905_516; // √π

/// `Σ_{k≠0} (4π/|k|²) e^{ik·x}` on the unit cell (`k ∈ 2πℤ³`), by Ewald summation
/// with `real_shells` real-space and `recip_shells` reciprocal-space shells.
pub fn zero_mean_potential_with(x: [f64; 3], real_shells: i32, recip_shells: i32) -> f64 {
    let eta = EWALD_ETA;
    let x = x.map(|c| c - c.round());
    let mut real = 0.0;
    for a in -real_shells..=real_shells {
        for b in -real_shells..=real_shells {
            for c in -real_shells..=real_shells {
                let d = [x[0] + f64::from(a), x[1] + f64::from(b), x[2] + f64::from(c)];
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if r > 0.0 {
                    real += libm::erfc(eta * r) / r;
                }
            }
        }
    }
    let mut recip = 0.0;
    for a in -recip_shells..=recip_shells {
        for b in -recip_shells..=recip_shells {
            for c in -recip_shells..=recip_shells {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let k = [2.0 * PI * f64::from(a), 2.0 * PI * f64::from(b), 2.0 * PI * f64::from(c)];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
                recip += 4.0 * PI / k2 * (-k2 / (4.0 * eta * eta)).exp() * phase.cos();
            }
        }
    }
    real + recip - PI / (eta * eta)
}

/// Zero-mean unit-cell potential with convergence checked against a wider sum.
pub fn zero_mean_potential(x: [f64; 3]) -> Result<f64> {
    let a = zero_mean_potential_with(x, 3, 6);
    let b = zero_mean_potential_with(x, 4, 8);
    if (a - b).abs() > 1e-12 * b.abs().max(1.0) {
        return Err(Error::NonConvergence {
            what: "Ewald summation",
            iterations: 2,
            residuals: vec![a, b],
        });
    }
    Ok(b)
}

/// `μ = −min` of the zero-mean unit-cell potential.
///
/// The minimum is located by a grid scan over the octant `[0, ½]³` (the
/// potential is even in each coordinate) followed by compass-search refinement.
pub fn unit_mu() -> f64 {
    static MU: OnceLock<f64> = OnceLock::new();
    *MU.get_or_init(|| {
        let f = |x: [f64; 3]| zero_mean_potential_with(x, 4, 8);
        let steps = 10;
        let mut best = ([0.5; 3], f64::INFINITY);
        for i in 1..=steps {
            for j in 1..=steps {
                for k in 1..=steps {
                    let x = [i, j, k].map(|v| 0.5 * f64::from(v) / f64::from(steps));
                    let v = f(x);
                    if v < best.1 {
                        best = (x, v);
                    }
                }
            }
        }
        let mut h = 0.5 / f64::from(steps);
        while h > 1e-10 {
            let mut improved = false;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut x = best.0;
                    x[axis] = (x[axis] + sign * h).clamp(0.0, 0.5);
                    let v = f(x);
                    if v < best.1 {
                        best = (x, v);
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        -best.1
    })
}

/// Fourier coefficients and values of `W_L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicCoulomb {
    side: f64,
    mu: f64,
}

impl PeriodicCoulomb {
    /// `W_L` with the computed `μ`.
    pub fn new(side: f64) -> Result<Self> {
        Self::with_mu(side, unit_mu())
    }

    /// `W_L` with a prescribed `μ ≥ 0`.
    pub fn with_mu(side: f64, mu: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Parameter(format!("box side must be positive, got {side}")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Parameter(format!("mu must be non-negative, got {mu}")));
        }
        Ok(Self { side, mu })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `Ŵ(k)` for `k = (2π/L)n`: `4π/|k|² = L²/(π|n|²)`, and `μL²` at `n = 0`.
    pub fn coefficient(&self, n: [i32; 3]) -> f64 {
        self.coefficient_sq(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
    }

    /// `Ŵ` as a function of `|n|²`.
    pub fn coefficient_sq(&self, n2: i32) -> f64 {
        let l2 = self.side * self.side;
        if n2 == 0 {
            self.mu * l2
        } else {
            l2 / (PI * f64::from(n2))
        }
    }

    /// `W_L(x) = (W₁^0(x/L) + μ)/L`, `W₁^0` the zero-mean unit-cell potential.
    pub fn potential(&self, x: [f64; 3]) -> Result<f64> {
        let u = x.map(|c| c / self.side);
        Ok((zero_mean_potential(u)? + self.mu) / self.side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_is_positive_and_minimum_is_at_corner() {
        let mu = unit_mu();
        assert!(mu > 0.0);
        let corner = zero_mean_potential([0.5, 0.5, 0.5]).unwrap();
        assert!((corner + mu).abs() < 1e-10);
    }

    #[test]
    fn singular_part_is_coulomb_with_madelung_constant() {
        // φ(x) − 1/|x| → −2.837297479… for the simple cubic lattice with a
        // neutralizing background.
        let x = [1e-4, 0.0, 0.0];
        let v = zero_mean_potential(x).unwrap() - 1.0 / 1e-4;
        assert!((v + 2.837_297_479).abs() < 1e-6, "{v}");
    }

    #[test]
    fn first_shell_coefficient() {
        let l = 3.7;
        let w = PeriodicCoulomb::new(l).unwrap();
        assert!((w.coefficient([1, 0, 0]) - l * l / PI).abs() < 1e-12);
        assert!((w.coefficient([0, 0, 0]) - w.mu() * l * l).abs() < 1e-12);
    }
}
