//! Direct 3D evaluation of `(α/2π²)∫_{B(0,Λ)} w_j(p,q) h(|q|)/|p−q|² dq`.
//!
//! Spherical coordinates are centred at `p` (`q = p + s·ŝ`), so the Jacobian
//! `s²` cancels `1/|p−q|²` and the integrand stays bounded. The azimuth about
//! `p` integrates to 2π; what remains is a product Gauss rule in the polar
//! cosine `c = ŝ·ω_p` and in `s ∈ [0, s_max(c)]`, split at the point of the ray
//! closest to the origin.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::{RadialEval, RadialGrid};
use super::kernel::exchange_transform;
use super::quadrature::gauss_legendre;
use crate::dirac::norm3;
use crate::error::{Error, Result};
use crate::free_vacuum::random_admissible_profile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResolution {
    pub radial: usize,
    pub polar: usize,
}

impl Default for OracleResolution {
    fn default() -> Self {
        Self { radial: 400, polar: 400 }
    }
}

pub fn angular_reduction_oracle(
    j: usize,
    h: &impl RadialEval,
    p: [f64; 3],
    alpha: f64,
    cutoff: f64,
) -> Result<f64> {
    angular_reduction_oracle_with(j, h, p, alpha, cutoff, OracleResolution::default())
}

pub fn angular_reduction_oracle_with(
    j: usize,
    h: &impl RadialEval,
    p: [f64; 3],
    alpha: f64,
    cutoff: f64,
    res: OracleResolution,
) -> Result<f64> {
    if j > 1 {
        return Err(Error::Domain(format!("kernel index must be 0 or 1, got {j}")));
    }
    let r = norm3(p);
    if !(r > 0.0 && r <= cutoff) {
        return Err(Error::Domain(format!("|p| = {r} outside (0, {cutoff}]")));
    }
    let (cx, cw) = gauss_legendre(res.polar);
    let half = res.radial.div_ceil(2).max(1);
    let (sx, sw) = gauss_legendre(half);
    let mut total = 0.0;
    for (&c, &wc) in cx.iter().zip(&cw) {
        let s_max = -r * c + (r * r * c * c + cutoff * cutoff - r * r).max(0.0).sqrt();
        if s_max <= 0.0 {
            continue;
        }
        let s_mid = (-r * c).clamp(0.0, s_max);
        let mut line = 0.0;
        for (a, b) in [(0.0, s_mid), (s_mid, s_max)] {
            if b <= a {
                continue;
            }
            let hh = 0.5 * (b - a);
            let cc = 0.5 * (a + b);
            for (&x, &w) in sx.iter().zip(&sw) {
                let s = cc + hh * x;
                let q2 = (r * r + s * s + 2.0 * r * s * c).max(0.0);
                let q = q2.sqrt();
                let weight = if j == 0 {
                    1.0
                } else if q > 0.0 {
                    (r + s * c) / q
                } else {
                    0.0
                };
                line += hh * w * weight * h.at(q.min(cutoff));
            }
        }
        total += wc * line;
    }
    Ok(alpha / (2.0 * PI * PI) * 2.0 * PI * total)
}

/// One comparison of [`exchange_transform`] against the direct 3D integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleCase {
    pub j: usize,
    pub r: f64,
    pub transform: f64,
    pub oracle: f64,
    /// `|transform − oracle|/(|oracle| + 1e-12)`.
    pub relative_error: f64,
}

/// `cases` seeded random comparisons at `(m0, α, Λ)`: the kernel index, the
/// radius and a smooth admissible profile component are drawn per case.
pub fn oracle_battery(
    cases: usize,
    seed: u64,
    m0: f64,
    alpha: f64,
    cutoff: f64,
    grid_points: usize,
) -> Result<Vec<OracleCase>> {
    let grid = Arc::new(RadialGrid::for_mass(cutoff, grid_points, m0)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let profile = random_admissible_profile(grid.clone(), &mut rng);
            let j = rng.random_range(0..2usize);
            let r = cutoff * rng.random_range(0.01..1.0);
            let dir = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let len = norm3(dir).max(1e-3);
            let p = dir.map(|x| x / len * r);
            let h = if j == 0 { &profile.f0 } else { &profile.f1 };
            let transform = exchange_transform(j, h, norm3(p), alpha)?;
            let oracle = angular_reduction_oracle(j, h, p, alpha, cutoff)?;
            Ok(OracleCase {
                j,
                r: norm3(p),
                transform,
                oracle,
                relative_error: (transform - oracle).abs() / (oracle.abs() + 1e-12),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_gives_zero() {
        let v = angular_reduction_oracle(0, &|_: f64| 0.0, [0.3, 0.1, 0.2], 1.0, 2.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn depends_only_on_norm() {
        let h = |v: f64| (-v * v).exp();
        let a = angular_reduction_oracle(0, &h, [0.6, 0.0, 0.8], 1.0, 2.0).unwrap();
        let b = angular_reduction_oracle(0, &h, [0.0, 1.0, 0.0], 1.0, 2.0).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
