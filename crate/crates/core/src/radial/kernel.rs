//! Legendre functions of the second kind and the angular-reduced exchange
//! operators
//!
//! `X_j[h](r) = (α/π) ∫₀^Λ (v/r) Q_j(½(r/v + v/r)) h(v) dv`.
//!
//! The integrand has a logarithmic singularity at `v = r`. The integral is
//! split there and each side is covered by dyadic panels in `v/r` (the kernel
//! depends on `v/r` only); the two panels touching `v = r` use the cubic
//! substitution `v = r ∓ c·s³`, which turns `ln|v − r|` into `s² ln s`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{RadialFunction, RadialGrid};
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};

/// `Q₀(z) = ½ ln((z+1)/(z−1))` for `z > 1`.
pub fn legendre_q0(z: f64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::Domain(format!("Q0 needs z > 1, got {z}")));
    }
    Ok((1.0 / z).atanh())
}

/// `Q₁(z) = z·Q₀(z) − 1` for `z > 1`.
pub fn legendre_q1(z: f64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::Domain(format!("Q1 needs z > 1, got {z}")));
    }
    if z >= 4.0 {
        // z·atanh(1/z) − 1 = Σ_{k≥1} z^{−2k}/(2k+1)
        let w2 = 1.0 / (z * z);
        let mut term = w2;
        let mut sum = 0.0f64;
        let mut k = 1.0;
        while term > 1e-18 * sum.max(f64::MIN_POSITIVE) {
            sum += term / (2.0 * k + 1.0);
            term *= w2;
            k += 1.0;
        }
        return Ok(sum);
    }
    Ok(z * (1.0 / z).atanh() - 1.0)
}

/// `((v/r)Q₀(z), (v/r)Q₁(z))` with `z = ½(r/v + v/r)`, evaluated through
/// `t = min(r,v)/max(r,v)` so that neither `z − 1` nor `zQ₀ − 1` cancels.
pub fn kernel_pair(r: f64, v: f64) -> (f64, f64) {
    let (lo, hi) = if v < r { (v, r) } else { (r, v) };
    let t = lo / hi;
    let q0 = 2.0 * t.atanh();
    let q1 = if t < 0.25 {
        // zQ₀ − 1 = Σ_{k≥1} t^{2k}·4k/(4k²−1)
        let t2 = t * t;
        let mut pow = t2;
        let mut sum = 0.0f64;
        let mut k = 1.0;
        while pow > 1e-18 {
            sum += pow * 4.0 * k / (4.0 * k * k - 1.0);
            pow *= t2;
            k += 1.0;
        }
        sum
    } else {
        let z = (1.0 + t * t) / (2.0 * t);
        z * q0 - 1.0
    };
    let ratio = v / r;
    (ratio * q0, ratio * q1)
}

/// Panel layout for the singular v-integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeQuadrature {
    /// Gauss points on each of the two panels touching `v = r`.
    pub singular_points: usize,
    /// Gauss points on every other dyadic panel.
    pub regular_points: usize,
    /// Number of dyadic panels on `[r·2^−levels, r]` before the last panel down to 0.
    pub inner_levels: usize,
}

impl Default for ExchangeQuadrature {
    fn default() -> Self {
        Self { singular_points: 64, regular_points: 24, inner_levels: 12 }
    }
}

impl ExchangeQuadrature {
    /// Quadrature points `(v, weight)` on (0, Λ] for the target radius `r`.
    pub fn points(&self, r: f64, cutoff: f64) -> Vec<(f64, f64)> {
        let (sx, sw) = gauss_legendre(self.singular_points);
        let (gx, gw) = gauss_legendre(self.regular_points);
        let mut out = Vec::new();
        // s ∈ [0,1] nodes for the singular substitution.
        let sing = |a: f64, b: f64, at_b: bool, out: &mut Vec<(f64, f64)>| {
            let len = b - a;
            for (x, w) in sx.iter().zip(&sw) {
                let s = 0.5 * (1.0 + x);
                let ws = 0.5 * w;
                let v = if at_b { b - len * s * s * s } else { a + len * s * s * s };
                out.push((v, 3.0 * len * s * s * ws));
            }
        };
        let reg = |a: f64, b: f64, out: &mut Vec<(f64, f64)>| {
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for (x, w) in gx.iter().zip(&gw) {
                out.push((c + h * x, h * w));
            }
        };
        let mut b = r;
        for level in 0..self.inner_levels {
            let a = 0.5 * b;
            if level == 0 {
                sing(a, b, true, &mut out);
            } else {
                reg(a, b, &mut out);
            }
            b = a;
        }
        reg(0.0, b, &mut out);
        let mut a = r;
        let mut first = true;
        while a < cutoff {
            let b = (2.0 * a).min(cutoff);
            if first {
                sing(a, b, false, &mut out);
                first = false;
            } else {
                reg(a, b, &mut out);
            }
            a = b;
        }
        out
    }
}

fn check_radius(r: f64, cutoff: f64) -> Result<()> {
    if !(r > 0.0 && r <= cutoff) {
        return Err(Error::Domain(format!("radius {r} outside (0, {cutoff}]")));
    }
    Ok(())
}

/// `(α/π)∫₀^Λ (v/r) Q_j(z) h(v) dv`, with `h` interpolated from its nodes.
pub fn exchange_transform(j: usize, h: &RadialFunction, r: f64, alpha: f64) -> Result<f64> {
    exchange_transform_with(j, h, r, alpha, &ExchangeQuadrature::default())
}

pub fn exchange_transform_with(
    j: usize,
    h: &RadialFunction,
    r: f64,
    alpha: f64,
    quad: &ExchangeQuadrature,
) -> Result<f64> {
    if j > 1 {
        return Err(Error::Domain(format!("kernel index must be 0 or 1, got {j}")));
    }
    let cutoff = h.grid().cutoff();
    check_radius(r, cutoff)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = quad
        .points(r, cutoff)
        .iter()
        .map(|&(v, w)| {
            let k = kernel_pair(r, v);
            w * if j == 0 { k.0 } else { k.1 } * h.eval(v)
        })
        .sum();
    Ok(alpha / PI * sum)
}

/// The exchange transforms restricted to the grid nodes, as matrices acting on
/// nodal values: `X_j[h](r_i) = α·Σ_m K_j[i,m] h_m`.
#[derive(Clone, Debug)]
pub struct ExchangeOperator {
    grid: Arc<RadialGrid>,
    k0: DMatrix<f64>,
    k1: DMatrix<f64>,
}

impl ExchangeOperator {
    pub fn new(grid: Arc<RadialGrid>, quad: &ExchangeQuadrature) -> Self {
        let n = grid.len();
        let cutoff = grid.cutoff();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = grid
            .nodes()
            .par_iter()
            .map(|&r| {
                let mut row0 = vec![0.0; n];
                let mut row1 = vec![0.0; n];
                let mut basis = vec![0.0; n];
                for (v, w) in quad.points(r, cutoff) {
                    let (a0, a1) = kernel_pair(r, v);
                    grid.basis_into(v, &mut basis);
                    let (c0, c1) = (w * a0 / PI, w * a1 / PI);
                    for m in 0..n {
                        row0[m] += c0 * basis[m];
                        row1[m] += c1 * basis[m];
                    }
                }
                (row0, row1)
            })
            .collect();
        let k0 = DMatrix::from_fn(n, n, |i, m| rows[i].0[m]);
        let k1 = DMatrix::from_fn(n, n, |i, m| rows[i].1[m]);
        Self { grid, k0, k1 }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn matrix(&self, j: usize) -> &DMatrix<f64> {
        if j == 0 {
            &self.k0
        } else {
            &self.k1
        }
    }

    /// Nodal values of `X_j[h]` for coupling `alpha`.
    pub fn apply(&self, j: usize, h: &[f64], alpha: f64) -> Vec<f64> {
        let k = self.matrix(j);
        let n = h.len();
        (0..n)
            .map(|i| alpha * (0..n).map(|m| k[(i, m)] * h[m]).sum::<f64>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q0_q1_closed_form_values() {
        assert!((legendre_q0(2.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((legendre_q1(2.0).unwrap() - (3f64.ln() - 1.0)).abs() < 1e-15);
        let z = 1e3;
        assert!((legendre_q0(z).unwrap() * z - 1.0).abs() < 1e-6);
        let q = legendre_q0(1.0 + 1e-12).unwrap();
        assert!(q.is_finite() && q > 10.0);
        let q = legendre_q1(1.0 + 1e-12).unwrap();
        assert!(q.is_finite() && q > 0.0);
        assert!(legendre_q0(1.0).is_err() && legendre_q1(0.5).is_err());
    }

    #[test]
    fn q1_decays_like_inverse_square() {
        let z = 100.0;
        let ratio = legendre_q1(z).unwrap() * 3.0 * z * z;
        assert!((ratio - 1.0).abs() < 0.02);
    }

    #[test]
    fn q1_series_matches_direct_formula_at_switch() {
        for z in [3.9, 4.0, 4.1, 10.0] {
            let direct = z * (1.0f64 / z).atanh() - 1.0;
            assert!((legendre_q1(z).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_pair_matches_legendre_functions() {
        for (r, v) in [(1.0, 0.3), (0.2, 5.0), (2.0, 2.2), (1.0, 0.1), (3.0, 0.01)] {
            let z = 0.5 * (r / v + v / r);
            let (k0, k1) = kernel_pair(r, v);
            assert!((k0 - v / r * legendre_q0(z).unwrap()).abs() < 1e-12 * k0.abs().max(1.0));
            assert!((k1 - v / r * legendre_q1(z).unwrap()).abs() < 1e-12 * k1.abs().max(1e-6));
        }
    }

    #[test]
    fn quadrature_points_cover_the_interval() {
        let q = ExchangeQuadrature::default();
        for r in [1e-4, 0.5, 3.0, 10.0] {
            let total: f64 = q.points(r, 10.0).iter().map(|p| p.1).sum();
            assert!((total - 10.0).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn singular_integral_of_constant_is_accurate() {
        // ∫₀^Λ (v/r) Q₀ dv has the closed form below (integrate ln|(r+v)/(r−v)| v dv).
        let (r, cut) = (1.0f64, 2.0f64);
        let prim = |v: f64| -> f64 {
            let a = 0.5 * (v * v - r * r) * ((r + v) / (r - v).abs()).ln();
            a + r * v
        };
        let exact = (prim(cut) - prim(0.0)) / r;
        let got: f64 = ExchangeQuadrature::default()
            .points(r, cut)
            .iter()
            .map(|&(v, w)| w * kernel_pair(r, v).0)
            .sum();
        assert!((got - exact).abs() < 1e-10 * exact, "{got} vs {exact}");
    }

    #[test]
    fn rejects_bad_radius() {
        let g = Arc::new(RadialGrid::for_mass(2.0, 20, 1.0).unwrap());
        let h = RadialFunction::sample(g, |_| 1.0);
        assert!(exchange_transform(0, &h, 0.0, 1.0).is_err());
        assert!(exchange_transform(0, &h, 2.5, 1.0).is_err());
        assert_eq!(exchange_transform(1, &h, 1.0, 0.0).unwrap(), 0.0);
    }
}
