use std::collections::BTreeMap;

use super::coulomb::PeriodicCoulomb;
use super::lattice::{diff, norm_sq, Lattice};
use crate::error::{Error, Result};

/// Cap on `|Γ|` for [`kato_constant`].
pub const KATO_CAP: usize = 100_000;

/// `C_Λ^L(m)`: the largest eigenvalue of `|D⁰|^{−1/2} W_L |D⁰|^{−1/2}` on the lattice space.
///
/// `W_L` acts in Fourier space as `L⁻³Ŵ(k−l)` and `|D⁰(k)| = √(|k|² + m²)` is
/// scalar on ℂ⁴, so the problem reduces to the real symmetric `|Γ|×|Γ|` matrix
/// `A(k,l) = Ŵ(k−l)/(L³(|k|²+m²)^{1/4}(|l|²+m²)^{1/4})`. Its entries are positive
/// and it commutes with the 48 signed permutations of coordinates, so the
/// Perron vector is constant on their orbits. Power iteration runs on the
/// orbit-reduced matrix `B(K,L) = Σ_{l∈L} A(k_K, l)`.
pub fn kato_constant(lattice: &Lattice, m: f64) -> Result<f64> {
    kato_constant_with(lattice, m, &PeriodicCoulomb::new(lattice.side())?)
}

pub fn kato_constant_with(lattice: &Lattice, m: f64, coulomb: &PeriodicCoulomb) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("mass must be positive, got {m}")));
    }
    let n = lattice.len();
    if n > KATO_CAP {
        return Err(Error::LatticeTooLarge { size: n, cap: KATO_CAP });
    }
    let points = lattice.points();
    let mut orbits: BTreeMap<[i32; 3], Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let mut key = p.map(i32::abs);
        key.sort_unstable();
        orbits.entry(key).or_default().push(i);
    }
    let orbits: Vec<Vec<usize>> = orbits.into_values().collect();
    let scale: Vec<f64> =
        (0..n).map(|k| (lattice.momentum_norm(k).powi(2) + m * m).powf(-0.25)).collect();
    let nmax = lattice.nmax();
    let table: Vec<f64> = (0..=12 * nmax * nmax).map(|q| coulomb.coefficient_sq(q)).collect();
    let iv = lattice.side().powi(-3);
    let size = orbits.len();
    let mut reduced = vec![0.0; size * size];
    for (row, orbit) in orbits.iter().enumerate() {
        let k = orbit[0];
        for (col, members) in orbits.iter().enumerate() {
            let s: f64 = members
                .iter()
                .map(|&l| table[norm_sq(diff(points[k], points[l])) as usize] * scale[l])
                .sum();
            reduced[row * size + col] = iv * scale[k] * s;
        }
    }
    let mut x = vec![1.0; size];
    let mut history = Vec::new();
    for _ in 0..100_000 {
        let y: Vec<f64> = reduced.chunks(size).map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let ratio = y.iter().zip(&x).map(|(a, b)| a / b);
        let (lo, hi) = ratio.fold((f64::INFINITY, 0.0f64), |(lo, hi), q| (lo.min(q), hi.max(q)));
        // Collatz–Wielandt: lo ≤ λ ≤ hi for a positive matrix and vector.
        let change = hi - lo;
        let lambda = 0.5 * (lo + hi);
        history.push(change);
        let top = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / top).collect();
        if change <= 1e-12 * lambda {
            return Ok(lambda);
        }
    }
    Err(Error::NonConvergence { what: "Kato power iteration", iterations: history.len(), residuals: history })
}

/// Limit `C∞` of the fit `C(L) = C∞ + a/L + b/L²` through the last three points.
pub fn extrapolate_kato(sides: &[f64], values: &[f64]) -> Result<f64> {
    if sides.len() != values.len() || sides.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least three matching points, got {} sides and {} values",
            sides.len(),
            values.len()
        )));
    }
    let n = sides.len();
    let m = nalgebra::Matrix3::from_fn(|i, j| sides[n - 3 + i].powi(-(j as i32)));
    let rhs = nalgebra::Vector3::from_fn(|i, _| values[n - 3 + i]);
    let coef = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("extrapolation nodes must be distinct".into()))?;
    Ok(coef[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_maps_cutoff_and_mass_together() {
        let a = kato_constant(&Lattice::new(4.0, 3.0).unwrap(), 1.0).unwrap();
        let b = kato_constant(&Lattice::new(2.0, 6.0).unwrap(), 2.0).unwrap();
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn power_iteration_matches_dense_eigenvalue() {
        let lattice = Lattice::new(3.0, 5.0).unwrap();
        let coulomb = PeriodicCoulomb::new(3.0).unwrap();
        let n = lattice.len();
        let s: Vec<f64> = (0..n).map(|k| (lattice.momentum_norm(k).powi(2) + 1.0).powf(-0.25)).collect();
        let p = lattice.points();
        let a = nalgebra::DMatrix::from_fn(n, n, |k, l| {
            coulomb.coefficient(diff(p[k], p[l])) * s[k] * s[l] / 27.0
        });
        let dense = a.symmetric_eigenvalues().max();
        let c = kato_constant_with(&lattice, 1.0, &coulomb).unwrap();
        assert!((c - dense).abs() < 1e-10 * dense, "{c} vs {dense}");
    }

    #[test]
    fn extrapolation_is_exact_on_the_model() {
        let sides = [4.0, 6.0, 8.0, 10.0];
        let values: Vec<f64> = sides.iter().map(|l| 1.5 - 0.7 / l + 0.3 / (l * l)).collect();
        assert!((extrapolate_kato(&sides, &values).unwrap() - 1.5).abs() < 1e-12);
        assert!(extrapolate_kato(&sides[..2], &values[..2]).is_err());
    }
}
