use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dirac::C64;
use crate::error::{Error, Result};
use crate::radial::quadrature::gauss_legendre_on;
use crate::torus::Lattice;

/// Radial external charge densities given by their Fourier transform `n̂(|k|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExternalDensity {
    /// `n̂(k) = Z(2π)^{−3/2}e^{−|k|²σ²/2}`.
    Gaussian { charge: f64, width: f64 },
    /// `n = Zδ_Λ`, i.e. `n̂(k) = Z(2π)^{−3/2}` on the ball.
    PointCharge { charge: f64 },
    /// Values read from a file, interpolated by a natural cubic spline in `|k|`.
    Tabulated { table: Table },
}

impl ExternalDensity {
    pub fn gaussian(charge: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && charge.is_finite()) {
            return Err(Error::Parameter(format!("Gaussian needs finite Z and σ > 0, got Z = {charge}, σ = {width}")));
        }
        Ok(Self::Gaussian { charge, width })
    }

    pub fn point_charge(charge: f64) -> Result<Self> {
        if !charge.is_finite() {
            return Err(Error::Parameter(format!("charge must be finite, got {charge}")));
        }
        Ok(Self::PointCharge { charge })
    }

    /// Reads lines `k re im`; blank lines and lines starting with `#` are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Ok(Self::Tabulated { table: Table::parse(&text)? })
    }

    /// `n̂(k)` at `|k| = k`.
    pub fn fourier(&self, k: f64) -> C64 {
        let norm = (2.0 * PI).powf(-1.5);
        match self {
            Self::Gaussian { charge, width } => C64::new(charge * norm * (-0.5 * (k * width).powi(2)).exp(), 0.0),
            Self::PointCharge { charge } => C64::new(charge * norm, 0.0),
            Self::Tabulated { table } => table.eval(k),
        }
    }

    /// `D(n,n) = 4π∫_{|k|≤Λ}|n̂(k)|²/|k|² dk = (4π)²∫₀^Λ|n̂(k)|² dk`.
    pub fn coulomb_energy(&self, cutoff: f64) -> f64 {
        coulomb_inner(self, self, cutoff)
    }

    /// `‖n‖_𝒞 = √D(n,n)`.
    pub fn coulomb_norm(&self, cutoff: f64) -> f64 {
        self.coulomb_energy(cutoff).sqrt()
    }

    /// `ñ(k) = (2π)^{3/2}n̂(k)` on the lattice, so that `n_L(x) = L⁻³Σ_k ñ(k)e^{ik·x}`.
    pub fn lattice_coefficients(&self, lattice: &Lattice) -> Vec<C64> {
        let s = (2.0 * PI).powf(1.5);
        (0..lattice.len()).map(|i| self.fourier(lattice.momentum_norm(i)) * s).collect()
    }
}

/// Continuum `D(f, g) = (4π)²∫₀^Λ Re(conj(f̂)ĝ)(k) dk` for radial densities, by
/// composite Gauss–Legendre quadrature.
pub fn coulomb_inner(f: &ExternalDensity, g: &ExternalDensity, cutoff: f64) -> f64 {
    let panels = 64;
    let h = cutoff / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let (x, w) = gauss_legendre_on(16, p as f64 * h, (p + 1) as f64 * h);
        s += x.iter().zip(&w).map(|(&k, &w)| w * (f.fourier(k).conj() * g.fourier(k)).re).sum::<f64>();
    }
    16.0 * PI * PI * s
}

/// Natural cubic spline through `(k_i, n̂_i)`; constant extrapolation outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    k: Vec<f64>,
    values: Vec<C64>,
    second: Vec<C64>,
}

impl Table {
    pub fn new(k: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if k.len() < 2 || k.len() != values.len() {
            return Err(Error::Domain(format!("table needs ≥ 2 matching rows, got {} and {}", k.len(), values.len())));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) || k[0] < 0.0 {
            return Err(Error::Domain("table momenta must be non-negative and strictly increasing".into()));
        }
        let second = natural_spline_second_derivatives(&k, &values);
        Ok(Self { k, values, second })
    }

    fn parse(text: &str) -> Result<Self> {
        let mut k = Vec::new();
        let mut values = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Domain(format!("line {}: {e}", no + 1)))?;
            if fields.len() != 3 {
                return Err(Error::Domain(format!("line {}: expected `k re im`, got {} fields", no + 1, fields.len())));
            }
            k.push(fields[0]);
            values.push(C64::new(fields[1], fields[2]));
        }
        Self::new(k, values)
    }

    pub fn eval(&self, x: f64) -> C64 {
        let n = self.k.len();
        if x <= self.k[0] {
            return self.values[0];
        }
        if x >= self.k[n - 1] {
            return self.values[n - 1];
        }
        let i = self.k.partition_point(|&v| v <= x) - 1;
        let h = self.k[i + 1] - self.k[i];
        let a = (self.k[i + 1] - x) / h;
        let b = 1.0 - a;
        self.values[i] * a
            + self.values[i + 1] * b
            + (self.second[i] * (a * a * a - a) + self.second[i + 1] * (b * b * b - b)) * (h * h / 6.0)
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[C64]) -> Vec<C64> {
    let n = x.len();
    let mut m = vec![C64::new(0.0, 0.0); n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut diag = vec![0.0; n];
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[i] = 2.0 * (h0 + h1);
        rhs[i] = ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0) * 6.0;
        if i > 1 {
            let f = h0 / diag[i - 1];
            diag[i] -= f * h0;
            rhs[i] = rhs[i] - rhs[i - 1] * f;
        }
    }
    for i in (1..n - 1).rev() {
        let h1 = x[i + 1] - x[i];
        m[i] = (rhs[i] - m[i + 1] * h1) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_coulomb_energy_matches_closed_form() {
        let n = ExternalDensity::gaussian(0.7, 1.3).unwrap();
        let exact = 0.49 / (PI.sqrt() * 1.3) * libm::erf(1.3 * 20.0);
        assert!((n.coulomb_energy(20.0) - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn spline_reproduces_cubics_and_nodes() {
        let k: Vec<f64> = (0..30).map(|i| 0.1 * i as f64).collect();
        let v: Vec<C64> = k.iter().map(|&x| C64::new((-x).exp(), x.sin())).collect();
        let t = Table::new(k.clone(), v.clone()).unwrap();
        for (x, y) in k.iter().zip(&v) {
            assert!((t.eval(*x) - y).norm() < 1e-14);
        }
        let z = t.eval(1.234);
        assert!((z - C64::new((-1.234f64).exp(), 1.234f64.sin())).norm() < 1e-4);
        let lin = Table::new(vec![0.0, 1.0, 3.0], vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0)]).unwrap();
        assert!((lin.eval(2.0).re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn parses_table_text() {
        let t = Table::parse("# k re im\n0 1 0\n1 0.5 0.1\n\n2 0.25 0\n").unwrap();
        assert!((t.eval(1.0) - C64::new(0.5, 0.1)).norm() < 1e-15);
        assert!(Table::parse("0 1\n").is_err());
        assert!(Table::parse("1 1 0\n0 1 0\n").is_err());
    }
}
