//! Translation-invariant free vacuum.
//!
//! A state is `f(p) = α·ω_p f1(|p|) + β f0(|p|)` with `f0, f1 ≤ 0` and
//! `f0² + f1² ≤ ¼` at every node. Its energy per unit volume is
//!
//! `T(f) = (2/π²)∫₀^Λ r²(r f1 + m0 f0) dr − (1/π²)∫₀^Λ r²(f1·X₁[f1] + f0·X₀[f0]) dr`
//!
//! with the exchange transforms `X_j` of [`crate::radial`]. The mean-field
//! operator is `𝒟[f](p) = α·ω_p g1 + β g0` with `g1 = r − X₁[f1]`,
//! `g0 = m0 − X₀[f0]`, and `(2/π²)r²·g` is the functional derivative of `T`.

mod direct;
mod model;
mod random;
mod verify;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use direct::{minimize_direct, DirectOptions, DirectReport};
pub use model::{FreeVacuumModel, ScfOptions};
pub use random::random_admissible_profile;
pub use verify::{check_mean_field, verify_free_vacuum, InvariantCheck, InvariantReport, INVARIANT_TOL};

use crate::dirac::DiracSymbol;
use crate::error::{check_coupling, Error, Result};
use crate::radial::{ExchangeQuadrature, RadialFunction, RadialGrid};

/// Slack allowed on the nodewise constraints.
pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeVacuumParams {
    pub m0: f64,
    pub alpha: f64,
    pub cutoff: f64,
}

impl FreeVacuumParams {
    pub fn new(m0: f64, alpha: f64, cutoff: f64) -> Self {
        Self { m0, alpha, cutoff }
    }

    /// Checks `m0 > 0`, `Λ > 0` and `0 ≤ α < 4/π`.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        check_coupling(self.alpha)
    }

    /// Checks `m0 > 0`, `Λ > 0` and `α ≥ 0` only.
    pub fn validate_shape(&self) -> Result<()> {
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Parameter(format!("m0 must be positive, got {}", self.m0)));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::Parameter(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Grid size and quadrature for the radial discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub grid_points: usize,
    pub quadrature: ExchangeQuadrature,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { grid_points: 200, quadrature: ExchangeQuadrature::default() }
    }
}

/// `(f0, f1)` on a radial grid.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub f0: RadialFunction,
    pub f1: RadialFunction,
}

impl RadialProfile {
    pub fn new(f0: RadialFunction, f1: RadialFunction) -> Result<Self> {
        if !Arc::ptr_eq(f0.grid(), f1.grid()) {
            return Err(Error::Domain("f0 and f1 live on different grids".into()));
        }
        Ok(Self { f0, f1 })
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        Self { f0: RadialFunction::zeros(grid.clone()), f1: RadialFunction::zeros(grid) }
    }

    /// `−D⁰/(2|D⁰|)`: `f0 = −m0/(2E)`, `f1 = −r/(2E)`, `E = √(r² + m0²)`.
    pub fn free_dirac(grid: Arc<RadialGrid>, m0: f64) -> Self {
        let f0 = RadialFunction::sample(grid.clone(), |r| -m0 / (2.0 * r.hypot(m0)));
        let f1 = RadialFunction::sample(grid, |r| -r / (2.0 * r.hypot(m0)));
        Self { f0, f1 }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.f0.grid()
    }

    pub fn len(&self) -> usize {
        self.f0.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbol `α·ω_p f1(|p|) + β f0(|p|)` at an arbitrary momentum.
    pub fn symbol_at(&self, p: [f64; 3]) -> DiracSymbol {
        let r = crate::dirac::norm3(p);
        DiracSymbol::radial(p, self.f1.eval(r), self.f0.eval(r))
    }

    /// Fails with the worst node if a constraint is violated by more than `slack`.
    pub fn check_admissible(&self, slack: f64) -> Result<()> {
        let mut worst = 0.0;
        let mut index = 0;
        let mut kind = "";
        for (i, (&a, &b)) in self.f0.values().iter().zip(self.f1.values()).enumerate() {
            for (v, k) in [(a, "f0 > 0"), (b, "f1 > 0"), (a * a + b * b - 0.25, "f0²+f1² > 1/4")] {
                if v > worst {
                    worst = v;
                    index = i;
                    kind = k;
                }
            }
        }
        if worst > slack {
            return Err(Error::Constraint { what: format!("radial profile ({kind})"), worst, index });
        }
        Ok(())
    }

    /// `max_i max(|Δf0|, |Δf1|)`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let d0 = self.f0.values().iter().zip(other.f0.values()).map(|(a, b)| (a - b).abs());
        let d1 = self.f1.values().iter().zip(other.f1.values()).map(|(a, b)| (a - b).abs());
        d0.chain(d1).fold(0.0, f64::max)
    }

    /// `‖f − g‖²_{L²(B(0,Λ))} = 4π·4∫r²(Δf0² + Δf1²) dr` (Hilbert–Schmidt norm on ℂ⁴).
    pub fn l2_distance_sq(&self, other: &Self) -> f64 {
        let g = self.grid();
        let s: f64 = (0..self.len())
            .map(|i| {
                let a = self.f0.values()[i] - other.f0.values()[i];
                let b = self.f1.values()[i] - other.f1.values()[i];
                g.weights()[i] * g.nodes()[i].powi(2) * (a * a + b * b)
            })
            .sum();
        16.0 * std::f64::consts::PI * s
    }
}

/// `(g0, g1)` on a radial grid.
#[derive(Clone, Debug)]
pub struct MeanFieldRadial {
    pub g0: RadialFunction,
    pub g1: RadialFunction,
}

impl MeanFieldRadial {
    pub fn symbol_at(&self, p: [f64; 3]) -> DiracSymbol {
        let r = crate::dirac::norm3(p);
        DiracSymbol::radial(p, self.g1.eval(r), self.g0.eval(r))
    }
}

#[derive(Clone, Debug)]
pub struct FreeVacuumSolution {
    pub params: FreeVacuumParams,
    pub profile: RadialProfile,
    pub mean_field: MeanFieldRadial,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `g0(0) = m0 − (2α/π)∫₀^Λ f0(v) dv`, the `r → 0` limit of the exchange integral.
    pub g0_at_zero: f64,
}

impl FreeVacuumSolution {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }
}

/// `m0(1 + (α/π) arcsinh(Λ/m0))`.
pub fn g0_lower_bound(params: &FreeVacuumParams) -> f64 {
    params.m0 * (1.0 + params.alpha / std::f64::consts::PI * (params.cutoff / params.m0).asinh())
}

/// `−(1/π²)∫₀^Λ r²√(r² + m0²) dr` in closed form (the `α = 0` energy).
pub fn free_energy_closed_form(m0: f64, cutoff: f64) -> f64 {
    let e = cutoff.hypot(m0);
    let integral = cutoff * (2.0 * cutoff * cutoff + m0 * m0) * e / 8.0
        - m0.powi(4) / 8.0 * (cutoff / m0).asinh();
    -integral / (std::f64::consts::PI * std::f64::consts::PI)
}

/// `T(f)` on the profile's own grid.
pub fn energy_per_volume(profile: &RadialProfile, params: &FreeVacuumParams) -> Result<f64> {
    FreeVacuumModel::on_grid(*params, profile.grid().clone(), &ExchangeQuadrature::default())?
        .energy(profile)
}

/// One undamped fixed-point step on the profile's own grid.
pub fn scf_step(
    profile: &RadialProfile,
    params: &FreeVacuumParams,
) -> Result<(MeanFieldRadial, RadialProfile)> {
    let model =
        FreeVacuumModel::on_grid(*params, profile.grid().clone(), &ExchangeQuadrature::default())?;
    profile.check_admissible(ADMISSIBILITY_SLACK)?;
    Ok(model.scf_step(profile))
}

/// Damped fixed-point solve on the default grid.
pub fn solve_free_vacuum(
    params: &FreeVacuumParams,
    mixing: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FreeVacuumSolution> {
    FreeVacuumModel::new(*params, &Discretization::default())?.solve(
        &ScfOptions { mixing, tol, max_iter },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_energy_matches_quadrature() {
        let grid = RadialGrid::new(1.0, 60, crate::radial::GridMapping::Linear).unwrap();
        let q = -grid.integrate(|r| r * r * r.hypot(1.0)) / std::f64::consts::PI.powi(2);
        assert!((q - free_energy_closed_form(1.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_supercritical_coupling() {
        let p = FreeVacuumParams::new(1.0, 2.0, 10.0);
        assert!(matches!(p.validate(), Err(Error::Parameter(_))));
        assert!(p.validate_shape().is_ok());
    }
}
