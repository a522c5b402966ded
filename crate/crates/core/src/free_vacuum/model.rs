use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    Discretization, FreeVacuumParams, FreeVacuumSolution, MeanFieldRadial, RadialProfile,
    ADMISSIBILITY_SLACK,
};
use crate::error::{Error, Result};
use crate::radial::{ExchangeOperator, ExchangeQuadrature, RadialFunction, RadialGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfOptions {
    /// Weight `θ` of the new iterate in `f ← (1−θ)f + θ·S(f)`.
    pub mixing: f64,
    /// Stop once `sup|S(f) − f| ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { mixing: 0.5, tol: 1e-10, max_iter: 500 }
    }
}

/// Parameters, grid and precomputed exchange matrices.
#[derive(Clone, Debug)]
pub struct FreeVacuumModel {
    params: FreeVacuumParams,
    grid: Arc<RadialGrid>,
    exchange: ExchangeOperator,
}

impl FreeVacuumModel {
    /// Sinh grid of scale `m0`; requires `0 ≤ α < 4/π`.
    pub fn new(params: FreeVacuumParams, disc: &Discretization) -> Result<Self> {
        params.validate()?;
        Self::build(params, disc)
    }

    /// Same as [`FreeVacuumModel::new`] but accepts any `α ≥ 0`.
    ///
    /// The convexity and uniqueness results fail for `α ≥ 4/π`; the fixed-point
    /// map is still well defined and is used to probe that regime.
    pub fn new_unchecked(params: FreeVacuumParams, disc: &Discretization) -> Result<Self> {
        params.validate_shape()?;
        Self::build(params, disc)
    }

    fn build(params: FreeVacuumParams, disc: &Discretization) -> Result<Self> {
        let grid = Arc::new(RadialGrid::for_mass(params.cutoff, disc.grid_points, params.m0)?);
        let exchange = ExchangeOperator::new(grid.clone(), &disc.quadrature);
        Ok(Self { params, grid, exchange })
    }

    /// Model on an existing grid whose cutoff must equal `params.cutoff`.
    pub fn on_grid(
        params: FreeVacuumParams,
        grid: Arc<RadialGrid>,
        quad: &ExchangeQuadrature,
    ) -> Result<Self> {
        params.validate()?;
        if (grid.cutoff() - params.cutoff).abs() > 1e-12 * params.cutoff {
            return Err(Error::Domain(format!(
                "grid cutoff {} differs from parameter cutoff {}",
                grid.cutoff(),
                params.cutoff
            )));
        }
        let exchange = ExchangeOperator::new(grid.clone(), quad);
        Ok(Self { params, grid, exchange })
    }

    pub fn params(&self) -> &FreeVacuumParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn exchange(&self) -> &ExchangeOperator {
        &self.exchange
    }

    fn check_grid(&self, profile: &RadialProfile) -> Result<()> {
        let same = Arc::ptr_eq(profile.grid(), &self.grid)
            || profile.grid().nodes() == self.grid.nodes();
        if !same {
            return Err(Error::Domain("profile lives on a different grid".into()));
        }
        Ok(())
    }

    /// `T(f)`; the profile must be admissible.
    pub fn energy(&self, profile: &RadialProfile) -> Result<f64> {
        self.check_grid(profile)?;
        profile.check_admissible(ADMISSIBILITY_SLACK)?;
        Ok(self.energy_unchecked(profile))
    }

    /// `T(f)` without the admissibility check.
    pub fn energy_unchecked(&self, profile: &RadialProfile) -> f64 {
        let (f0, f1) = (profile.f0.values(), profile.f1.values());
        let x0 = self.exchange.apply(0, f0, self.params.alpha);
        let x1 = self.exchange.apply(1, f1, self.params.alpha);
        let m0 = self.params.m0;
        let mut kinetic = 0.0;
        let mut exchange = 0.0;
        for i in 0..f0.len() {
            let r = self.grid.nodes()[i];
            let w = self.grid.weights()[i] * r * r;
            kinetic += w * (r * f1[i] + m0 * f0[i]);
            exchange += w * (f1[i] * x1[i] + f0[i] * x0[i]);
        }
        (2.0 * kinetic - exchange) / (PI * PI)
    }

    /// `T(f + Δ) − T(f)` assembled from terms proportional to `Δ`, so its
    /// rounding error scales with the difference rather than with `T(f)`.
    pub fn energy_difference(&self, f: &RadialProfile, next: &RadialProfile) -> f64 {
        let alpha = self.params.alpha;
        let m0 = self.params.m0;
        let n = f.len();
        let d0: Vec<f64> = (0..n).map(|i| next.f0.values()[i] - f.f0.values()[i]).collect();
        let d1: Vec<f64> = (0..n).map(|i| next.f1.values()[i] - f.f1.values()[i]).collect();
        let xf0 = self.exchange.apply(0, f.f0.values(), alpha);
        let xf1 = self.exchange.apply(1, f.f1.values(), alpha);
        let xd0 = self.exchange.apply(0, &d0, alpha);
        let xd1 = self.exchange.apply(1, &d1, alpha);
        let mut kinetic = 0.0;
        let mut exchange = 0.0;
        for i in 0..n {
            let r = self.grid.nodes()[i];
            let w = self.grid.weights()[i] * r * r;
            kinetic += w * (r * d1[i] + m0 * d0[i]);
            exchange += w
                * (d1[i] * xf1[i] + f.f1.values()[i] * xd1[i] + d1[i] * xd1[i]
                    + d0[i] * xf0[i]
                    + f.f0.values()[i] * xd0[i]
                    + d0[i] * xd0[i]);
        }
        (2.0 * kinetic - exchange) / (PI * PI)
    }

    /// `g1 = r − X₁[f1]`, `g0 = m0 − X₀[f0]` at the nodes.
    pub fn mean_field(&self, profile: &RadialProfile) -> MeanFieldRadial {
        let x0 = self.exchange.apply(0, profile.f0.values(), self.params.alpha);
        let x1 = self.exchange.apply(1, profile.f1.values(), self.params.alpha);
        let g0 = x0.iter().map(|x| self.params.m0 - x).collect();
        let g1 = x1.iter().zip(self.grid.nodes()).map(|(x, r)| r - x).collect();
        MeanFieldRadial {
            g0: RadialFunction::new(self.grid.clone(), g0).expect("finite mean field"),
            g1: RadialFunction::new(self.grid.clone(), g1).expect("finite mean field"),
        }
    }

    /// `m0 − (2α/π)∫₀^Λ f0(v) dv`, the exact `r → 0` limit of `g0`.
    pub fn g0_at_zero(&self, profile: &RadialProfile) -> f64 {
        let integral: f64 =
            profile.f0.values().iter().zip(self.grid.weights()).map(|(f, w)| f * w).sum();
        self.params.m0 - 2.0 * self.params.alpha / PI * integral
    }

    /// Mean field of `f` and the undamped update `−g/(2|g|)`.
    pub fn scf_step(&self, profile: &RadialProfile) -> (MeanFieldRadial, RadialProfile) {
        let g = self.mean_field(profile);
        let next = project_from_field(&g);
        (g, next)
    }

    /// Damped fixed-point iteration from `initial` (default: the free Dirac profile).
    ///
    /// The returned profile is the last undamped image `S(f)`, so it lies on
    /// `f0² + f1² = ¼` exactly.
    pub fn solve(
        &self,
        opts: &ScfOptions,
        initial: Option<RadialProfile>,
    ) -> Result<FreeVacuumSolution> {
        if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
            return Err(Error::Parameter(format!("mixing must lie in (0, 1], got {}", opts.mixing)));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {}", opts.tol)));
        }
        let mut f = match initial {
            Some(p) => {
                self.check_grid(&p)?;
                p.check_admissible(ADMISSIBILITY_SLACK)?;
                p
            }
            None => RadialProfile::free_dirac(self.grid.clone(), self.params.m0),
        };
        let mut history = Vec::new();
        for it in 1..=opts.max_iter {
            let (_, next) = self.scf_step(&f);
            let residual = next.sup_distance(&f);
            history.push(residual);
            if !residual.is_finite() {
                break;
            }
            if residual <= opts.tol {
                let mean_field = self.mean_field(&next);
                return Ok(FreeVacuumSolution {
                    params: self.params,
                    energy: self.energy_unchecked(&next),
                    g0_at_zero: self.g0_at_zero(&next),
                    profile: next,
                    mean_field,
                    residual,
                    iterations: it,
                    residual_history: history,
                });
            }
            mix(&mut f, &next, opts.mixing);
        }
        Err(Error::NonConvergence {
            what: "free-vacuum fixed point",
            iterations: history.len(),
            residuals: history,
        })
    }

    /// Solution object for a given profile (used by the direct minimizer).
    pub(crate) fn solution_for(
        &self,
        profile: RadialProfile,
        iterations: usize,
        history: Vec<f64>,
    ) -> FreeVacuumSolution {
        let mean_field = self.mean_field(&profile);
        let residual = project_from_field(&mean_field).sup_distance(&profile);
        FreeVacuumSolution {
            params: self.params,
            energy: self.energy_unchecked(&profile),
            g0_at_zero: self.g0_at_zero(&profile),
            profile,
            mean_field,
            residual,
            iterations,
            residual_history: history,
        }
    }
}

/// `f = −g/(2|g|)` nodewise; `f = 0` where `g` vanishes.
pub(crate) fn project_from_field(g: &MeanFieldRadial) -> RadialProfile {
    let grid = g.g0.grid().clone();
    let n = grid.len();
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for i in 0..n {
        let (a, b) = (g.g0.values()[i], g.g1.values()[i]);
        let norm = a.hypot(b);
        if norm > 0.0 {
            f0[i] = -a / (2.0 * norm);
            f1[i] = -b / (2.0 * norm);
        }
    }
    RadialProfile {
        f0: RadialFunction::new(grid.clone(), f0).expect("finite profile"),
        f1: RadialFunction::new(grid, f1).expect("finite profile"),
    }
}

pub(crate) fn mix(f: &mut RadialProfile, target: &RadialProfile, theta: f64) {
    for (a, b) in f.f0.values_mut().iter_mut().zip(target.f0.values()) {
        *a += theta * (b - *a);
    }
    for (a, b) in f.f1.values_mut().iter_mut().zip(target.f1.values()) {
        *a += theta * (b - *a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_vacuum::free_energy_closed_form;

    #[test]
    fn zero_coupling_energy_is_closed_form() {
        let params = FreeVacuumParams::new(1.0, 0.0, 1.0);
        let model = FreeVacuumModel::new(params, &Discretization::default()).unwrap();
        let sol = model.solve(&ScfOptions::default(), None).unwrap();
        assert!(sol.iterations <= 2);
        assert!((sol.energy - free_energy_closed_form(1.0, 1.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_mixing() {
        let params = FreeVacuumParams::new(1.0, 0.5, 5.0);
        let disc = Discretization { grid_points: 40, ..Default::default() };
        let model = FreeVacuumModel::new(params, &disc).unwrap();
        let opts = ScfOptions { mixing: 0.0, ..Default::default() };
        assert!(matches!(model.solve(&opts, None), Err(Error::Parameter(_))));
    }
}
