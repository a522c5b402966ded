use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::project_from_field;
use super::{
    random_admissible_profile, Discretization, FreeVacuumModel, FreeVacuumParams,
    FreeVacuumSolution, RadialProfile,
};
use crate::error::{Error, Result};
use crate::radial::RadialFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    pub starts: usize,
    pub seed: u64,
    /// Stop once `sup|S(f) − f| ≤ tol`, `S` the fixed-point map.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest sup-norm distance allowed between the minimizers of different starts.
    pub agreement_tol: f64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self { starts: 4, seed: 0, tol: 1e-10, max_iter: 5000, agreement_tol: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct DirectReport {
    /// Lowest-energy minimizer over all starts.
    pub solution: FreeVacuumSolution,
    pub start_energies: Vec<f64>,
    pub start_iterations: Vec<usize>,
    /// `max_s sup|f_s − f_best|`.
    pub spread: f64,
}

const ARMIJO: f64 = 1e-4;
/// Relative slack of the approximate Armijo test: near the minimizer the
/// decrease is quadratic in the step and falls below the rounding level of
/// the individual terms.
const ROUNDING: f64 = 1e-13;
const MIN_STEP: f64 = 1e-16;
const MAX_STEP: f64 = 1e8;

/// Projected-gradient minimization of `T` over admissible profiles from
/// seeded random starts, without using the fixed-point map.
pub fn minimize_direct(
    params: &FreeVacuumParams,
    disc: &Discretization,
    opts: &DirectOptions,
) -> Result<DirectReport> {
    let model = FreeVacuumModel::new(*params, disc)?;
    model.minimize_direct(opts)
}

impl FreeVacuumModel {
    pub fn minimize_direct(&self, opts: &DirectOptions) -> Result<DirectReport> {
        if opts.starts == 0 {
            return Err(Error::Parameter("need at least one start".into()));
        }
        let mut results = Vec::with_capacity(opts.starts);
        for s in 0..opts.starts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(s as u64));
            let start = random_admissible_profile(self.grid().clone(), &mut rng);
            results.push(self.projected_gradient(start, opts)?);
        }
        let best = (0..results.len())
            .min_by(|&a, &b| results[a].energy.total_cmp(&results[b].energy))
            .expect("non-empty");
        let spread = results
            .iter()
            .map(|r| r.profile.sup_distance(&results[best].profile))
            .fold(0.0, f64::max);
        if spread > opts.agreement_tol {
            return Err(Error::Uniqueness { spread, tol: opts.agreement_tol });
        }
        let start_energies = results.iter().map(|r| r.energy).collect();
        let start_iterations = results.iter().map(|r| r.iterations).collect();
        Ok(DirectReport {
            solution: results.swap_remove(best),
            start_energies,
            start_iterations,
            spread,
        })
    }

    /// Projected gradient with Armijo backtracking from one admissible start.
    ///
    /// The gradient of `T` in the metric `(2/π²)r² dr` is the mean field `g`.
    pub fn projected_gradient(
        &self,
        start: RadialProfile,
        opts: &DirectOptions,
    ) -> Result<FreeVacuumSolution> {
        let mut f = start;
        self.energy(&f)?;
        let mut step = 0.1 / self.params().m0;
        let mut history = Vec::new();
        let metric: Vec<f64> = self
            .grid()
            .nodes()
            .iter()
            .zip(self.grid().weights())
            .map(|(r, w)| 2.0 / (PI * PI) * w * r * r)
            .collect();
        for it in 0..opts.max_iter {
            let g = self.mean_field(&f);
            let stationarity = project_from_field(&g).sup_distance(&f);
            let scale: f64 = (0..f.len())
                .map(|i| {
                    metric[i]
                        * (g.g0.values()[i] * f.f0.values()[i]).abs().max(
                            (g.g1.values()[i] * f.f1.values()[i]).abs(),
                        )
                })
                .sum();
            history.push(stationarity);
            if stationarity <= opts.tol {
                return Ok(self.solution_for(f, it, history));
            }
            loop {
                let trial = projected_step(&f, &g, step);
                let slope: f64 = (0..f.len())
                    .map(|i| {
                        metric[i]
                            * (g.g0.values()[i] * (trial.f0.values()[i] - f.f0.values()[i])
                                + g.g1.values()[i] * (trial.f1.values()[i] - f.f1.values()[i]))
                    })
                    .sum();
                let de = self.energy_difference(&f, &trial);
                if de <= ARMIJO * slope + ROUNDING * scale {
                    f = trial;
                    step = (2.0 * step).min(MAX_STEP);
                    break;
                }
                step *= 0.5;
                if step < MIN_STEP {
                    return Err(Error::StepSize(MIN_STEP));
                }
            }
        }
        Err(Error::NonConvergence {
            what: "free-vacuum direct minimization",
            iterations: history.len(),
            residuals: history,
        })
    }
}

/// Nodewise projection of `f − τg` onto `{f0 ≤ 0, f1 ≤ 0, f0² + f1² ≤ ¼}`.
fn projected_step(f: &RadialProfile, g: &super::MeanFieldRadial, tau: f64) -> RadialProfile {
    let n = f.len();
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for i in 0..n {
        let a = (f.f0.values()[i] - tau * g.g0.values()[i]).min(0.0);
        let b = (f.f1.values()[i] - tau * g.g1.values()[i]).min(0.0);
        let norm = a.hypot(b);
        let scale = if norm > 0.5 { 0.5 / norm } else { 1.0 };
        f0[i] = a * scale;
        f1[i] = b * scale;
    }
    let grid = f.grid().clone();
    RadialProfile {
        f0: RadialFunction::new(grid.clone(), f0).expect("finite profile"),
        f1: RadialFunction::new(grid, f1).expect("finite profile"),
    }
}
