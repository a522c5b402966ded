use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{EnergyTerms, TorusModel};
use crate::dirac::{hermitian_eigen, hermitize, spectral_function, C64};
use crate::error::{Error, Result};

/// Default cap on `|Γ|` for dense minimization.
pub const DENSE_CAP: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralOptions {
    pub starts: usize,
    pub seed: u64,
    /// Stop once `‖γ − (χ_(−∞,0)(𝒟[γ]) − ½)‖_F ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest `|Γ|` accepted.
    pub cap: usize,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        Self { starts: 20, seed: 0, tol: 1e-8, max_iter: 2000, cap: DENSE_CAP }
    }
}

#[derive(Clone, Debug)]
pub struct GeneralRun {
    pub state: DMatrix<C64>,
    pub energy: f64,
    pub terms: EnergyTerms,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct GeneralReport {
    /// Lowest-energy run.
    pub best: GeneralRun,
    pub start_energies: Vec<f64>,
    pub start_iterations: Vec<usize>,
    /// Frobenius norm of the off-diagonal blocks of the best minimizer.
    pub off_diagonal_norm: f64,
}

const ARMIJO: f64 = 1e-4;
const ROUNDING: f64 = 1e-13;
const MIN_STEP: f64 = 1e-14;
const MAX_STEP: f64 = 1e6;

/// Eigen-clip projection of a Hermitian matrix onto `−½ ≤ γ ≤ ½`.
pub fn project_to_admissible(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(&hermitize(m.clone()));
    spectral_function(&values, &vectors, |l| l.clamp(-0.5, 0.5))
}

/// `χ_(−∞,0)(𝒟) − ½`, the minimizer of `γ ↦ tr(𝒟γ)` over admissible states.
pub fn linear_minimizer(d: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(&hermitize(d.clone()));
    spectral_function(&values, &vectors, |l| if l < 0.0 { 0.5 } else { -0.5 })
}

/// Random admissible state: random eigenbasis, eigenvalues uniform in `[−½, ½]`.
pub fn random_admissible_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let h = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let (_, vectors) = hermitian_eigen(&hermitize(h));
    let spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut scaled = vectors.clone();
    for (j, s) in spectrum.iter().enumerate() {
        for i in 0..dim {
            scaled[(i, j)] *= C64::from(*s);
        }
    }
    hermitize(&scaled * vectors.adjoint())
}

fn real_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

impl TorusModel {
    /// Projected-gradient descent over `−½ ≤ γ ≤ ½` from seeded random starts.
    pub fn minimize_general(&self, opts: &GeneralOptions) -> Result<GeneralReport> {
        if self.lattice().len() > opts.cap {
            return Err(Error::LatticeTooLarge { size: self.lattice().len(), cap: opts.cap });
        }
        if opts.starts == 0 {
            return Err(Error::Parameter("need at least one start".into()));
        }
        let mut runs = Vec::with_capacity(opts.starts);
        for s in 0..opts.starts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(s as u64));
            let start = random_admissible_state(self.dim(), &mut rng);
            runs.push(self.minimize_general_from(start, opts)?);
        }
        let best = (0..runs.len())
            .min_by(|&a, &b| runs[a].energy.total_cmp(&runs[b].energy))
            .expect("non-empty");
        let start_energies = runs.iter().map(|r| r.energy).collect();
        let start_iterations = runs.iter().map(|r| r.iterations).collect();
        let best = runs.swap_remove(best);
        Ok(GeneralReport {
            off_diagonal_norm: self.off_diagonal_norm(&best.state),
            best,
            start_energies,
            start_iterations,
        })
    }

    /// One projected-gradient run with approximate-Armijo backtracking.
    pub fn minimize_general_from(
        &self,
        start: DMatrix<C64>,
        opts: &GeneralOptions,
    ) -> Result<GeneralRun> {
        let mut gamma = project_to_admissible(&start);
        let mut step = 0.1 / self.params().m0;
        let mut history = Vec::new();
        for it in 0..opts.max_iter {
            let d = self.mean_field(&gamma);
            let residual = (linear_minimizer(&d) - &gamma).norm();
            history.push(residual);
            if residual <= opts.tol {
                let terms = self.energy_terms(&gamma);
                return Ok(GeneralRun {
                    energy: terms.total(),
                    terms,
                    state: gamma,
                    residual,
                    iterations: it,
                });
            }
            let scale = real_inner(&d, &gamma).abs() + 1.0;
            loop {
                let trial = project_to_admissible(&(&gamma - &d * C64::from(step)));
                let delta = &trial - &gamma;
                let slope = real_inner(&d, &delta);
                let de = self.energy_difference(&gamma, &delta);
                if de <= ARMIJO * slope + ROUNDING * scale {
                    gamma = trial;
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
            what: "dense torus minimization",
            iterations: history.len(),
            residuals: history,
        })
    }

    /// `E(γ + Δ) − E(γ) = Re tr(𝒟[γ]Δ) + ½ Q(Δ)`, `Q` the quadratic part of the energy.
    pub fn energy_difference(&self, gamma: &DMatrix<C64>, delta: &DMatrix<C64>) -> f64 {
        let d = self.mean_field(gamma);
        let alpha = self.params().alpha;
        let rho = self.density(delta);
        let quad = alpha * self.coulomb_pairing(&rho, &rho) - alpha * self.exchange_pairing(delta, delta);
        real_inner(&d, delta) + 0.5 * quad
    }

    /// `tr(|𝒟|Δ²)` for a block-diagonal `𝒟` given by one symbol per lattice point.
    pub fn weighted_square(&self, field_norms: &[f64], delta: &DMatrix<C64>) -> f64 {
        let dim = delta.nrows();
        let mut s = 0.0;
        for i in 0..dim {
            let w = field_norms[i / 4];
            for j in 0..dim {
                s += w * delta[(i, j)].norm_sqr();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::torus::{kato_constant, Lattice, TiOptions, TorusParams};

    fn model(alpha: f64) -> TorusModel {
        let lattice = Lattice::new(2.0 * std::f64::consts::PI, 1.2).unwrap();
        assert_eq!(lattice.len(), 7);
        TorusModel::new(Arc::new(lattice), TorusParams::new(1.0, alpha)).unwrap()
    }

    #[test]
    fn free_minimum_is_minus_twice_the_energies() {
        let m = model(0.0);
        let report = m.minimize_general(&GeneralOptions { starts: 3, ..GeneralOptions::default() }).unwrap();
        let expected: f64 =
            (0..m.lattice().len()).map(|k| -2.0 * (m.lattice().momentum_norm(k).powi(2) + 1.0).sqrt()).sum();
        assert!((report.best.energy - expected).abs() < 1e-10, "{} vs {expected}", report.best.energy);
        assert!(report.off_diagonal_norm < 1e-8);
    }

    #[test]
    fn general_minimum_is_translation_invariant() {
        let m = model(1.0);
        let ti = m.solve_ti(&TiOptions::default()).unwrap();
        let report = m.minimize_general(&GeneralOptions { starts: 5, ..GeneralOptions::default() }).unwrap();
        assert!((report.best.energy - ti.energy).abs() < 1e-6);
        assert!(report.off_diagonal_norm < 1e-6);
        assert!((&report.best.state - m.ti_to_general(&ti.state)).norm() < 1e-6);
    }

    #[test]
    fn energy_gap_bound_at_random_states() {
        let m = model(1.0);
        let ti = m.solve_ti(&TiOptions { tol: 1e-13, ..TiOptions::default() }).unwrap();
        let gamma0 = m.ti_to_general(&ti.state);
        let c = kato_constant(m.lattice(), 0.5).unwrap();
        let factor = 1.0 - c / 2.0;
        assert!(factor > 0.0);
        let norms: Vec<f64> = ti.mean_field.iter().map(|d| d.norm()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let gamma = random_admissible_state(m.dim(), &mut rng);
            let delta = &gamma - &gamma0;
            let gap = m.energy(&gamma) - ti.energy;
            let bound = factor * m.weighted_square(&norms, &delta);
            assert!(gap >= bound - 1e-10, "{gap} < {bound}");
        }
    }

    #[test]
    fn energy_difference_is_exact() {
        let m = model(0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_admissible_state(m.dim(), &mut rng);
        let b = random_admissible_state(m.dim(), &mut rng);
        let delta = &b - &a;
        assert!((m.energy_difference(&a, &delta) - (m.energy(&b) - m.energy(&a))).abs() < 1e-11);
    }
}
