//! The finite-box Dirac–Fock model on the torus `[−L/2, L/2)³` with momentum cutoff `Λ`.
//!
//! Conventions: `W_L(x) = L⁻³Σ_k Ŵ(k)e^{ik·x}` with `Ŵ(k≠0) = 4π/|k|²` and
//! `Ŵ(0) = μL²`; one-body states are expanded on `L^{−3/2}e^{ik·x} ⊗ ℂ⁴`.

mod convolution;
mod coulomb;
mod general;
mod kato;
mod lattice;
mod model;
mod penalized;
mod ti;

pub use coulomb::{unit_mu, zero_mean_potential, zero_mean_potential_with, PeriodicCoulomb};
pub use general::{
    linear_minimizer, project_to_admissible, random_admissible_state, GeneralOptions, GeneralReport,
    GeneralRun, DENSE_CAP,
};
pub use kato::{extrapolate_kato, kato_constant, kato_constant_with, KATO_CAP};
pub use lattice::{Lattice, DEFAULT_LATTICE_CAP, TI_LATTICE_CAP};
pub use model::{DensityCoefficients, EnergyTerms, TorusModel, TorusParams};
pub use penalized::{PenalizedOptions, PenalizedSolution};
pub use ti::{single_mode_energy, TIState, TISolution, TiOptions};

use crate::error::Result;

/// `Γ_Λ^L` with the default size cap.
pub fn build_lattice(side: f64, cutoff: f64) -> Result<Lattice> {
    Lattice::new(side, cutoff)
}

/// `W_L` with the computed `μ`.
pub fn periodic_coulomb(side: f64) -> Result<PeriodicCoulomb> {
    PeriodicCoulomb::new(side)
}

/// `sup_x |W_L(x) − 1/|x||` over a uniform `samples³` grid of the cell (origin excluded).
pub fn coulomb_deviation(coulomb: &PeriodicCoulomb, samples: usize) -> Result<f64> {
    let l = coulomb.side();
    let mut worst = 0.0f64;
    for i in 0..samples {
        for j in 0..samples {
            for k in 0..samples {
                let x = [i, j, k].map(|v| l * ((v as f64 + 0.5) / samples as f64 - 0.5));
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                worst = worst.max((coulomb.potential(x)? - 1.0 / r).abs());
            }
        }
    }
    Ok(worst)
}
