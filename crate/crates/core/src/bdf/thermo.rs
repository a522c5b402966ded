use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BdfModel, BdfOptions, ExternalDensity};
use crate::error::Result;
use crate::torus::{GeneralOptions, Lattice, TorusParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptions {
    pub cutoff: f64,
    /// Dense minimization of `E_L^φ` runs only when `|Γ| ≤ general.cap`.
    pub general: GeneralOptions,
    pub bdf: BdfOptions,
    pub lattice_cap: usize,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        Self {
            cutoff: 2.0,
            general: GeneralOptions { starts: 4, cap: 19, ..GeneralOptions::default() },
            bdf: BdfOptions::default(),
            lattice_cap: 400,
        }
    }
}

/// One box side of the external-field thermodynamic comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermoRow {
    pub side: f64,
    pub points: usize,
    /// `min E_L^φ` by dense minimization, when the lattice is small enough.
    pub energy_field: Option<f64>,
    /// `E_L^0` at the translation-invariant minimizer.
    pub energy_free: f64,
    /// `E_L^φ − E_L^0`.
    pub difference: Option<f64>,
    /// Minimum of the lattice BDF energy.
    pub bdf_minimum: f64,
    /// `|difference − bdf_minimum|`.
    pub consistency: Option<f64>,
    /// `−(α/2)D_L(n_L, n_L)`.
    pub lower_bound: f64,
    pub charge: f64,
    /// `ρ_Q̄(0) = L⁻³Σ_q ρ̃(q)`.
    pub density_at_origin: f64,
}

/// `E_L(φ) − E_L(0)` against the same-lattice BDF minimum for each side in `sides`.
pub fn thermo_difference(
    density: &ExternalDensity,
    params: TorusParams,
    sides: &[f64],
    opts: &ThermoOptions,
) -> Result<Vec<ThermoRow>> {
    let mut rows = Vec::with_capacity(sides.len());
    for &side in sides {
        let lattice = Arc::new(Lattice::with_cap(side, opts.cutoff, opts.lattice_cap)?);
        let model = BdfModel::new(lattice.clone(), params, Some(density), &opts.bdf.reference)?;
        let vacuum = model.solve_polarized_vacuum(&opts.bdf)?;
        let energy_free = model.reference().energy;
        let energy_field = if lattice.len() <= opts.general.cap {
            Some(model.torus().minimize_general(&opts.general)?.best.energy)
        } else {
            None
        };
        let difference = energy_field.map(|e| e - energy_free);
        let rho = model.density_of_operator(&vacuum.q);
        rows.push(ThermoRow {
            side,
            points: lattice.len(),
            energy_field,
            energy_free,
            difference,
            bdf_minimum: vacuum.energy,
            consistency: difference.map(|d| (d - vacuum.energy).abs()),
            lower_bound: -0.5 * params.alpha * model.external_coulomb_energy(),
            charge: vacuum.charge,
            density_at_origin: rho.iter().map(|(_, v)| v.re).sum::<f64>() / side.powi(3),
        });
    }
    Ok(rows)
}
