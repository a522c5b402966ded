//! Without the commutator in the density, the minimizer's mean density `ρ_Θ` vanishes like `1/L`.

use std::sync::Arc;

use dirac_sea::torus::{Lattice, PenalizedOptions, TorusModel, TorusParams, TI_LATTICE_CAP};

fn main() -> dirac_sea::Result<()> {
    for side in [4.0, 6.0, 8.0, 10.0] {
        let lattice = Arc::new(Lattice::with_cap(side, 5.0, TI_LATTICE_CAP)?);
        let model = TorusModel::new(lattice.clone(), TorusParams::new(1.0, 1.0))?;
        let sol = model.minimize_penalized(&PenalizedOptions::default())?;
        println!("L = {side:>4} |Γ| = {:>5} ρ = {:.6} ρL = {:.6} ‖ξ‖∞ = {:.4e} ({} steps)",
            lattice.len(), sol.rho, sol.rho * side, sol.xi_sup, sol.iterations);
    }
    Ok(())
}
