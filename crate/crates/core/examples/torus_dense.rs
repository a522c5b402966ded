//! Dense minimization over all states of a 7-point lattice lands on the
//! translation-invariant fixed point.

use std::sync::Arc;

use dirac_sea::torus::{GeneralOptions, Lattice, TiOptions, TorusModel, TorusParams};

fn main() -> dirac_sea::Result<()> {
    let lattice = Arc::new(Lattice::new(2.0 * std::f64::consts::PI, 1.2)?);
    let model = TorusModel::new(lattice.clone(), TorusParams::new(1.0, 1.0))?;
    let ti = model.solve_ti(&TiOptions::default())?;
    let report = model.minimize_general(&GeneralOptions { starts: 8, seed: 5, ..GeneralOptions::default() })?;
    println!("|Γ| = {}", lattice.len());
    println!("translation-invariant energy {:.12}", ti.energy);
    for (e, it) in report.start_energies.iter().zip(&report.start_iterations) {
        println!("start: energy {e:.12} after {it} iterations");
    }
    println!("off-diagonal norm of the best minimizer {:.2e}", report.off_diagonal_norm);
    Ok(())
}
