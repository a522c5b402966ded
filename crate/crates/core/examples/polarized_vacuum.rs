//! Polarized vacuum of a weak Gaussian charge on a small torus.

use std::sync::Arc;

use dirac_sea::bdf::{uniqueness_condition_check, BdfModel, BdfOptions, ExternalDensity};
use dirac_sea::torus::{Lattice, TiOptions, TorusParams};

fn main() -> dirac_sea::Result<()> {
    let (alpha, cutoff) = (0.5, 2.0);
    let density = ExternalDensity::gaussian(0.1, 1.0)?;
    let check = uniqueness_condition_check(alpha, density.coulomb_norm(cutoff))?;
    println!("uniqueness condition: {} (middle term {:.4})", check.passed, check.middle);

    let lattice = Arc::new(Lattice::with_cap(5.0, cutoff, 400)?);
    let model = BdfModel::new(lattice.clone(), TorusParams::new(1.0, alpha), Some(&density), &TiOptions::default())?;
    let vacuum = model.solve_polarized_vacuum(&BdfOptions::default())?;
    println!("|Γ| = {}, {} iterations, residual {:.2e}", lattice.len(), vacuum.iterations, vacuum.residual);
    println!("E_BDF = {:.6e} ∈ [{:.6e}, 0]", vacuum.energy, -0.5 * alpha * model.external_coulomb_energy());
    println!("terms {:?}", vacuum.terms);
    println!("charge {:.2e}, ‖[𝒟̄, P̄]‖ = {:.2e}, spectral gap {:.4}", vacuum.charge, vacuum.projected_gradient, vacuum.gap);
    Ok(())
}
