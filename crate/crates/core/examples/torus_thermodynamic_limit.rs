//! Translation-invariant torus minimizers converging to the free vacuum as `L` grows.

use std::sync::Arc;

use dirac_sea::free_vacuum::{solve_free_vacuum, FreeVacuumParams};
use dirac_sea::torus::{Lattice, TiOptions, TorusModel, TorusParams, TI_LATTICE_CAP};

fn main() -> dirac_sea::Result<()> {
    let (m0, alpha, cutoff) = (1.0, 1.0, 2.0);
    let limit = solve_free_vacuum(&FreeVacuumParams::new(m0, alpha, cutoff), 0.5, 1e-10, 500)?;
    println!("E^T = {:.10}", limit.energy);
    for r in [4.0, 6.0, 8.0, 10.0, 12.0] {
        let side = 2.0 * std::f64::consts::PI * r / cutoff;
        let lattice = Arc::new(Lattice::with_cap(side, cutoff, TI_LATTICE_CAP)?);
        let model = TorusModel::new(lattice.clone(), TorusParams::new(m0, alpha))?;
        let sol = model.solve_ti(&TiOptions::default())?;
        let sup = (0..lattice.len())
            .map(|k| sol.state.symbols[k].sub(&limit.profile.symbol_at(lattice.momentum(k))).norm())
            .fold(0.0, f64::max);
        let e = sol.energy / side.powi(3);
        println!("L = {side:>7.3} |Γ| = {:>6} E_L/L³ = {e:.10} gap {:.3e} sup|f_L − f̄| {sup:.3e}", lattice.len(), (e - limit.energy).abs());
    }
    Ok(())
}
