//! Projected-gradient minimization of the energy per volume from random starts,
//! compared with the fixed point.

use dirac_sea::free_vacuum::{minimize_direct, solve_free_vacuum, DirectOptions, Discretization, FreeVacuumParams};

fn main() -> dirac_sea::Result<()> {
    let params = FreeVacuumParams::new(1.0, 1.0, 10.0);
    let scf = solve_free_vacuum(&params, 0.5, 1e-10, 500)?;
    let report = minimize_direct(&params, &Discretization::default(), &DirectOptions { starts: 4, seed: 3, ..DirectOptions::default() })?;
    println!("start energies: {:?}", report.start_energies);
    println!("start iterations: {:?}", report.start_iterations);
    println!("spread between starts {:.2e}", report.spread);
    println!("sup|f_scf − f_direct| = {:.2e}", scf.profile.sup_distance(&report.solution.profile));
    println!("relative energy difference {:.2e}", (scf.energy - report.solution.energy).abs() / scf.energy.abs());
    Ok(())
}
