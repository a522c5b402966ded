//! Self-consistent free vacuum at `(m0, α, Λ) = (1, 1, 10)` and its mean-field bounds.

use dirac_sea::free_vacuum::{free_energy_closed_form, solve_free_vacuum, verify_free_vacuum, FreeVacuumParams};

fn main() -> dirac_sea::Result<()> {
    let params = FreeVacuumParams::new(1.0, 1.0, 10.0);
    let sol = solve_free_vacuum(&params, 0.5, 1e-10, 500)?;
    println!("E^T = {:.12e} after {} iterations (α = 0 value {:.12e})", sol.energy, sol.iterations, free_energy_closed_form(1.0, 10.0));
    println!("g0(0) = {:.10}", sol.g0_at_zero);
    for c in verify_free_vacuum(&sol).checks {
        println!("{:<22} margin {:>12.4e} at r = {:.3e} {}", c.name, c.margin, c.worst_r, if c.passed { "ok" } else { "violated" });
    }
    let grid = sol.grid();
    for i in (0..grid.len()).step_by(40) {
        let r = grid.nodes()[i];
        println!("r = {r:>10.5}  f0 = {:>10.6}  f1 = {:>10.6}  g0 = {:>10.6}  g1 = {:>10.6}",
            sol.profile.f0.values()[i], sol.profile.f1.values()[i], sol.mean_field.g0.values()[i], sol.mean_field.g1.values()[i]);
    }
    Ok(())
}
