//! Growth of `g0(0)` with the cutoff against `m0(1 + (α/π)arcsinh(Λ/m0))`.

use dirac_sea::free_vacuum::{g0_lower_bound, solve_free_vacuum, FreeVacuumParams};

fn main() -> dirac_sea::Result<()> {
    println!("{:>8} {:>14} {:>14} {:>12}", "Λ", "g0(0)", "bound", "margin");
    for cutoff in [10.0, 100.0, 1000.0, 10000.0] {
        let params = FreeVacuumParams::new(1.0, 1.0, cutoff);
        let sol = solve_free_vacuum(&params, 0.5, 1e-10, 500)?;
        let bound = g0_lower_bound(&params);
        println!("{cutoff:>8} {:>14.10} {bound:>14.10} {:>12.4e}", sol.g0_at_zero, sol.g0_at_zero - bound);
    }
    Ok(())
}
