//! The periodic Coulomb potential `W_L` and its deviation from `1/|x|`.

use dirac_sea::torus::{coulomb_deviation, periodic_coulomb, unit_mu};

fn main() -> dirac_sea::Result<()> {
    println!("μ = {:.12}", unit_mu());
    for side in [1.0, 2.0, 4.0] {
        let w = periodic_coulomb(side)?;
        println!("L = {side}: W_L(L/4, 0, 0) = {:.10}, sup|W_L − 1/|x|| on a 12³ grid = {:.6}",
            w.potential([side / 4.0, 0.0, 0.0])?, coulomb_deviation(&w, 12)?);
    }
    Ok(())
}
