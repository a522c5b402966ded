//! Lattice Kato constants `C_Λ^L` at `(m, Λ) = (1, 10)` and their extrapolation.

use dirac_sea::torus::{extrapolate_kato, kato_constant, Lattice, KATO_CAP};

fn main() -> dirac_sea::Result<()> {
    let sides = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
    let mut values = Vec::new();
    for &side in &sides {
        let lattice = Lattice::with_cap(side, 10.0, KATO_CAP)?;
        let c = kato_constant(&lattice, 1.0)?;
        println!("L = {side:>4} |Γ| = {:>6} C = {c:.10}", lattice.len());
        values.push(c);
    }
    let limit = extrapolate_kato(&sides, &values)?;
    println!("extrapolated {limit:.6} (π/2 = {:.6})", std::f64::consts::FRAC_PI_2);
    Ok(())
}
