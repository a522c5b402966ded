//! `E_L(φ) − E_L(0)` from dense minimization equals the lattice BDF minimum.

use dirac_sea::bdf::{thermo_difference, ExternalDensity, ThermoOptions};
use dirac_sea::torus::TorusParams;

fn main() -> dirac_sea::Result<()> {
    let density = ExternalDensity::gaussian(0.1, 1.0)?;
    let sides = [1.2 * std::f64::consts::PI, 4.0, 5.0];
    for row in thermo_difference(&density, TorusParams::new(1.0, 0.5), &sides, &ThermoOptions::default())? {
        println!(
            "L = {:.4} |Γ| = {:>3} difference {:>12.6e} BDF minimum {:>12.6e} |gap| {:.1e}",
            row.side,
            row.points,
            row.difference.unwrap_or(f64::NAN),
            row.bdf_minimum,
            row.consistency.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
