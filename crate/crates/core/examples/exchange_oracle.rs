//! Angular-reduced exchange transforms against direct 3D integration.

use dirac_sea::radial::{legendre_q0, legendre_q1, oracle_battery};

fn main() -> dirac_sea::Result<()> {
    for z in [1.0 + 1e-12, 1.5, 10.0, 1e3] {
        println!("Q0({z}) = {:.12e}  Q1({z}) = {:.12e}", legendre_q0(z)?, legendre_q1(z)?);
    }
    let cases = oracle_battery(10, 42, 1.0, 1.0, 10.0, 200)?;
    println!("{:>2} {:>10} {:>16} {:>16} {:>10}", "j", "r", "transform", "oracle", "rel err");
    for c in &cases {
        println!("{:>2} {:>10.5} {:>16.10e} {:>16.10e} {:>10.2e}", c.j, c.r, c.transform, c.oracle, c.relative_error);
    }
    Ok(())
}
