//! Closed-form sign and trace product of `α·a + bβ` against explicit 4×4 matrices.

use dirac_sea::dirac::{hermitian_eigen, spectral_function, sign_of_symbol, symbol_trace_product, DiracSymbol};
use nalgebra::DMatrix;

fn main() -> dirac_sea::Result<()> {
    let d = DiracSymbol::new([0.3, -1.2, 0.5], 0.8);
    let s = sign_of_symbol(&d)?;

    let m = DMatrix::from_fn(4, 4, |i, j| d.matrix()[(i, j)]);
    let (values, vectors) = hermitian_eigen(&m);
    let explicit = spectral_function(&values, &vectors, f64::signum);
    let err = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (explicit[(i, j)] - s.matrix()[(i, j)]).norm())
        .fold(0.0, f64::max);
    println!("sgn(D) = α·{:?} + {:.6}β, max deviation from eigendecomposition {err:.2e}", s.a, s.b);

    let e = DiracSymbol::new([-0.4, 0.1, 2.0], -0.3);
    let trace = (d.matrix() * e.matrix()).trace().re;
    println!("tr(DE) = {:.12} (closed form {:.12})", trace, symbol_trace_product(&d, &e));
    println!("spectrum of D: {:?}, |D| = {:.6}", values.as_slice(), d.norm());
    Ok(())
}
