//! Dirac matrices in the standard representation and 4×4 operators of the
//! form `α·a + bβ`.
//!
//! `β = diag(1, 1, −1, −1)` and `αᵢ` has `σᵢ` in both off-diagonal 2×2 blocks.
//! Such a symbol squares to `(|a|² + b²)·I`, so its sign and absolute value
//! are closed-form. General Hermitian matrices (lattice states, blocks that
//! are not of the special form) go through a dense eigendecomposition.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Block = Matrix4<C64>;

/// Symbols with `|a|² + b²` below this are treated as gapless.
pub const SYMBOL_FLOOR: f64 = 1e-300;

/// Default gap floor for spectral projectors, relative to the largest |eigenvalue|.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn beta() -> Block {
    Block::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, -ONE, -ONE))
}

/// `αᵢ` for `i ∈ {0, 1, 2}`.
pub fn alpha(i: usize) -> Block {
    let sigma = match i {
        0 => [[ZERO, ONE], [ONE, ZERO]],
        1 => [[ZERO, -I], [I, ZERO]],
        2 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("alpha index {i} out of range"),
    };
    let mut m = Block::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c + 2)] = sigma[r][c];
            m[(r + 2, c)] = sigma[r][c];
        }
    }
    m
}

/// The Hermitian matrix `α·a + bβ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiracSymbol {
    pub a: [f64; 3],
    pub b: f64,
}

impl DiracSymbol {
    pub const ZERO: DiracSymbol = DiracSymbol { a: [0.0; 3], b: 0.0 };

    pub fn new(a: [f64; 3], b: f64) -> Self {
        Self { a, b }
    }

    /// Free Dirac symbol `α·p + m0β`.
    pub fn free(p: [f64; 3], m0: f64) -> Self {
        Self { a: p, b: m0 }
    }

    /// `α·ω_p g1 + β g0` with `ω_p = p/|p|` (the vector part vanishes at p = 0).
    pub fn radial(p: [f64; 3], g1: f64, g0: f64) -> Self {
        let n = norm3(p);
        let a = if n > 0.0 {
            [p[0] / n * g1, p[1] / n * g1, p[2] / n * g1]
        } else {
            [0.0; 3]
        };
        Self { a, b: g0 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.a[0] * self.a[0] + self.a[1] * self.a[1] + self.a[2] * self.a[2] + self.b * self.b
    }

    /// `|α·a + bβ| = √(|a|² + b²)` (the operator norm; each eigenvalue ±√ has multiplicity 2).
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: [self.a[0] * s, self.a[1] * s, self.a[2] * s],
            b: self.b * s,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            a: [self.a[0] + o.a[0], self.a[1] + o.a[1], self.a[2] + o.a[2]],
            b: self.b + o.b,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// `self + s·o`.
    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        self.add(&o.scale(s))
    }

    pub fn sign(&self) -> Result<Self> {
        sign_of_symbol(self)
    }

    pub fn trace_product(&self, o: &Self) -> f64 {
        symbol_trace_product(self, o)
    }

    pub fn matrix(&self) -> Block {
        let mut m = beta() * C64::from(self.b);
        for i in 0..3 {
            if self.a[i] != 0.0 {
                m += alpha(i) * C64::from(self.a[i]);
            }
        }
        m
    }
}

pub(crate) fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// `sgn(D) = D/|D|`.
pub fn sign_of_symbol(d: &DiracSymbol) -> Result<DiracSymbol> {
    let n2 = d.norm_sq();
    if !(n2 > SYMBOL_FLOOR) {
        return Err(Error::DegenerateSymbol { norm_sq: n2 });
    }
    Ok(d.scale(1.0 / n2.sqrt()))
}

/// `tr_{ℂ⁴}[AB] = 4(a_A·a_B + b_A b_B)`.
pub fn symbol_trace_product(x: &DiracSymbol, y: &DiracSymbol) -> f64 {
    4.0 * (x.a[0] * y.a[0] + x.a[1] * y.a[1] + x.a[2] * y.a[2] + x.b * y.b)
}

/// `s·I + (α·a + bβ)`: the translation-invariant block shape that stays closed
/// under mean-field updates when the state carries a trace part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftedSymbol {
    pub shift: f64,
    pub symbol: DiracSymbol,
}

impl ShiftedSymbol {
    pub fn trace(&self) -> f64 {
        4.0 * self.shift
    }

    /// Eigenvalues `shift ∓ |symbol|`, each twice.
    pub fn eigen_bounds(&self) -> (f64, f64) {
        let n = self.symbol.norm();
        (self.shift - n, self.shift + n)
    }

    /// `tr[XY]`.
    pub fn trace_product(&self, o: &Self) -> f64 {
        4.0 * self.shift * o.shift + self.symbol.trace_product(&o.symbol)
    }

    pub fn matrix(&self) -> Block {
        self.symbol.matrix() + Block::identity() * C64::from(self.shift)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            shift: self.shift * s,
            symbol: self.symbol.scale(s),
        }
    }

    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        Self {
            shift: self.shift + s * o.shift,
            symbol: self.symbol.axpy(s, &o.symbol),
        }
    }
}

/// A 4×4 Hermitian block with no assumed structure.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBlock(pub Block);

impl HermitianBlock {
    /// Wraps `m` after checking self-adjointness to `1e-12·(1 + ‖m‖)`.
    pub fn new(m: Block) -> Result<Self> {
        let dev = (m - m.adjoint()).norm();
        if dev > 1e-12 * (1.0 + m.norm()) {
            return Err(Error::Domain(format!("block is not Hermitian (deviation {dev:e})")));
        }
        Ok(Self(m))
    }

    pub fn negative_projector(&self, gap_floor: f64) -> Result<Block> {
        let d = DMatrix::from_fn(4, 4, |r, c| self.0[(r, c)]);
        let p = negative_spectral_projector(&d, gap_floor)?;
        Ok(Block::from_fn(|r, c| p[(r, c)]))
    }
}

/// Eigenvalues (unsorted) and orthonormal eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let e = m.clone().symmetric_eigen();
    (e.eigenvalues, e.eigenvectors)
}

/// `Σᵢ f(λᵢ) vᵢvᵢ*` from an eigendecomposition.
pub fn spectral_function(
    values: &DVector<f64>,
    vectors: &DMatrix<C64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<C64> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let s = C64::from(f(lam));
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    let out = &scaled * vectors.adjoint();
    hermitize(out)
}

/// `(M + M*)/2`.
pub fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj) * C64::from(0.5)
}

/// Smallest |eigenvalue| of `values`.
pub fn spectral_gap(values: &DVector<f64>) -> f64 {
    values.iter().fold(f64::INFINITY, |g, v| g.min(v.abs()))
}

/// `χ_(−∞,0)(M)`. Fails when some eigenvalue is within `gap_floor·max|λ|` of zero.
pub fn negative_spectral_projector(m: &DMatrix<C64>, gap_floor: f64) -> Result<DMatrix<C64>> {
    let (values, vectors) = hermitian_eigen(m);
    check_gap(&values, gap_floor)?;
    Ok(spectral_function(&values, &vectors, |l| if l < 0.0 { 1.0 } else { 0.0 }))
}

pub(crate) fn check_gap(values: &DVector<f64>, gap_floor: f64) -> Result<()> {
    let scale = values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let floor = gap_floor * scale.max(f64::MIN_POSITIVE);
    if let Some(&bad) = values
        .iter()
        .filter(|v| v.abs() <= floor)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
    {
        return Err(Error::NearZeroEigenvalue { eigenvalue: bad, floor });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations() {
        let id = Block::identity();
        for i in 0..3 {
            for j in 0..3 {
                let anti = alpha(i) * alpha(j) + alpha(j) * alpha(i);
                let expect = if i == j { id * C64::from(2.0) } else { Block::zeros() };
                assert!((anti - expect).norm() < 1e-15);
            }
            assert!((alpha(i) * beta() + beta() * alpha(i)).norm() < 1e-15);
        }
        assert!((beta() * beta() - id).norm() < 1e-15);
    }

    #[test]
    fn sign_examples() {
        let s = sign_of_symbol(&DiracSymbol::new([0.0; 3], 2.5)).unwrap();
        assert_eq!(s, DiracSymbol::new([0.0; 3], 1.0));
        let s = sign_of_symbol(&DiracSymbol::new([3.0, 0.0, 0.0], 4.0)).unwrap();
        assert!((s.a[0] - 0.6).abs() < 1e-15 && (s.b - 0.8).abs() < 1e-15);
        assert!(matches!(
            sign_of_symbol(&DiracSymbol::ZERO),
            Err(Error::DegenerateSymbol { .. })
        ));
    }

    #[test]
    fn trace_product_examples() {
        let b = DiracSymbol::new([0.0; 3], 1.0);
        let a1 = DiracSymbol::new([1.0, 0.0, 0.0], 0.0);
        assert_eq!(symbol_trace_product(&b, &b), 4.0);
        assert_eq!(symbol_trace_product(&a1, &b), 0.0);
    }

    #[test]
    fn projector_of_mass_term() {
        let m = DMatrix::from_fn(4, 4, |r, c| (beta() * C64::from(0.7))[(r, c)]);
        let p = negative_spectral_projector(&m, DEFAULT_GAP_FLOOR).unwrap();
        let expect = DMatrix::from_fn(4, 4, |r, c| {
            if r == c && r >= 2 {
                ONE
            } else {
                ZERO
            }
        });
        assert!((p - expect).norm() < 1e-12);
    }

    #[test]
    fn projector_rejects_kernel() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::from(-1.0),
            C64::from(0.0),
            C64::from(1.0),
            C64::from(2.0),
        ]));
        assert!(matches!(
            negative_spectral_projector(&m, DEFAULT_GAP_FLOOR),
            Err(Error::NearZeroEigenvalue { .. })
        ));
    }

    #[test]
    fn shifted_symbol_trace_product_matches_matrix() {
        let x = ShiftedSymbol { shift: 0.3, symbol: DiracSymbol::new([0.1, -0.2, 0.4], -0.5) };
        let y = ShiftedSymbol { shift: -0.7, symbol: DiracSymbol::new([0.6, 0.2, 0.1], 0.2) };
        let t = (x.matrix() * y.matrix()).trace();
        assert!((t.re - x.trace_product(&y)).abs() < 1e-14 && t.im.abs() < 1e-14);
    }
}
