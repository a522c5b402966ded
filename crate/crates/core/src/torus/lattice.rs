use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default cap on `|Γ|` for lattices used with dense algebra.
pub const DEFAULT_LATTICE_CAP: usize = 4096;

/// Cap on `|Γ|` for lattices used only with translation-invariant states.
pub const TI_LATTICE_CAP: usize = 1 << 20;

/// Momentum lattice `Γ = (2π/L)ℤ³ ∩ B(0,Λ)`, boundary included.
///
/// Points are stored as integer vectors `n` with `k = (2π/L)n`, sorted
/// lexicographically.
#[derive(Clone, Debug)]
pub struct Lattice {
    side: f64,
    cutoff: f64,
    points: Vec<[i32; 3]>,
    nmax: i32,
    lookup: Vec<Option<usize>>,
}

impl Lattice {
    pub fn new(side: f64, cutoff: f64) -> Result<Self> {
        Self::with_cap(side, cutoff, DEFAULT_LATTICE_CAP)
    }

    pub fn with_cap(side: f64, cutoff: f64, cap: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Parameter(format!("box side must be positive, got {side}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Parameter(format!("cutoff must be positive, got {cutoff}")));
        }
        let radius = cutoff * side / (2.0 * PI);
        let r2 = radius * radius * (1.0 + 1e-12);
        let nmax = radius.floor() as i32;
        let count = estimate_count(radius);
        if count > 4 * cap + 64 {
            return Err(Error::LatticeTooLarge { size: count, cap });
        }
        let mut points = Vec::new();
        for x in -nmax..=nmax {
            for y in -nmax..=nmax {
                for z in -nmax..=nmax {
                    if f64::from(x * x + y * y + z * z) <= r2 {
                        points.push([x, y, z]);
                    }
                }
            }
        }
        if points.len() > cap {
            return Err(Error::LatticeTooLarge { size: points.len(), cap });
        }
        let side_len = (2 * nmax + 1) as usize;
        let mut lookup = vec![None; side_len.pow(3)];
        for (i, p) in points.iter().enumerate() {
            lookup[cell(*p, nmax)] = Some(i);
        }
        Ok(Self { side, cutoff, points, nmax, lookup })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[i32; 3]] {
        &self.points
    }

    /// `2π/L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.side
    }

    /// Largest `|n_i|` over the lattice.
    pub fn nmax(&self) -> i32 {
        self.nmax
    }

    pub fn momentum(&self, i: usize) -> [f64; 3] {
        let h = self.spacing();
        let p = self.points[i];
        [h * f64::from(p[0]), h * f64::from(p[1]), h * f64::from(p[2])]
    }

    pub fn momentum_norm(&self, i: usize) -> f64 {
        let p = self.points[i];
        self.spacing() * f64::from(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    pub fn index_of(&self, n: [i32; 3]) -> Option<usize> {
        if n.iter().any(|c| c.abs() > self.nmax) {
            return None;
        }
        self.lookup[cell(n, self.nmax)]
    }

    /// Index of `−k`.
    pub fn negated(&self, i: usize) -> usize {
        let p = self.points[i];
        self.index_of([-p[0], -p[1], -p[2]]).expect("lattice is symmetric")
    }

    /// Index of `k = 0`.
    pub fn origin(&self) -> usize {
        self.index_of([0, 0, 0]).expect("origin is always present")
    }

    /// `ρ_Λ^L = 2|Γ|/L³`.
    pub fn rho_half(&self) -> f64 {
        2.0 * self.len() as f64 / self.side.powi(3)
    }
}

fn cell(n: [i32; 3], nmax: i32) -> usize {
    let s = 2 * nmax + 1;
    (((n[0] + nmax) * s + (n[1] + nmax)) * s + (n[2] + nmax)) as usize
}

fn estimate_count(radius: f64) -> usize {
    (4.0 / 3.0 * PI * (radius + 1.0).powi(3)).ceil() as usize
}

/// Difference of two integer lattice vectors.
pub fn diff(a: [i32; 3], b: [i32; 3]) -> [i32; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm_sq(n: [i32; 3]) -> i32 {
    n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lattices_enumerate_exactly() {
        let l = Lattice::new(2.0 * PI, 0.5).unwrap();
        assert_eq!(l.len(), 1);
        let l = Lattice::new(2.0 * PI, 1.2).unwrap();
        assert_eq!(l.len(), 7);
        let l = Lattice::new(2.0 * PI, 1.5).unwrap();
        assert_eq!(l.len(), 19, "|k| = √2 lies inside the ball");
        let l = Lattice::new(2.0 * PI, 1.0).unwrap();
        assert_eq!(l.len(), 7, "boundary |k| = Λ is included");
    }

    #[test]
    fn closed_under_negation_and_indexed() {
        let l = Lattice::new(7.3, 4.1).unwrap();
        for i in 0..l.len() {
            assert_eq!(l.index_of(l.points()[i]), Some(i));
            let j = l.negated(i);
            assert_eq!(l.negated(j), i);
        }
        assert_eq!(l.points()[l.origin()], [0, 0, 0]);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(Lattice::with_cap(20.0, 10.0, 100), Err(Error::LatticeTooLarge { .. })));
    }
}
