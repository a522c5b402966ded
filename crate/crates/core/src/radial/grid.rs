use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};

/// How Gauss–Legendre nodes in a reference variable `u` are mapped onto (0, Λ].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridMapping {
    /// `r = u`.
    Linear,
    /// `r = s·sinh(u)`: uniform in `u` near 0 on the scale `s`, logarithmic beyond.
    Sinh { scale: f64 },
}

/// Quadrature nodes on (0, Λ] with a polynomial interpolation rule in `u`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    cutoff: f64,
    mapping: GridMapping,
    u_max: f64,
    u: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl RadialGrid {
    pub fn new(cutoff: f64, n: usize, mapping: GridMapping) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Domain(format!("cutoff must be positive, got {cutoff}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 nodes, got {n}")));
        }
        if let GridMapping::Sinh { scale } = mapping {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Domain(format!("sinh grid scale must be positive, got {scale}")));
            }
        }
        let u_max = match mapping {
            GridMapping::Linear => cutoff,
            GridMapping::Sinh { scale } => (cutoff / scale).asinh(),
        };
        let (x, w) = gauss_legendre(n);
        let h = 0.5 * u_max;
        let u: Vec<f64> = x.iter().map(|t| h * (1.0 + t)).collect();
        let bary: Vec<f64> = x
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(j, (xj, wj))| {
                let s = ((1.0 - xj * xj) * wj).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (uj, wj) in u.iter().zip(&w) {
            let (r, dr) = match mapping {
                GridMapping::Linear => (*uj, 1.0),
                GridMapping::Sinh { scale } => (scale * uj.sinh(), scale * uj.cosh()),
            };
            nodes.push(r);
            weights.push(h * wj * dr);
        }
        Ok(Self { cutoff, mapping, u_max, u, nodes, weights, bary })
    }

    /// Sinh-mapped grid with scale `m0` (the default for free-vacuum profiles).
    pub fn for_mass(cutoff: f64, n: usize, m0: f64) -> Result<Self> {
        Self::new(cutoff, n, GridMapping::Sinh { scale: m0 })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn mapping(&self) -> GridMapping {
        self.mapping
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_u(&self, r: f64) -> f64 {
        match self.mapping {
            GridMapping::Linear => r,
            GridMapping::Sinh { scale } => (r / scale).asinh(),
        }
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Lagrange basis values `ℓ_j(r)` of the node interpolant, written into `out`.
    pub fn basis_into(&self, r: f64, out: &mut [f64]) {
        let u = self.to_u(r);
        let mut total = 0.0;
        for (j, (&uj, &bj)) in self.u.iter().zip(&self.bary).enumerate() {
            let d = u - uj;
            if d == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
            let t = bj / d;
            out[j] = t;
            total += t;
        }
        out.iter_mut().for_each(|o| *o /= total);
    }

    /// Value at `r` of the polynomial (in `u`) interpolating `values` at the nodes.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let u = self.to_u(r);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&uj, &bj), &vj) in self.u.iter().zip(&self.bary).zip(values) {
            let d = u - uj;
            if d == 0.0 {
                return vj;
            }
            let t = bj / d;
            num += t * vj;
            den += t;
        }
        num / den
    }

    /// `Σ w_i f(r_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * f(*r)).sum()
    }
}

/// Nodal values on a shared grid together with the grid's interpolation rule.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.grid.interpolate(&self.values, r)
    }
}

/// Anything that can be evaluated as a function of |p|.
pub trait RadialEval {
    fn at(&self, r: f64) -> f64;
}

impl RadialEval for RadialFunction {
    fn at(&self, r: f64) -> f64 {
        self.eval(r)
    }
}

impl<F: Fn(f64) -> f64> RadialEval for F {
    fn at(&self, r: f64) -> f64 {
        self(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_ordered_and_weights_sum_to_cutoff() {
        for mapping in [GridMapping::Linear, GridMapping::Sinh { scale: 1.0 }] {
            let g = RadialGrid::new(10.0, 200, mapping).unwrap();
            assert!(g.nodes()[0] > 0.0);
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(*g.nodes().last().unwrap() <= 10.0);
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!((g.weights().iter().sum::<f64>() - 10.0).abs() < 1e-11);
        }
    }

    #[test]
    fn interpolation_is_spectral_for_smooth_functions() {
        let g = Arc::new(RadialGrid::for_mass(10.0, 120, 1.0).unwrap());
        let f = |r: f64| -r / (2.0 * (r * r + 1.0).sqrt());
        let h = RadialFunction::sample(g.clone(), f);
        for r in [1e-3, 0.37, 1.0, 2.5, 7.77, 10.0] {
            assert!((h.eval(r) - f(r)).abs() < 1e-10, "r={r}");
        }
        let mut basis = vec![0.0; g.len()];
        g.basis_into(3.3, &mut basis);
        let via_basis: f64 = basis.iter().zip(h.values()).map(|(b, v)| b * v).sum();
        assert!((via_basis - h.eval(3.3)).abs() < 1e-13);
    }
}
