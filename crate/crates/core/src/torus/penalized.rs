//! Translation-invariant minimization for the Hamiltonian without the
//! commutator in the density, where `0 ≤ Θ ≤ I` and the direct term
//! `(α/2)μL⁵ρ_Θ²` acts as a penalization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::model::TorusModel;
use crate::dirac::{DiracSymbol, ShiftedSymbol};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenalizedOptions {
    /// Stop once the Frank–Wolfe gap is below `tol·(1 + |E|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PenalizedOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct PenalizedSolution {
    /// `Θ(k) = s_k I + α·a_k + b_kβ`.
    pub blocks: Vec<ShiftedSymbol>,
    pub energy: f64,
    /// `ρ_Θ = L⁻³Σ_k tr Θ(k)`.
    pub rho: f64,
    /// `‖ξ_L‖_∞ = (2π)^{3/2}L⁻³‖Σ_k Θ(k)‖_HS` (attained at `x = 0` since `Θ ≥ 0`).
    pub xi_sup: f64,
    pub gap: f64,
    pub iterations: usize,
}

const MIN_STEP: f64 = 1e-12;
const MAX_STEP: f64 = 1e12;

impl TorusModel {
    /// `tr(D⁰Θ) + (α/2)μL⁵ρ² − (α/2)L⁻³Σ_{k,l}Ŵ(k−l) tr(Θ(k)Θ(l))`.
    pub fn penalized_energy(&self, blocks: &[ShiftedSymbol]) -> f64 {
        let (lin, quad) = self.penalized_parts(blocks, blocks);
        lin + 0.5 * quad
    }

    /// Linear part of `blocks` and the symmetric quadratic form `q(x, y)`.
    fn penalized_parts(&self, x: &[ShiftedSymbol], y: &[ShiftedSymbol]) -> (f64, f64) {
        let alpha = self.params().alpha;
        let l = self.lattice().side();
        let mu = self.coulomb().mu();
        let lin: f64 = (0..x.len()).map(|k| self.free_symbol(k).trace_product(&x[k].symbol)).sum();
        let tx: f64 = x.iter().map(|b| b.trace()).sum();
        let ty: f64 = y.iter().map(|b| b.trace()).sum();
        let direct = alpha * mu * l.powi(5) * (tx / l.powi(3)) * (ty / l.powi(3));
        let conv = self.shifted_convolution(y);
        let ex: f64 = x.iter().zip(&conv).map(|(a, b)| a.trace_product(b)).sum();
        (lin, direct - alpha * ex)
    }

    /// `L⁻³Σ_l Ŵ(k−l)Θ(l)`.
    fn shifted_convolution(&self, blocks: &[ShiftedSymbol]) -> Vec<ShiftedSymbol> {
        let iv = self.inv_volume();
        let values: Vec<[f64; 5]> = blocks
            .iter()
            .map(|b| [b.shift, b.symbol.a[0], b.symbol.a[1], b.symbol.a[2], b.symbol.b])
            .collect();
        self.convolver()
            .apply(&values)
            .iter()
            .map(|c| ShiftedSymbol { shift: iv * c[0], symbol: DiracSymbol::new([c[1], c[2], c[3]], c[4]).scale(iv) })
            .collect()
    }

    /// Gradient `G(k) = D⁰(k) + αμL²ρ − αL⁻³Σ_l Ŵ(k−l)Θ(l)`.
    fn penalized_gradient(&self, blocks: &[ShiftedSymbol]) -> Vec<ShiftedSymbol> {
        let alpha = self.params().alpha;
        let l = self.lattice().side();
        let rho = blocks.iter().map(|b| b.trace()).sum::<f64>() / l.powi(3);
        let shift = alpha * self.coulomb().mu() * l * l * rho;
        self.shifted_convolution(blocks)
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let free = ShiftedSymbol { shift, symbol: self.free_symbol(k) };
                free.axpy(-alpha, c)
            })
            .collect()
    }

    /// Spectral projected gradient over TI states `0 ≤ Θ(k) ≤ I` of the form
    /// `s I + α·a + bβ`, started from `Θ = 0`.
    ///
    /// Steps use the Barzilai–Borwein length, the blockwise eigen-clip
    /// projection and an exact line search along the projected direction, which
    /// is feasible since the constraint set is convex and the energy quadratic.
    /// The Frank–Wolfe gap `max_Θ' Σ_k tr(G(k)(Θ(k) − Θ'(k)))` certifies stationarity.
    pub fn minimize_penalized(&self, opts: &PenalizedOptions) -> Result<PenalizedSolution> {
        if self.external().is_some() {
            return Err(Error::Parameter("penalized minimization is defined for n = 0".into()));
        }
        let n = self.lattice().len();
        let mut theta = vec![ShiftedSymbol::default(); n];
        let mut grad = self.penalized_gradient(&theta);
        let mut step = 1.0 / self.params().m0;
        let mut history = Vec::new();
        for it in 0..opts.max_iter {
            let gap: f64 = grad
                .iter()
                .zip(&theta)
                .map(|(g, t)| g.trace_product(&t.axpy(-1.0, &negative_part_projector(g))))
                .sum();
            let energy = self.penalized_energy(&theta);
            history.push(gap);
            if gap <= opts.tol * (1.0 + energy.abs()) {
                return Ok(self.penalized_solution(theta, gap, it));
            }
            let dir: Vec<ShiftedSymbol> = theta
                .iter()
                .zip(&grad)
                .map(|(t, g)| clip_to_unit_interval(&t.axpy(-step, g)).axpy(-1.0, t))
                .collect();
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g.trace_product(d)).sum();
            if slope >= 0.0 {
                return Err(Error::StepSize(step));
            }
            let (_, curvature) = self.penalized_parts(&dir, &dir);
            let t = if curvature > 0.0 { (-slope / curvature).min(1.0) } else { 1.0 };
            for (th, d) in theta.iter_mut().zip(&dir) {
                *th = th.axpy(t, d);
            }
            let next = self.penalized_gradient(&theta);
            let ss: f64 = dir.iter().map(|d| d.trace_product(d)).sum::<f64>() * t * t;
            let sy: f64 = dir
                .iter()
                .zip(next.iter().zip(&grad))
                .map(|(d, (a, b))| d.trace_product(&a.axpy(-1.0, b)))
                .sum::<f64>()
                * t;
            step = if sy > 0.0 { (ss / sy).clamp(MIN_STEP, MAX_STEP) } else { MAX_STEP };
            grad = next;
        }
        Err(Error::NonConvergence {
            what: "penalized projected gradient",
            iterations: history.len(),
            residuals: history,
        })
    }

    fn penalized_solution(&self, blocks: Vec<ShiftedSymbol>, gap: f64, iterations: usize) -> PenalizedSolution {
        let l = self.lattice().side();
        let rho = blocks.iter().map(|b| b.trace()).sum::<f64>() / l.powi(3);
        let total = blocks.iter().fold(ShiftedSymbol::default(), |acc, b| acc.axpy(1.0, b));
        let xi_sup = (2.0 * PI).powf(1.5) / l.powi(3) * total.trace_product(&total).sqrt();
        PenalizedSolution { energy: self.penalized_energy(&blocks), blocks, rho, xi_sup, gap, iterations }
    }
}

/// Projection of `sI + v` onto `0 ≤ Θ ≤ I` by clipping its eigenvalues `s ± |v|`.
fn clip_to_unit_interval(x: &ShiftedSymbol) -> ShiftedSymbol {
    let norm = x.symbol.norm();
    let hi = (x.shift + norm).clamp(0.0, 1.0);
    let lo = (x.shift - norm).clamp(0.0, 1.0);
    let symbol = if norm > 0.0 { x.symbol.scale(0.5 * (hi - lo) / norm) } else { DiracSymbol::ZERO };
    ShiftedSymbol { shift: 0.5 * (hi + lo), symbol }
}

/// `χ_(−∞,0)(sI + v)` for a shifted symbol with eigenvalues `s ± |v|`.
fn negative_part_projector(g: &ShiftedSymbol) -> ShiftedSymbol {
    let norm = g.symbol.norm();
    if g.shift + norm < 0.0 {
        ShiftedSymbol { shift: 1.0, symbol: DiracSymbol::ZERO }
    } else if g.shift - norm < 0.0 {
        ShiftedSymbol { shift: 0.5, symbol: g.symbol.scale(-0.5 / norm) }
    } else {
        ShiftedSymbol::default()
    }
}
