use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::model::{EnergyTerms, TorusModel};
use crate::dirac::{DiracSymbol, C64};
use crate::error::{Error, Result};

/// A translation-invariant trace-free state: one symbol `f(k) = α·a_k + b_kβ` per lattice point.
#[derive(Clone, Debug)]
pub struct TIState {
    pub lattice: Arc<Lattice>,
    pub symbols: Vec<DiracSymbol>,
}

impl TIState {
    /// Fails when some `|f(k)| > ½ + slack`, i.e. `−½ ≤ f(k) ≤ ½` is violated.
    pub fn check_admissible(&self, slack: f64) -> Result<()> {
        let (index, worst) = self
            .symbols
            .iter()
            .map(|s| s.norm() - 0.5)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if worst > slack {
            return Err(Error::Constraint { what: "translation-invariant state".into(), worst, index });
        }
        Ok(())
    }

    /// `sup_k ‖f(k) − g(k)‖` in the symbol norm `√(|Δa|² + Δb²)`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.symbols.iter().zip(&other.symbols).map(|(a, b)| a.sub(b).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiOptions {
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TiOptions {
    fn default() -> Self {
        Self { mixing: 0.5, tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct TISolution {
    pub state: TIState,
    /// Mean-field symbols `𝒟_L(k)` at the solution.
    pub mean_field: Vec<DiracSymbol>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `min_k (|𝒟_L(k)|² − |k|² − m0²/4)`.
    pub gap_margin: f64,
}

impl TorusModel {
    pub fn free_dirac_state(&self) -> TIState {
        let symbols = (0..self.lattice().len())
            .map(|k| {
                let d = self.free_symbol(k);
                d.scale(-0.5 / d.norm())
            })
            .collect();
        TIState { lattice: self.lattice().clone(), symbols }
    }

    /// Energy addends of a TI state; direct and external terms vanish for trace-free blocks.
    pub fn ti_energy_terms(&self, state: &TIState) -> EnergyTerms {
        let n = self.lattice().len();
        let kinetic: f64 = (0..n).map(|k| self.free_symbol(k).trace_product(&state.symbols[k])).sum();
        let conv = self.ti_exchange_convolution(&state.symbols);
        let ex: f64 = (0..n).map(|k| state.symbols[k].trace_product(&conv[k])).sum();
        EnergyTerms { kinetic, external: 0.0, direct: 0.0, exchange: -0.5 * self.params().alpha * ex }
    }

    pub fn ti_energy(&self, state: &TIState) -> f64 {
        self.ti_energy_terms(state).total()
    }

    /// `L⁻³ Σ_l Ŵ(k−l) f(l)` for every `k`.
    pub fn ti_exchange_convolution(&self, symbols: &[DiracSymbol]) -> Vec<DiracSymbol> {
        let iv = self.inv_volume();
        let values: Vec<[f64; 4]> = symbols.iter().map(|s| [s.a[0], s.a[1], s.a[2], s.b]).collect();
        self.convolver()
            .apply(&values)
            .iter()
            .map(|c| DiracSymbol::new([c[0], c[1], c[2]], c[3]).scale(iv))
            .collect()
    }

    /// `𝒟_L(k) = D⁰(k) − αL⁻³Σ_l Ŵ(k−l) f(l)`.
    pub fn ti_mean_field(&self, state: &TIState) -> Vec<DiracSymbol> {
        let conv = self.ti_exchange_convolution(&state.symbols);
        let alpha = self.params().alpha;
        conv.iter().enumerate().map(|(k, c)| self.free_symbol(k).axpy(-alpha, c)).collect()
    }

    /// The TI state as a block-diagonal general state.
    pub fn ti_to_general(&self, state: &TIState) -> DMatrix<C64> {
        let blocks: Vec<_> = state.symbols.iter().map(|s| s.matrix()).collect();
        self.block_diagonal(&blocks)
    }

    /// Per-mode fixed point `f(k) = −𝒟_L(k)/(2|𝒟_L(k)|)` with linear mixing,
    /// started from the free Dirac state.
    pub fn solve_ti(&self, opts: &TiOptions) -> Result<TISolution> {
        if self.external().is_some() {
            return Err(Error::Parameter(
                "the translation-invariant solver needs a model without external density".into(),
            ));
        }
        if !(opts.mixing > 0.0 && opts.mixing <= 1.0) || !(opts.tol > 0.0) {
            return Err(Error::Parameter("mixing must lie in (0, 1] and tol be positive".into()));
        }
        let mut state = self.free_dirac_state();
        let mut history = Vec::new();
        for it in 1..=opts.max_iter {
            let field = self.ti_mean_field(&state);
            let next = TIState {
                lattice: state.lattice.clone(),
                symbols: field.iter().map(|d| d.sign().map(|s| s.scale(-0.5))).collect::<Result<_>>()?,
            };
            let residual = next.sup_distance(&state);
            history.push(residual);
            if residual <= opts.tol {
                let mean_field = self.ti_mean_field(&next);
                let m0 = self.params().m0;
                let gap_margin = (0..mean_field.len())
                    .map(|k| {
                        mean_field[k].norm_sq() - self.lattice().momentum_norm(k).powi(2) - m0 * m0 / 4.0
                    })
                    .fold(f64::INFINITY, f64::min);
                return Ok(TISolution {
                    energy: self.ti_energy(&next),
                    state: next,
                    mean_field,
                    residual,
                    iterations: it,
                    residual_history: history,
                    gap_margin,
                });
            }
            for (s, t) in state.symbols.iter_mut().zip(&next.symbols) {
                *s = s.axpy(opts.mixing, &t.sub(s));
            }
        }
        Err(Error::NonConvergence {
            what: "torus translation-invariant fixed point",
            iterations: history.len(),
            residuals: history,
        })
    }
}

/// `E = −2m0 − αμ/(2L)`: the minimum over single-mode states `f(0) = α·a + bβ`, `|(a,b)| ≤ ½`.
pub fn single_mode_energy(m0: f64, alpha: f64, mu: f64, side: f64) -> f64 {
    -2.0 * m0 - alpha * mu / (2.0 * side)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(side: f64, cutoff: f64, alpha: f64) -> TorusModel {
        TorusModel::new(Arc::new(Lattice::new(side, cutoff).unwrap()), super::super::model::TorusParams::new(1.0, alpha))
            .unwrap()
    }

    #[test]
    fn free_case_converges_in_one_step() {
        let m = model(4.0, 4.0, 0.0);
        let sol = m.solve_ti(&TiOptions { mixing: 1.0, ..TiOptions::default() }).unwrap();
        assert_eq!(sol.iterations, 1);
        for (k, f) in sol.state.symbols.iter().enumerate() {
            let expected = m.free_symbol(k).sign().unwrap().scale(-0.5);
            assert!(f.sub(&expected).norm() < 1e-15);
        }
    }

    #[test]
    fn single_mode_matches_closed_form() {
        let m = model(2.0, 1.0, 1.0);
        assert_eq!(m.lattice().len(), 1);
        let sol = m.solve_ti(&TiOptions::default()).unwrap();
        let mu = m.coulomb().mu();
        assert!((sol.energy - single_mode_energy(1.0, 1.0, mu, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn fft_mean_field_matches_dense_assembly() {
        let m = model(6.0, 3.0, 0.8);
        let sol = m.solve_ti(&TiOptions::default()).unwrap();
        let gamma = m.ti_to_general(&sol.state);
        let blocks: Vec<_> = sol.mean_field.iter().map(DiracSymbol::matrix).collect();
        let diff = m.mean_field(&gamma) - m.block_diagonal(&blocks);
        assert!(diff.norm() < 1e-10, "{}", diff.norm());
        assert!((m.energy(&gamma) - sol.energy).abs() < 1e-10);
    }
}
