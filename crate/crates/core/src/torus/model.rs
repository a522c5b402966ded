use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::convolution::Convolver;
use super::coulomb::PeriodicCoulomb;
use super::lattice::{diff, norm_sq, Lattice};
use crate::dirac::{Block, DiracSymbol, C64};
use crate::error::{check_coupling, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusParams {
    pub m0: f64,
    pub alpha: f64,
}

impl TorusParams {
    pub fn new(m0: f64, alpha: f64) -> Self {
        Self { m0, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Parameter(format!("m0 must be positive, got {}", self.m0)));
        }
        check_coupling(self.alpha)
    }
}

/// Addends of `E_L^φ(γ) = tr(D⁰γ) − αD_L(n_L, ρ_γ) + (α/2)D_L(ρ_γ, ρ_γ) − (α/2)∬|γ(x,y)|²W_L(x−y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyTerms {
    pub kinetic: f64,
    pub external: f64,
    pub direct: f64,
    pub exchange: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.kinetic + self.external + self.direct + self.exchange
    }
}

/// The Dirac–Fock model on one lattice.
///
/// One-body states are expanded on `e_k(x) = L^{−3/2}e^{ik·x} ⊗ ℂ⁴`, `k ∈ Γ`;
/// a general state is the `4|Γ| × 4|Γ|` matrix of blocks `γ̂(k,l)`. Densities are
/// stored by their coefficients `ρ̃(q) = Σ_{k−l=q} tr γ̂(k,l)`, so that
/// `ρ(x) = L⁻³Σ_q ρ̃(q)e^{iq·x}` and `D_L(f,g) = L⁻³Σ_q Ŵ(q) conj(f̃(q)) g̃(q)`.
#[derive(Clone, Debug)]
pub struct TorusModel {
    lattice: Arc<Lattice>,
    params: TorusParams,
    coulomb: PeriodicCoulomb,
    /// `ñ(k) = (2π)^{3/2} n̂(k)` on `Γ`, zero elsewhere.
    external: Option<Vec<C64>>,
    /// `Ŵ` indexed by `|n|²`.
    w_table: Vec<f64>,
    convolver: OnceLock<Arc<Convolver>>,
}

impl TorusModel {
    pub fn new(lattice: Arc<Lattice>, params: TorusParams) -> Result<Self> {
        let coulomb = PeriodicCoulomb::new(lattice.side())?;
        Self::with_coulomb(lattice, params, coulomb)
    }

    pub fn with_coulomb(
        lattice: Arc<Lattice>,
        params: TorusParams,
        coulomb: PeriodicCoulomb,
    ) -> Result<Self> {
        params.validate()?;
        if (coulomb.side() - lattice.side()).abs() > 1e-12 * lattice.side() {
            return Err(Error::Parameter("Coulomb potential and lattice disagree on L".into()));
        }
        let nmax = lattice.nmax();
        let max_sq = 12 * nmax * nmax;
        let w_table = (0..=max_sq).map(|n2| coulomb.coefficient_sq(n2)).collect();
        Ok(Self { lattice, params, coulomb, external: None, w_table, convolver: OnceLock::new() })
    }

    /// Attaches external density coefficients `ñ(k)`, one per lattice point.
    pub fn with_external(mut self, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != self.lattice.len() {
            return Err(Error::Domain(format!(
                "{} external coefficients for {} lattice points",
                coefficients.len(),
                self.lattice.len()
            )));
        }
        self.external = Some(coefficients);
        Ok(self)
    }

    pub fn without_external(&self) -> Self {
        Self { external: None, ..self.clone() }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn params(&self) -> &TorusParams {
        &self.params
    }

    pub fn coulomb(&self) -> &PeriodicCoulomb {
        &self.coulomb
    }

    pub fn external(&self) -> Option<&[C64]> {
        self.external.as_deref()
    }

    pub fn dim(&self) -> usize {
        4 * self.lattice.len()
    }

    /// `Ŵ(k − l)` for lattice indices.
    pub fn w_between(&self, k: usize, l: usize) -> f64 {
        let p = self.lattice.points();
        self.w_table[norm_sq(diff(p[k], p[l])) as usize]
    }

    /// FFT convolution by `Ŵ` on the lattice, built on first use.
    pub(crate) fn convolver(&self) -> &Convolver {
        self.convolver.get_or_init(|| Arc::new(Convolver::new(&self.lattice, |n2| self.w_table[n2 as usize])))
    }

    pub fn w_of(&self, n: [i32; 3]) -> f64 {
        self.w_table[norm_sq(n) as usize]
    }

    /// `L⁻³`.
    pub fn inv_volume(&self) -> f64 {
        self.lattice.side().powi(-3)
    }

    /// `D⁰(k) = α·k + m0β`.
    pub fn free_symbol(&self, k: usize) -> DiracSymbol {
        DiracSymbol::free(self.lattice.momentum(k), self.params.m0)
    }

    /// Density coefficients over the difference set `Γ − Γ`.
    pub fn density(&self, gamma: &DMatrix<C64>) -> DensityCoefficients {
        let n = self.lattice.len();
        let mut rho = DensityCoefficients::zeros(self.lattice.nmax());
        let p = self.lattice.points();
        for k in 0..n {
            for l in 0..n {
                let mut t = C64::new(0.0, 0.0);
                for s in 0..4 {
                    t += gamma[(4 * k + s, 4 * l + s)];
                }
                *rho.get_mut(diff(p[k], p[l])) += t;
            }
        }
        rho
    }

    /// External coefficients over the difference set.
    pub fn external_density(&self) -> DensityCoefficients {
        let mut out = DensityCoefficients::zeros(self.lattice.nmax());
        if let Some(ext) = &self.external {
            for (i, p) in self.lattice.points().iter().enumerate() {
                *out.get_mut(*p) = ext[i];
            }
        }
        out
    }

    /// `D_L(f, g)`.
    pub fn coulomb_pairing(&self, f: &DensityCoefficients, g: &DensityCoefficients) -> f64 {
        let mut s = 0.0;
        for (q, fq) in f.iter() {
            let gq = g.get(q);
            if fq.norm_sqr() == 0.0 || gq.norm_sqr() == 0.0 {
                continue;
            }
            s += self.w_of(q) * (fq.conj() * gq).re;
        }
        s * self.inv_volume()
    }

    /// `∬|γ(x,y)|²W_L(x−y) = L⁻³Σ_{k,l,c} Ŵ(c) tr(γ̂(k,l) γ̂(k+c,l+c)*)`.
    pub fn exchange_pairing(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        let n = self.lattice.len();
        let p = self.lattice.points();
        let mut s = 0.0;
        for k in 0..n {
            for kp in 0..n {
                let c = diff(p[kp], p[k]);
                let w = self.w_of(c);
                for l in 0..n {
                    let lp = [p[l][0] + c[0], p[l][1] + c[1], p[l][2] + c[2]];
                    if let Some(lp) = self.lattice.index_of(lp) {
                        let mut t = 0.0;
                        for i in 0..4 {
                            for j in 0..4 {
                                t += (a[(4 * k + i, 4 * l + j)]
                                    * b[(4 * kp + i, 4 * lp + j)].conj())
                                .re;
                            }
                        }
                        s += w * t;
                    }
                }
            }
        }
        s * self.inv_volume()
    }

    /// Energy addends of a general state; `γ` must be Hermitian of dimension `4|Γ|`.
    pub fn energy_terms(&self, gamma: &DMatrix<C64>) -> EnergyTerms {
        let alpha = self.params.alpha;
        let n = self.lattice.len();
        let mut kinetic = 0.0;
        for k in 0..n {
            let d0 = self.free_symbol(k).matrix();
            let g: Block = gamma.fixed_view::<4, 4>(4 * k, 4 * k).into_owned();
            kinetic += (d0 * g).trace().re;
        }
        let rho = self.density(gamma);
        let ext = self.external_density();
        EnergyTerms {
            kinetic,
            external: -alpha * self.coulomb_pairing(&ext, &rho),
            direct: 0.5 * alpha * self.coulomb_pairing(&rho, &rho),
            exchange: -0.5 * alpha * self.exchange_pairing(gamma, gamma),
        }
    }

    pub fn energy(&self, gamma: &DMatrix<C64>) -> f64 {
        self.energy_terms(gamma).total()
    }

    /// Central difference of `t ↦ E(γ + tΔ)` at `t = 0` and `Re tr(𝒟[γ]Δ)`.
    pub fn directional_derivative(&self, gamma: &DMatrix<C64>, delta: &DMatrix<C64>, h: f64) -> (f64, f64) {
        let step = delta * C64::from(h);
        let fd = (self.energy(&(gamma + &step)) - self.energy(&(gamma - &step))) / (2.0 * h);
        let d = self.mean_field(gamma);
        (fd, d.iter().zip(delta.iter()).map(|(x, y)| (x.conj() * y).re).sum())
    }

    /// `𝒟̂(k,l) = D⁰(k)δ_kl + αL⁻³Ŵ(k−l)(ρ̃(k−l) − ñ(k−l)) − αL⁻³Σ_c Ŵ(c)γ̂(k+c,l+c)`,
    /// the gradient of the energy: `dE = Re tr(𝒟 dγ)`.
    pub fn mean_field(&self, gamma: &DMatrix<C64>) -> DMatrix<C64> {
        let alpha = self.params.alpha;
        let n = self.lattice.len();
        let p = self.lattice.points();
        let iv = self.inv_volume();
        let rho = self.density(gamma);
        let ext = self.external_density();
        let mut out = DMatrix::<C64>::zeros(4 * n, 4 * n);
        for k in 0..n {
            let d0 = self.free_symbol(k).matrix();
            out.fixed_view_mut::<4, 4>(4 * k, 4 * k).copy_from(&d0);
        }
        for k in 0..n {
            for l in 0..n {
                let q = diff(p[k], p[l]);
                let v = (rho.get(q) - ext.get(q)) * (alpha * iv * self.w_of(q));
                for s in 0..4 {
                    out[(4 * k + s, 4 * l + s)] += v;
                }
            }
        }
        for k in 0..n {
            for kp in 0..n {
                let c = diff(p[kp], p[k]);
                let w = alpha * iv * self.w_of(c);
                for l in 0..n {
                    let lp = [p[l][0] + c[0], p[l][1] + c[1], p[l][2] + c[2]];
                    if let Some(lp) = self.lattice.index_of(lp) {
                        for i in 0..4 {
                            for j in 0..4 {
                                out[(4 * k + i, 4 * l + j)] -= gamma[(4 * kp + i, 4 * lp + j)] * w;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal matrix with the given blocks.
    pub fn block_diagonal(&self, blocks: &[Block]) -> DMatrix<C64> {
        let n = self.lattice.len();
        let mut m = DMatrix::<C64>::zeros(4 * n, 4 * n);
        for (k, b) in blocks.iter().enumerate() {
            m.fixed_view_mut::<4, 4>(4 * k, 4 * k).copy_from(b);
        }
        m
    }

    /// Frobenius norm of everything outside the diagonal blocks.
    pub fn off_diagonal_norm(&self, m: &DMatrix<C64>) -> f64 {
        let mut s = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i / 4 != j / 4 {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

/// Coefficients `f̃(q)` for `q` in the box `[−2n_max, 2n_max]³` of lattice differences.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCoefficients {
    reach: i32,
    values: Vec<C64>,
}

impl DensityCoefficients {
    pub fn zeros(nmax: i32) -> Self {
        let reach = 2 * nmax;
        let s = (2 * reach + 1) as usize;
        Self { reach, values: vec![C64::new(0.0, 0.0); s * s * s] }
    }

    fn cell(&self, q: [i32; 3]) -> Option<usize> {
        if q.iter().any(|c| c.abs() > self.reach) {
            return None;
        }
        let s = 2 * self.reach + 1;
        Some((((q[0] + self.reach) * s + (q[1] + self.reach)) * s + (q[2] + self.reach)) as usize)
    }

    pub fn get(&self, q: [i32; 3]) -> C64 {
        self.cell(q).map_or(C64::new(0.0, 0.0), |i| self.values[i])
    }

    pub fn get_mut(&mut self, q: [i32; 3]) -> &mut C64 {
        let i = self.cell(q).expect("difference vector within reach");
        &mut self.values[i]
    }

    /// Non-zero entries as `(q, f̃(q))`.
    pub fn iter(&self) -> impl Iterator<Item = ([i32; 3], C64)> + '_ {
        let s = 2 * self.reach + 1;
        let r = self.reach;
        self.values.iter().enumerate().filter(|(_, v)| v.norm_sqr() > 0.0).map(move |(i, v)| {
            let i = i as i32;
            ([i / (s * s) - r, (i / s) % s - r, i % s - r], *v)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
