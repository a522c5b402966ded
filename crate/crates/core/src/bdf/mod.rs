//! The Bogoliubov–Dirac–Fock energy relative to the self-consistent vacuum,
//! discretized on a torus lattice.
//!
//! The reference vacuum is the translation-invariant minimizer `γ⁰` on the
//! same lattice, with projector `𝒫⁰₋ = γ⁰ + ½` and mean field `𝒟⁰`. A state is
//! `Q = P − 𝒫⁰₋` with `0 ≤ P ≤ I`, and
//!
//! `E(Q) = tr(𝒟⁰Q) − αD(ρ_Q, n) + (α/2)D(ρ_Q, ρ_Q) − (α/2)∬|Q(x,y)|²W_L(x−y)`,
//!
//! which equals `E_L^φ(γ⁰ + Q) − E_L^0(γ⁰)` identically.

mod external;
mod thermo;
mod uniqueness;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use external::{coulomb_inner, ExternalDensity, Table};
pub use thermo::{thermo_difference, ThermoOptions, ThermoRow};
pub use uniqueness::{uniqueness_condition_check, UniquenessCheck};

use crate::dirac::{hermitian_eigen, hermitize, negative_spectral_projector, spectral_gap, C64, DEFAULT_GAP_FLOOR};
use crate::error::{Error, Result};
use crate::torus::{
    random_admissible_state, DensityCoefficients, Lattice, TISolution, TiOptions, TorusModel, TorusParams,
};

/// Slack for the operator inequality `−𝒫⁰₋ ≤ Q ≤ 𝒫⁰₊`.
pub const CONSTRAINT_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BdfOptions {
    /// Weight of the new projector in `P ← (1−θ)P + θχ(𝒟̄ < 0)`.
    pub mixing: f64,
    /// Stop once `‖P − χ_(−∞,0)(𝒟̄[P])‖_F ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative gap floor below which `𝒟̄` counts as having a zero eigenvalue.
    pub gap_floor: f64,
    pub reference: TiOptions,
}

impl Default for BdfOptions {
    fn default() -> Self {
        Self { mixing: 0.3, tol: 1e-8, max_iter: 300, gap_floor: DEFAULT_GAP_FLOOR, reference: TiOptions::default() }
    }
}

/// Addends of the BDF energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BdfEnergyTerms {
    pub linear: f64,
    pub external: f64,
    pub direct: f64,
    pub exchange: f64,
}

impl BdfEnergyTerms {
    pub fn total(&self) -> f64 {
        self.linear + self.external + self.direct + self.exchange
    }
}

/// The BDF functional on one lattice, with its reference vacuum.
#[derive(Clone, Debug)]
pub struct BdfModel {
    torus: TorusModel,
    reference: TISolution,
    p0_minus: DMatrix<C64>,
    d0: DMatrix<C64>,
}

/// The polarized vacuum `Q̄ = P̄ − 𝒫⁰₋` with its diagnostics.
#[derive(Clone, Debug)]
pub struct PolarizedVacuum {
    pub q: DMatrix<C64>,
    /// `P̄ = χ_(−∞,0)(𝒟̄)`.
    pub projector: DMatrix<C64>,
    pub mean_field: DMatrix<C64>,
    pub energy: f64,
    pub terms: BdfEnergyTerms,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Largest block difference between the `γ̄`- and `Q`-assemblies of `𝒟̄`, per iterate.
    pub reference_deviation: Vec<f64>,
    /// `tr_{𝒫⁰₋}Q̄ = tr(𝒫⁰₊Q̄𝒫⁰₊) + tr(𝒫⁰₋Q̄𝒫⁰₋)`.
    pub charge: f64,
    /// Smallest `|λ|` over the spectrum of `𝒟̄`.
    pub gap: f64,
    /// `‖[𝒟̄, P̄]‖_F`, the gradient norm along the tangent directions `i[A, P̄]`.
    pub projected_gradient: f64,
}

impl BdfModel {
    /// Solves the reference vacuum on `lattice` and attaches `n` (or none).
    pub fn new(
        lattice: Arc<Lattice>,
        params: TorusParams,
        density: Option<&ExternalDensity>,
        reference: &TiOptions,
    ) -> Result<Self> {
        let free = TorusModel::new(lattice.clone(), params)?;
        let reference = free.solve_ti(reference)?;
        let torus = match density {
            Some(n) => free.with_external(n.lattice_coefficients(&lattice))?,
            None => free,
        };
        let p0_blocks: Vec<_> = reference
            .state
            .symbols
            .iter()
            .map(|s| s.matrix() + crate::dirac::Block::identity() * C64::from(0.5))
            .collect();
        let d0_blocks: Vec<_> = reference.mean_field.iter().map(|s| s.matrix()).collect();
        let p0_minus = torus.block_diagonal(&p0_blocks);
        let d0 = torus.block_diagonal(&d0_blocks);
        Ok(Self { torus, reference, p0_minus, d0 })
    }

    pub fn torus(&self) -> &TorusModel {
        &self.torus
    }

    pub fn reference(&self) -> &TISolution {
        &self.reference
    }

    /// `𝒫⁰₋` as a block-diagonal matrix.
    pub fn p0_minus(&self) -> &DMatrix<C64> {
        &self.p0_minus
    }

    /// `𝒟⁰` as a block-diagonal matrix.
    pub fn reference_mean_field(&self) -> &DMatrix<C64> {
        &self.d0
    }

    pub fn dim(&self) -> usize {
        self.torus.dim()
    }

    /// `ρ_Q` in coefficient form.
    pub fn density_of_operator(&self, q: &DMatrix<C64>) -> DensityCoefficients {
        self.torus.density(q)
    }

    /// Lattice `D_L(f, g)`.
    pub fn coulomb_inner(&self, f: &DensityCoefficients, g: &DensityCoefficients) -> f64 {
        self.torus.coulomb_pairing(f, g)
    }

    /// `D_L(n_L, n_L)`.
    pub fn external_coulomb_energy(&self) -> f64 {
        let n = self.torus.external_density();
        self.torus.coulomb_pairing(&n, &n)
    }

    /// Fails with the most violated eigenvalue of `Q + 𝒫⁰₋` outside `[0, 1]`.
    pub fn check_admissible(&self, q: &DMatrix<C64>, slack: f64) -> Result<()> {
        let (values, _) = hermitian_eigen(&hermitize(q + &self.p0_minus));
        let (index, worst) = values
            .iter()
            .map(|&v| (-v).max(v - 1.0))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if worst > slack {
            return Err(Error::Constraint { what: "−𝒫⁰₋ ≤ Q ≤ 𝒫⁰₊".into(), worst, index });
        }
        Ok(())
    }

    pub fn energy_terms(&self, q: &DMatrix<C64>) -> BdfEnergyTerms {
        let alpha = self.torus.params().alpha;
        let rho = self.torus.density(q);
        let n = self.torus.external_density();
        BdfEnergyTerms {
            linear: real_inner(&self.d0, q),
            external: -alpha * self.torus.coulomb_pairing(&rho, &n),
            direct: 0.5 * alpha * self.torus.coulomb_pairing(&rho, &rho),
            exchange: -0.5 * alpha * self.torus.exchange_pairing(q, q),
        }
    }

    /// The BDF energy of an admissible `Q`. Also asserts `E(Q) + (α/2)D_L(n,n) ≥ 0`.
    pub fn bdf_energy(&self, q: &DMatrix<C64>) -> Result<f64> {
        self.check_admissible(q, CONSTRAINT_SLACK)?;
        let e = self.energy_terms(q).total();
        let bound = e + 0.5 * self.torus.params().alpha * self.external_coulomb_energy();
        if bound < -1e-10 * (1.0 + e.abs()) {
            return Err(Error::Constraint { what: "E_BDF(Q) + (α/2)D(n,n) ≥ 0".into(), worst: bound, index: 0 });
        }
        Ok(e)
    }

    /// `𝒟̄ = 𝒟⁰ + α(ρ_Q − n)∗W_L − αQ(x,y)W_L(x−y)`, assembled from `Q`.
    pub fn mean_field(&self, q: &DMatrix<C64>) -> DMatrix<C64> {
        let mut m = self.torus.mean_field(q);
        for k in 0..self.torus.lattice().len() {
            let free = self.torus.free_symbol(k).matrix();
            let mut block = m.fixed_view_mut::<4, 4>(4 * k, 4 * k);
            block -= free;
            block += self.d0.fixed_view::<4, 4>(4 * k, 4 * k);
        }
        m
    }

    /// `𝒟̄ = D⁰ + α(ρ_γ − n)∗W_L − αγ(x,y)W_L(x−y)` with `γ = Q + 𝒫⁰₋ − ½`.
    pub fn mean_field_from_state(&self, q: &DMatrix<C64>) -> DMatrix<C64> {
        self.torus.mean_field(&self.to_state(q))
    }

    /// `γ = Q + 𝒫⁰₋ − ½`.
    pub fn to_state(&self, q: &DMatrix<C64>) -> DMatrix<C64> {
        let mut g = q + &self.p0_minus;
        for i in 0..g.nrows() {
            g[(i, i)] -= C64::from(0.5);
        }
        g
    }

    /// `tr(𝒫⁰₊Q𝒫⁰₊) + tr(𝒫⁰₋Q𝒫⁰₋)`.
    pub fn charge(&self, q: &DMatrix<C64>) -> f64 {
        let pm = &self.p0_minus;
        let pp = DMatrix::<C64>::identity(pm.nrows(), pm.ncols()) - pm;
        ((&pp * q * &pp).trace() + (pm * q * pm).trace()).re
    }

    /// `Q = γ − γ⁰` for a random admissible state `γ`.
    pub fn random_admissible<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<C64> {
        let g = random_admissible_state(self.dim(), rng);
        g - self.to_state(&DMatrix::zeros(self.dim(), self.dim()))
    }

    /// Central difference of `t ↦ E(Q + tΔ)` at `t = 0` and `Re tr(𝒟̄[Q]Δ)`.
    pub fn directional_derivative(&self, q: &DMatrix<C64>, delta: &DMatrix<C64>, h: f64) -> (f64, f64) {
        let step = delta * C64::from(h);
        let fd = (self.energy_terms(&(q + &step)).total() - self.energy_terms(&(q - &step)).total()) / (2.0 * h);
        (fd, real_inner(&self.mean_field(q), delta))
    }

    /// Damped projector iteration `P ← (1−θ)P + θχ_(−∞,0)(𝒟̄[P])` from `P = 𝒫⁰₋`.
    ///
    /// The returned projector is the last image `χ_(−∞,0)(𝒟̄[P])`.
    pub fn solve_polarized_vacuum(&self, opts: &BdfOptions) -> Result<PolarizedVacuum> {
        if !(opts.mixing > 0.0 && opts.mixing <= 1.0) || !(opts.tol > 0.0) {
            return Err(Error::Parameter("mixing must lie in (0, 1] and tol be positive".into()));
        }
        let mut p = self.p0_minus.clone();
        let mut history = Vec::new();
        let mut deviation = Vec::new();
        for it in 1..=opts.max_iter {
            let q = &p - &self.p0_minus;
            let d = self.mean_field(&q);
            deviation.push(max_block_difference(&d, &self.mean_field_from_state(&q)));
            let image = negative_spectral_projector(&hermitize(d), opts.gap_floor)?;
            let residual = (&image - &p).norm();
            history.push(residual);
            if residual <= opts.tol {
                let q = &image - &self.p0_minus;
                self.check_admissible(&q, CONSTRAINT_SLACK)?;
                let mean_field = self.mean_field(&q);
                deviation.push(max_block_difference(&mean_field, &self.mean_field_from_state(&q)));
                let (values, _) = hermitian_eigen(&hermitize(mean_field.clone()));
                let commutator = (&mean_field * &image - &image * &mean_field).norm();
                let terms = self.energy_terms(&q);
                return Ok(PolarizedVacuum {
                    energy: self.bdf_energy(&q)?,
                    terms,
                    charge: self.charge(&q),
                    gap: spectral_gap(&values),
                    projected_gradient: commutator,
                    q,
                    projector: image,
                    mean_field,
                    residual,
                    iterations: it,
                    residual_history: history,
                    reference_deviation: deviation,
                });
            }
            p = &p * C64::from(1.0 - opts.mixing) + &image * C64::from(opts.mixing);
        }
        Err(Error::NonConvergence { what: "polarized-vacuum projector iteration", iterations: history.len(), residuals: history })
    }
}

fn real_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Largest Frobenius norm of a 4×4 block of `a − b`.
fn max_block_difference(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let n = a.nrows() / 4;
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            let d = a.fixed_view::<4, 4>(4 * k, 4 * l) - b.fixed_view::<4, 4>(4 * k, 4 * l);
            worst = worst.max(d.norm());
        }
    }
    worst
}
