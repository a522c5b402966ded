use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bdf::ExternalDensity;
use crate::error::{check_coupling, Error, Result};

/// One run, read from a TOML file with dotted sections.
///
/// ```toml
/// experiment = "fv_alpha1"
/// seed = 7
///
/// [physical]
/// m0 = 1.0
/// alpha = 1.0
/// cutoff = 10.0
///
/// [sweep]
/// L = [8.0, 16.0, 32.0]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Tag used in output file names; defaults to the subcommand name.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub physical: Physical,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub torus: TorusSection,
    #[serde(default)]
    pub external: Option<ExternalSpec>,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub output: Output,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    #[serde(default = "one")]
    pub m0: f64,
    pub alpha: f64,
    pub cutoff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Scf,
    Direct,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub grid_points: usize,
    /// Mixing weight; each experiment has its own default when unset.
    pub mixing: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub method: Method,
    /// Random starts for direct and dense minimization.
    pub starts: usize,
    /// Largest `|Γ|` for dense minimization over general torus states.
    pub general_cap: usize,
    /// Largest `|Γ|` for dense `4|Γ|×4|Γ|` algebra (BDF runs, gradient oracle).
    pub dense_cap: usize,
    /// Largest `|Γ|` for translation-invariant torus runs.
    pub lattice_cap: usize,
    pub oracle_cases: usize,
    pub gradient_states: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            grid_points: 200,
            mixing: None,
            tol: None,
            max_iter: None,
            method: Method::Scf,
            starts: 4,
            general_cap: crate::torus::DENSE_CAP,
            dense_cap: 400,
            lattice_cap: crate::torus::TI_LATTICE_CAP,
            oracle_cases: 20,
            gradient_states: 20,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    /// Box sides for torus and Kato sweeps.
    #[serde(rename = "L")]
    pub sides: Vec<f64>,
    /// Box sides for the external-field comparison (dense, keep small).
    #[serde(rename = "L_field")]
    pub field_sides: Vec<f64>,
    /// Cutoffs for the renormalization sweep.
    pub cutoff: Vec<f64>,
    /// Factors `λ` for the scaling check `λ⁻⁴E(λm0, α, λΛ) = E(m0, α, Λ)`.
    pub lambda: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusSection {
    /// Box side for single-lattice runs (`bdf`, dense comparison, gradient oracle).
    pub side: Option<f64>,
    /// Override for the Coulomb constant `μ`.
    pub mu: Option<f64>,
    /// Run the penalized minimization over `sweep.L` instead of the thermodynamic sweep.
    pub penalized: bool,
    /// Also compare dense and translation-invariant minimizers at `torus.side`.
    pub general: bool,
    /// Mass parameter for Kato constants; defaults to `physical.m0`.
    pub kato_mass: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    PointCharge,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSpec {
    pub family: Family,
    #[serde(default = "one")]
    pub charge: f64,
    #[serde(default = "one")]
    pub width: f64,
    /// File with lines `k re im` for the tabulated family, relative to the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl ExternalSpec {
    pub fn build(&self, base: &Path) -> Result<ExternalDensity> {
        match self.family {
            Family::Gaussian => ExternalDensity::gaussian(self.charge, self.width),
            Family::PointCharge => ExternalDensity::point_charge(self.charge),
            Family::Tabulated => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated density needs external.path".into()))?;
                ExternalDensity::from_file(&base.join(path))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub enabled: bool,
    /// Check names that are reported but do not affect the exit status.
    pub skip: Vec<String>,
}

impl Default for Checks {
    fn default() -> Self {
        Self { enabled: true, skip: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses and validates; the coupling must satisfy `0 ≤ α < 4/π`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_coupling(self.physical.alpha)?;
        positive("physical.m0", self.physical.m0)?;
        positive("physical.cutoff", self.physical.cutoff)?;
        if let Some(t) = self.solver.tol {
            positive("solver.tol", t)?;
        }
        if let Some(m) = self.solver.mixing {
            if !(m > 0.0 && m <= 1.0) {
                return Err(Error::Config(format!("solver.mixing must lie in (0, 1], got {m}")));
            }
        }
        if self.solver.grid_points < 2 {
            return Err(Error::Config("solver.grid_points must be at least 2".into()));
        }
        for (name, list) in [
            ("sweep.L", &self.sweep.sides),
            ("sweep.L_field", &self.sweep.field_sides),
            ("sweep.cutoff", &self.sweep.cutoff),
        ] {
            for &v in list.iter() {
                positive(name, v)?;
            }
            if list.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config(format!("{name} must be strictly ascending")));
            }
        }
        for &l in &self.sweep.lambda {
            positive("sweep.lambda", l)?;
        }
        if let Some(l) = self.torus.side {
            positive("torus.side", l)?;
        }
        if let Some(mu) = self.torus.mu {
            positive("torus.mu", mu)?;
        }
        if let Some(m) = self.torus.kato_mass {
            positive("torus.kato_mass", m)?;
        }
        Ok(())
    }

    pub fn tag(&self, subcommand: &str) -> String {
        self.experiment.clone().unwrap_or_else(|| subcommand.replace('-', "_"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_sections() {
        let cfg = RunConfig::parse(
            "seed = 3\nphysical.alpha = 1.0\nphysical.cutoff = 10.0\nsweep.L = [8.0, 16.0]\nchecks.skip = [\"norm_upper\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.physical.m0, 1.0);
        assert_eq!(cfg.sweep.sides, vec![8.0, 16.0]);
        assert_eq!(cfg.checks.skip, vec!["norm_upper".to_string()]);
        assert_eq!(cfg.tag("free-vacuum"), "free_vacuum");
    }

    #[test]
    fn rejects_supercritical_alpha_citing_hypothesis() {
        let err = RunConfig::parse("physical.alpha = 2.0\nphysical.cutoff = 10.0\n").unwrap_err();
        assert!(err.to_string().contains("0 ≤ α < 4/π"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_sweeps() {
        assert!(RunConfig::parse("physical.alpha = 1.0\nphysical.cutoff = 1.0\nphysical.beta = 1\n").is_err());
        assert!(RunConfig::parse("physical.alpha = 1.0\nphysical.cutoff = 1.0\nsweep.L = [4.0, 2.0]\n").is_err());
    }
}
