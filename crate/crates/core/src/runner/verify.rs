use std::fmt;
use std::path::Path;

use super::output::{read_csv_columns, sha256_hex};
use super::{RunManifest, Status, Subcommand};
use crate::error::{Error, Result};
use crate::free_vacuum::{check_mean_field, g0_lower_bound, FreeVacuumParams, INVARIANT_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub items: Vec<VerifyItem>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.items.push(VerifyItem { name: name.into(), passed, detail: detail.into() });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            writeln!(f, "{} {}: {}", if i.passed { "ok  " } else { "FAIL" }, i.name, i.detail)?;
        }
        Ok(())
    }
}

/// Re-checks a finished run in `dir`: file hashes against the manifest, and
/// the invariants that can be recomputed from the stored tables.
pub fn verify_artifacts(dir: &Path) -> Result<VerifyReport> {
    let manifest = RunManifest::load(dir)?;
    let mut report = VerifyReport { items: Vec::new() };
    for file in &manifest.files {
        let path = dir.join(&file.name);
        match std::fs::read(&path) {
            Ok(bytes) => {
                let hash = sha256_hex(&bytes);
                report.push(format!("hash {}", file.name), hash == file.sha256, hash);
            }
            Err(e) => report.push(format!("hash {}", file.name), false, e.to_string()),
        }
    }
    let skip = &manifest.config.checks.skip;
    let listed = |name: &str| manifest.files.iter().any(|f| f.name == name);
    let tag = &manifest.experiment;
    match manifest.subcommand {
        Subcommand::FreeVacuum => {
            let p = &manifest.config.physical;
            let params = FreeVacuumParams::new(p.m0, p.alpha, p.cutoff);
            let name = format!("profile_{tag}.csv");
            if listed(&name) {
                let (_, c) = read_csv_columns(&dir.join(&name))?;
                let g0_at_zero = manifest
                    .scalar("scf", "g0_at_zero")
                    .or_else(|| manifest.scalar("direct", "g0_at_zero"))
                    .ok_or_else(|| Error::Config("manifest lacks g0_at_zero".into()))?;
                let checks = check_mean_field(&params, &c[0], &c[3], &c[4], g0_at_zero);
                for check in &checks.checks {
                    let skipped = skip.contains(&check.name);
                    let detail = format!("margin {:e} at r = {:e}{}", check.margin, check.worst_r, if skipped { " (skipped)" } else { "" });
                    report.push(check.name.clone(), check.passed || skipped, detail);
                }
            }
        }
        Subcommand::Renorm => {
            let (_, c) = read_csv_columns(&dir.join(format!("{tag}.csv")))?;
            let p = &manifest.config.physical;
            let worst = c[0]
                .iter()
                .zip(&c[1])
                .map(|(&cutoff, &g)| {
                    let bound = g0_lower_bound(&FreeVacuumParams::new(p.m0, p.alpha, cutoff));
                    (g - bound) / bound.abs()
                })
                .fold(f64::INFINITY, f64::min);
            report.push("renorm_margin", worst >= -INVARIANT_TOL || skip.iter().any(|s| s == "renorm_margin"), format!("{worst:e}"));
            let increasing = c[1].windows(2).all(|w| w[1] > w[0]);
            report.push("renorm_increasing", increasing || skip.iter().any(|s| s == "renorm_increasing"), format!("{:?}", c[1]));
        }
        Subcommand::Kato => {
            let (_, c) = read_csv_columns(&dir.join(format!("{tag}.csv")))?;
            let d: Vec<f64> = c[2].windows(2).map(|w| w[1] - w[0]).collect();
            let shrinking = d.windows(2).all(|w| w[1].abs() < w[0].abs());
            report.push("kato_differences_shrinking", shrinking || skip.iter().any(|s| s == "kato_differences_shrinking"), format!("{d:?}"));
        }
        _ => {}
    }
    let failed: Vec<_> = manifest.checks.iter().filter(|c| !c.passed && !c.skipped).map(|c| c.name.as_str()).collect();
    let consistent = (manifest.status == Status::InvariantFailure) == !failed.is_empty() || manifest.status == Status::NonConvergence;
    report.push("manifest_status", consistent, format!("{:?}, failed checks {failed:?}", manifest.status));
    Ok(report)
}
