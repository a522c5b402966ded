//! Drives the experiment runner from an inline config and lists the artifacts.

use dirac_sea::runner::{execute, RunConfig, Subcommand};

fn main() -> dirac_sea::Result<()> {
    let cfg = RunConfig::parse(
        "experiment = \"renorm_demo\"\nphysical.alpha = 1.0\nphysical.cutoff = 10.0\nsweep.cutoff = [10.0, 100.0]\n",
    )?;
    let out = std::env::temp_dir().join("dirac_sea_run_config");
    let outcome = execute(cfg, Subcommand::Renorm, std::path::Path::new("."), &out);
    println!("exit code {}", outcome.status.exit_code());
    if let Some(m) = outcome.manifest {
        for f in &m.files {
            println!("{} {} rows sha256 {}", f.name, f.rows, f.sha256);
        }
        for c in &m.checks {
            println!("{} passed={} value={:e}", c.name, c.passed, c.value);
        }
    }
    print!("{}", std::fs::read_to_string(out.join("renorm_demo.csv")).map_err(|e| dirac_sea::Error::Io { path: "renorm_demo.csv".into(), source: e })?);
    Ok(())
}
