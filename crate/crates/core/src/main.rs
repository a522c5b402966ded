use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dirac_sea::runner::{execute, resolve_output_dir, RunConfig, Status, Subcommand};

/// Hartree-Fock vacuum of no-photon QED: free vacuum, torus model and polarized vacuum.
///
/// Tabulated external densities (`external.family = "tabulated"`) are read from
/// `external.path`: plain text, one `k re im` triple per line giving `n̂(|k|)`,
/// `#` comments allowed, interpolated by a natural cubic spline.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Command,
    /// TOML run configuration (for `verify`, only used to locate the output directory).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides OUTPUT_DIR and `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    FreeVacuum,
    Torus,
    Bdf,
    Kato,
    Renorm,
    OracleCheck,
    Verify,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::FreeVacuum => Subcommand::FreeVacuum,
            Command::Torus => Subcommand::Torus,
            Command::Bdf => Subcommand::Bdf,
            Command::Kato => Subcommand::Kato,
            Command::Renorm => Subcommand::Renorm,
            Command::OracleCheck => Subcommand::OracleCheck,
            Command::Verify => Subcommand::Verify,
        }
    }
}

fn fail(status: Status, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(status.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let subcommand = Subcommand::from(cli.subcommand);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(Status::ConfigError, &e.to_string());
        }
    }
    let env = std::env::var("OUTPUT_DIR").ok();
    let cfg = match &cli.config {
        Some(path) => match RunConfig::from_path(path) {
            Ok(c) => Some(c),
            Err(e) => return fail(Status::ConfigError, &e.to_string()),
        },
        None => None,
    };
    let (cfg, base) = match (cfg, subcommand) {
        (Some(mut c), _) => {
            if let Some(seed) = cli.seed {
                c.seed = seed;
            }
            let base = cli.config.as_ref().and_then(|p| p.parent()).map(PathBuf::from).unwrap_or_default();
            (c, base)
        }
        (None, Subcommand::Verify) => {
            let Some(out) = cli.out.clone().or_else(|| env.clone().map(PathBuf::from)) else {
                return fail(Status::ConfigError, "verify needs --out, OUTPUT_DIR or --config");
            };
            return report(execute(placeholder(), subcommand, &out, &out));
        }
        (None, _) => return fail(Status::ConfigError, "--config is required"),
    };
    let out = resolve_output_dir(cli.out.as_deref(), env.as_deref(), &cfg, subcommand);
    report(execute(cfg, subcommand, &base, &out))
}

fn placeholder() -> RunConfig {
    RunConfig::parse("physical.alpha = 0.0\nphysical.cutoff = 1.0\n").expect("valid literal")
}

fn report(outcome: dirac_sea::runner::Outcome) -> ExitCode {
    if let Some(m) = &outcome.manifest {
        for e in &m.experiments {
            let scalars: Vec<String> = e.scalars.iter().map(|(k, v)| format!("{k}={v:.10e}")).collect();
            println!("{} converged={} iterations={} residual={:e} {}", e.name, e.converged, e.iterations, e.residual, scalars.join(" "));
        }
        for c in &m.checks {
            let state = if c.skipped { "skip" } else if c.passed { "ok" } else { "FAIL" };
            println!("check {state} {} value={:e} limit={:e}", c.name, c.value, c.limit);
        }
    }
    if let Some(msg) = &outcome.message {
        if outcome.status == Status::Ok {
            print!("{msg}");
        } else {
            eprintln!("{msg}");
        }
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}
