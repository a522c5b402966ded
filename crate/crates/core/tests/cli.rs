use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirac_sea::runner::{sha256_hex, RunManifest, Status};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dirac-sea"));
    c.env_remove("OUTPUT_DIR");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn kato_run_writes_hashed_tables_and_verifies() {
    let out = tempfile::tempdir().unwrap();
    let o = run(bin().args(["kato", "--config"]).arg(configs().join("kato.toml")).arg("--out").arg(out.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = RunManifest::load(out.path()).unwrap();
    assert_eq!(manifest.status, Status::Ok);
    assert_eq!(manifest.files.len(), 1);
    for f in &manifest.files {
        let bytes = std::fs::read(out.path().join(&f.name)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256);
        assert!(bytes.ends_with(b"\n") && !bytes.contains(&b'\r'));
    }
    let v = run(bin().arg("verify").arg("--out").arg(out.path()));
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));

    let table = out.path().join(&manifest.files[0].name);
    let mut text = std::fs::read_to_string(&table).unwrap();
    text.push_str("20,1,1,1\n");
    std::fs::write(&table, text).unwrap();
    let v = run(bin().arg("verify").arg("--out").arg(out.path()));
    assert_eq!(code(&v), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = run(bin().args(["torus", "--config"]).arg(configs().join("general.toml")).arg("--out").arg(d.path()));
        assert_eq!(code(&o), 0);
    }
    let files = RunManifest::load(dirs[0].path()).unwrap().files;
    assert!(!files.is_empty());
    for f in files {
        assert_eq!(std::fs::read(dirs[0].path().join(&f.name)).unwrap(), std::fs::read(dirs[1].path().join(&f.name)).unwrap());
    }
}

#[test]
fn supercritical_coupling_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physical]\nalpha = 2.0\ncutoff = 10.0\n");
    let o = run(bin().args(["free-vacuum", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("out")));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("4/π"));
}

#[test]
fn unknown_keys_and_missing_config_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physical]\nalpha = 1.0\ncutoff = 10.0\nbogus = 1\n");
    assert_eq!(code(&run(bin().args(["free-vacuum", "--config"]).arg(&cfg))), 2);
    assert_eq!(code(&run(bin().args(["free-vacuum"]))), 2);
    assert_eq!(code(&run(bin().args(["no-such-subcommand"]))), 2);
}

#[test]
fn failed_invariant_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physical]\nalpha = 1.0\ncutoff = 10.0\n");
    let out = dir.path().join("out");
    let o = run(bin().args(["free-vacuum", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code(&o), 4);
    let manifest = RunManifest::load(&out).unwrap();
    assert_eq!(manifest.status, Status::InvariantFailure);
    let failed: Vec<_> = manifest.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["norm_upper"]);
    let v = run(bin().arg("verify").arg("--out").arg(&out));
    assert_eq!(code(&v), 4);
    assert!(String::from_utf8_lossy(&v.stderr).contains("FAIL norm_upper"));
}

#[test]
fn non_convergence_exits_three_and_keeps_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physical]\nalpha = 1.0\ncutoff = 10.0\n[solver]\nmax_iter = 2\n");
    let out = dir.path().join("out");
    let o = run(bin().args(["free-vacuum", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code(&o), 3);
    let manifest = RunManifest::load(&out).unwrap();
    assert_eq!(manifest.status, Status::NonConvergence);
    assert!(!manifest.experiments.last().unwrap().converged);
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("env");
    let cli_out = dir.path().join("cli");
    let cfg = write_config(
        dir.path(),
        &format!("[physical]\nalpha = 0.0\ncutoff = 10.0\n[sweep]\nL = [2.0, 4.0]\n[output]\ndir = {:?}\n", dir.path().join("cfg")),
    );
    assert_eq!(code(&run(bin().args(["kato", "--config"]).arg(&cfg).env("OUTPUT_DIR", &env_out))), 0);
    assert!(env_out.join("manifest.json").exists());
    assert_eq!(code(&run(bin().args(["kato", "--config"]).arg(&cfg).arg("--out").arg(&cli_out).env("OUTPUT_DIR", &env_out))), 0);
    assert!(cli_out.join("manifest.json").exists());
    assert_eq!(code(&run(bin().args(["kato", "--config"]).arg(&cfg))), 0);
    assert!(dir.path().join("cfg/manifest.json").exists());
}

#[test]
fn seed_override_is_recorded() {
    let out = tempfile::tempdir().unwrap();
    let o = run(bin().args(["torus", "--seed", "5", "--config"]).arg(configs().join("general.toml")).arg("--out").arg(out.path()));
    assert_eq!(code(&o), 0);
    assert_eq!(RunManifest::load(out.path()).unwrap().seed, 5);
}
