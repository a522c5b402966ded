use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::Cell;
use super::{Method, Run, Subcommand};
use crate::bdf::{
    thermo_difference, uniqueness_condition_check, BdfModel, BdfOptions, ExternalDensity, ThermoOptions,
};
use crate::error::{Error, Result};
use crate::free_vacuum::{
    free_energy_closed_form, g0_lower_bound, verify_free_vacuum, DirectOptions, Discretization, FreeVacuumModel,
    FreeVacuumParams, FreeVacuumSolution, ScfOptions,
};
use crate::radial::{oracle_battery, ExchangeQuadrature};
use crate::torus::{
    extrapolate_kato, kato_constant_with, random_admissible_state, GeneralOptions, Lattice, PenalizedOptions,
    PeriodicCoulomb, TiOptions, TorusModel, TorusParams, KATO_CAP,
};

/// Relative slack of the nodewise free-vacuum checks.
const NODE_TOL: f64 = 1e-8;
const SCALING_TOL: f64 = 1e-6;
const AGREEMENT_PROFILE_TOL: f64 = 1e-6;
const AGREEMENT_ENERGY_TOL: f64 = 1e-8;
const THERMO_GAP_TOL: f64 = 0.02;
const DENSE_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-4;
const GRADIENT_TOL: f64 = 1e-6;
const GRADIENT_STEP: f64 = 1e-4;
const PROJECTED_GRADIENT_TOL: f64 = 1e-6;
const NEUTRALITY_TOL: f64 = 1e-6;
const REFERENCE_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-6;
const KATO_SLACK: f64 = 1e-6;

pub(super) fn dispatch(run: &mut Run, subcommand: Subcommand) -> Result<()> {
    match subcommand {
        Subcommand::FreeVacuum => free_vacuum(run),
        Subcommand::Renorm => renorm(run),
        Subcommand::Torus => torus(run),
        Subcommand::Bdf => bdf(run),
        Subcommand::Kato => kato(run),
        Subcommand::OracleCheck => oracle_check(run),
        Subcommand::Verify => unreachable!("verify runs on stored artifacts"),
    }
}

fn params(run: &Run) -> FreeVacuumParams {
    let p = &run.cfg.physical;
    FreeVacuumParams::new(p.m0, p.alpha, p.cutoff)
}

fn discretization(run: &Run) -> Discretization {
    Discretization { grid_points: run.cfg.solver.grid_points, quadrature: ExchangeQuadrature::default() }
}

fn scf_options(run: &Run) -> ScfOptions {
    let d = ScfOptions::default();
    let s = &run.cfg.solver;
    ScfOptions { mixing: s.mixing.unwrap_or(d.mixing), tol: s.tol.unwrap_or(d.tol), max_iter: s.max_iter.unwrap_or(d.max_iter) }
}

fn ti_options(run: &Run) -> TiOptions {
    let d = TiOptions::default();
    let s = &run.cfg.solver;
    TiOptions { mixing: s.mixing.unwrap_or(d.mixing), tol: s.tol.unwrap_or(d.tol), max_iter: s.max_iter.unwrap_or(d.max_iter) }
}

fn bdf_options(run: &Run) -> BdfOptions {
    let d = BdfOptions::default();
    let s = &run.cfg.solver;
    BdfOptions {
        mixing: s.mixing.unwrap_or(d.mixing),
        tol: s.tol.unwrap_or(d.tol),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        ..d
    }
}

fn solve_radial(p: FreeVacuumParams, disc: &Discretization, opts: &ScfOptions) -> Result<FreeVacuumSolution> {
    FreeVacuumModel::new(p, disc)?.solve(opts, None)
}

fn torus_model(run: &Run, lattice: Arc<Lattice>) -> Result<TorusModel> {
    let p = &run.cfg.physical;
    let params = TorusParams::new(p.m0, p.alpha);
    match run.cfg.torus.mu {
        Some(mu) => TorusModel::with_coulomb(lattice.clone(), params, PeriodicCoulomb::with_mu(lattice.side(), mu)?),
        None => TorusModel::new(lattice, params),
    }
}

fn external(run: &Run) -> Result<Option<ExternalDensity>> {
    run.cfg.external.as_ref().map(|e| e.build(&run.base)).transpose()
}

fn torus_side(run: &Run) -> Result<f64> {
    run.cfg.torus.side.ok_or_else(|| Error::Config("torus.side is required for this experiment".into()))
}

fn profile_rows(sol: &FreeVacuumSolution) -> Vec<Vec<Cell>> {
    let nodes = sol.grid().nodes();
    (0..nodes.len())
        .map(|i| {
            vec![
                nodes[i].into(),
                sol.profile.f0.values()[i].into(),
                sol.profile.f1.values()[i].into(),
                sol.mean_field.g0.values()[i].into(),
                sol.mean_field.g1.values()[i].into(),
            ]
        })
        .collect()
}

const PROFILE_HEADER: [&str; 5] = ["r", "f0", "f1", "g0", "g1"];

fn record_solution(run: &mut Run, name: &str, sol: &FreeVacuumSolution) {
    let p = sol.params;
    run.record(
        name,
        sol.iterations,
        sol.residual,
        &[
            ("m0", p.m0),
            ("alpha", p.alpha),
            ("cutoff", p.cutoff),
            ("energy", sol.energy),
            ("energy_alpha0", free_energy_closed_form(p.m0, p.cutoff)),
            ("g0_at_zero", sol.g0_at_zero),
            ("g0_lower_bound", g0_lower_bound(&p)),
        ],
    );
}

fn invariant_checks(run: &mut Run, sol: &FreeVacuumSolution) {
    let report = verify_free_vacuum(sol);
    for c in &report.checks {
        run.check(&c.name, c.margin, -NODE_TOL, c.passed);
    }
}

fn free_vacuum(run: &mut Run) -> Result<()> {
    let p = params(run);
    let disc = discretization(run);
    let method = run.cfg.solver.method;
    let scf = if method != Method::Direct {
        let sol = solve_radial(p, &disc, &scf_options(run))?;
        record_solution(run, "scf", &sol);
        let name = format!("profile_{}.csv", run.tag);
        run.writer.write_csv(&name, &PROFILE_HEADER, &profile_rows(&sol))?;
        invariant_checks(run, &sol);
        Some(sol)
    } else {
        None
    };
    if method != Method::Scf {
        let s = &run.cfg.solver;
        let opts = DirectOptions {
            starts: s.starts,
            seed: run.cfg.seed,
            tol: s.tol.unwrap_or(DirectOptions::default().tol),
            max_iter: s.max_iter.unwrap_or(DirectOptions::default().max_iter),
            ..DirectOptions::default()
        };
        let report = FreeVacuumModel::new(p, &disc)?.minimize_direct(&opts)?;
        let sol = report.solution;
        record_solution(run, "direct", &sol);
        let name = if scf.is_some() { format!("profile_{}_direct.csv", run.tag) } else { format!("profile_{}.csv", run.tag) };
        run.writer.write_csv(&name, &PROFILE_HEADER, &profile_rows(&sol))?;
        run.check_le("direct_start_spread", report.spread, AGREEMENT_PROFILE_TOL);
        match &scf {
            Some(a) => {
                run.check_le("scf_direct_profile", a.profile.sup_distance(&sol.profile), AGREEMENT_PROFILE_TOL);
                let rel = (a.energy - sol.energy).abs() / a.energy.abs();
                run.check_le("scf_direct_energy", rel, AGREEMENT_ENERGY_TOL);
            }
            None => invariant_checks(run, &sol),
        }
    }
    scaling(run, p, &disc)
}

/// `λ⁻⁴E^T(λm0, α, λΛ)` against `E^T(m0, α, Λ)` for each `λ` in `sweep.lambda`.
fn scaling(run: &mut Run, p: FreeVacuumParams, disc: &Discretization) -> Result<()> {
    if run.cfg.sweep.lambda.is_empty() {
        return Ok(());
    }
    let opts = scf_options(run);
    let mut lambdas = vec![1.0];
    lambdas.extend(run.cfg.sweep.lambda.iter().copied());
    let energies: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| {
            let q = FreeVacuumParams::new(l * p.m0, p.alpha, l * p.cutoff);
            solve_radial(q, disc, &opts).map(|s| s.energy / l.powi(4))
        })
        .collect::<Result<_>>()?;
    let base = energies[0];
    let mut worst = 0.0f64;
    let rows: Vec<Vec<Cell>> = lambdas[1..]
        .iter()
        .zip(&energies[1..])
        .map(|(&l, &e)| {
            let rel = (e - base).abs() / base.abs();
            worst = worst.max(rel);
            vec![l.into(), e.into(), base.into(), rel.into()]
        })
        .collect();
    let name = run.csv_name("scaling");
    run.writer.write_csv(&name, &["lambda", "scaled_energy", "energy", "relative_difference"], &rows)?;
    run.check_le("scaling", worst, SCALING_TOL);
    Ok(())
}

fn renorm(run: &mut Run) -> Result<()> {
    let cutoffs = if run.cfg.sweep.cutoff.is_empty() { vec![run.cfg.physical.cutoff] } else { run.cfg.sweep.cutoff.clone() };
    let p = params(run);
    let disc = discretization(run);
    let opts = scf_options(run);
    let sols: Vec<FreeVacuumSolution> = cutoffs
        .par_iter()
        .map(|&c| solve_radial(FreeVacuumParams::new(p.m0, p.alpha, c), &disc, &opts))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for sol in &sols {
        let bound = g0_lower_bound(&sol.params);
        let margin = sol.g0_at_zero - bound;
        worst_margin = worst_margin.min(margin / bound.abs());
        rows.push(vec![sol.params.cutoff.into(), sol.g0_at_zero.into(), bound.into(), margin.into(), sol.energy.into()]);
        record_solution(run, &format!("cutoff_{}", sol.params.cutoff), sol);
    }
    let name = run.csv_name("");
    run.writer.write_csv(&name, &["cutoff", "g0_at_zero", "lower_bound", "margin", "energy"], &rows)?;
    run.check("renorm_margin", worst_margin, -NODE_TOL, worst_margin >= -NODE_TOL);
    let steps: Vec<f64> = sols.windows(2).map(|w| w[1].g0_at_zero - w[0].g0_at_zero).collect();
    let smallest = steps.iter().copied().fold(f64::INFINITY, f64::min);
    if !steps.is_empty() {
        run.check("renorm_increasing", smallest, 0.0, smallest > 0.0);
    }
    Ok(())
}

fn torus(run: &mut Run) -> Result<()> {
    let sides = run.cfg.sweep.sides.clone();
    if !sides.is_empty() {
        if run.cfg.torus.penalized {
            penalized_sweep(run, &sides)?;
        } else {
            thermo_sweep(run, &sides)?;
        }
    }
    if run.cfg.torus.general {
        general_comparison(run)?;
    }
    if !run.cfg.sweep.field_sides.is_empty() {
        field_sweep(run)?;
    }
    if sides.is_empty() && !run.cfg.torus.general && run.cfg.sweep.field_sides.is_empty() {
        return Err(Error::Config("torus needs sweep.L, sweep.L_field or torus.general".into()));
    }
    Ok(())
}

/// True when `v` is non-increasing over its last three entries.
fn tail_non_increasing(v: &[f64]) -> bool {
    v.len() < 3 || v[v.len() - 3..].windows(2).all(|w| w[1] <= w[0])
}

fn thermo_sweep(run: &mut Run, sides: &[f64]) -> Result<()> {
    let p = params(run);
    let reference = solve_radial(p, &discretization(run), &scf_options(run))?;
    record_solution(run, "free_vacuum", &reference);
    let opts = ti_options(run);
    let cap = run.cfg.solver.lattice_cap;
    let cells: Vec<(usize, f64, f64, usize, f64)> = sides
        .par_iter()
        .map(|&side| {
            let lattice = Arc::new(Lattice::with_cap(side, p.cutoff, cap)?);
            let model = torus_model(run, lattice.clone())?;
            let sol = model.solve_ti(&opts)?;
            let sup = (0..lattice.len())
                .map(|k| sol.state.symbols[k].sub(&reference.profile.symbol_at(lattice.momentum(k))).norm())
                .fold(0.0, f64::max);
            Ok((lattice.len(), sol.energy / side.powi(3), sup, sol.iterations, sol.residual))
        })
        .collect::<Result<_>>()?;
    let et = reference.energy;
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut sups = Vec::new();
    for (&side, &(points, e, sup, iterations, residual)) in sides.iter().zip(&cells) {
        let gap = (e - et).abs();
        gaps.push(gap);
        sups.push(sup);
        rows.push(vec![side.into(), points.into(), e.into(), et.into(), gap.into(), (gap / et.abs()).into(), sup.into()]);
        run.record(&format!("ti_L_{side}"), iterations, residual, &[("side", side), ("points", points as f64), ("energy_per_volume", e)]);
    }
    let name = run.csv_name("");
    run.writer.write_csv(
        &name,
        &["L", "points", "energy_per_volume", "energy_limit", "gap", "relative_gap", "sup_distance"],
        &rows,
    )?;
    if gaps.len() >= 3 {
        let last = gaps[gaps.len() - 1];
        run.check("thermo_gap_non_increasing", last, gaps[gaps.len() - 2], tail_non_increasing(&gaps));
        run.check_le("thermo_gap_relative", last / et.abs(), THERMO_GAP_TOL);
        run.check("thermo_sup_non_increasing", sups[sups.len() - 1], sups[sups.len() - 2], tail_non_increasing(&sups));
    }
    Ok(())
}

fn penalized_sweep(run: &mut Run, sides: &[f64]) -> Result<()> {
    let cutoff = run.cfg.physical.cutoff;
    let cap = run.cfg.solver.lattice_cap;
    let opts = PenalizedOptions::default();
    let sols = sides
        .par_iter()
        .map(|&side| {
            let lattice = Arc::new(Lattice::with_cap(side, cutoff, cap)?);
            let n = lattice.len();
            torus_model(run, lattice)?.minimize_penalized(&opts).map(|s| (n, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (&side, (points, s)) in sides.iter().zip(&sols) {
        rows.push(vec![
            side.into(),
            (*points).into(),
            s.energy.into(),
            s.rho.into(),
            (s.rho * side).into(),
            s.xi_sup.into(),
            s.gap.into(),
            s.iterations.into(),
        ]);
        run.record(&format!("penalized_L_{side}"), s.iterations, s.gap, &[("rho", s.rho), ("energy", s.energy)]);
    }
    let name = run.csv_name("penalized");
    run.writer.write_csv(&name, &["L", "points", "energy", "rho", "rho_L", "xi_sup", "gap", "iterations"], &rows)?;
    if sols.len() >= 2 {
        let first = sols[0].1.rho;
        let last = sols[sols.len() - 1].1.rho;
        let rho_l: Vec<f64> = sides.iter().zip(&sols).map(|(l, (_, s))| s.rho * l).collect();
        run.check_le("penalized_rho_halved", last, 0.5 * first);
        run.check_le("penalized_rho_L_bounded", rho_l.iter().copied().fold(0.0, f64::max), rho_l[0]);
    }
    Ok(())
}

fn general_comparison(run: &mut Run) -> Result<()> {
    let side = torus_side(run)?;
    let s = &run.cfg.solver;
    let lattice = Arc::new(Lattice::with_cap(side, run.cfg.physical.cutoff, s.general_cap)?);
    let model = torus_model(run, lattice)?;
    let ti = model.solve_ti(&ti_options(run))?;
    let opts = GeneralOptions { starts: s.starts, seed: run.cfg.seed, cap: s.general_cap, ..GeneralOptions::default() };
    let report = model.minimize_general(&opts)?;
    let rows: Vec<Vec<Cell>> = report
        .start_energies
        .iter()
        .zip(&report.start_iterations)
        .enumerate()
        .map(|(i, (&e, &it))| vec![i.into(), e.into(), it.into(), ti.energy.into(), (e - ti.energy).into()])
        .collect();
    let name = run.csv_name("general");
    run.writer.write_csv(&name, &["start", "energy", "iterations", "ti_energy", "difference"], &rows)?;
    let diff = report.start_energies.iter().map(|e| (e - ti.energy).abs()).fold(0.0, f64::max);
    run.record(
        "general",
        report.best.iterations,
        report.best.residual,
        &[("ti_energy", ti.energy), ("best_energy", report.best.energy), ("off_diagonal_norm", report.off_diagonal_norm)],
    );
    run.check_le("general_energy", diff, DENSE_TOL);
    run.check_le("general_off_diagonal", report.off_diagonal_norm, DENSE_TOL);
    Ok(())
}

fn field_sweep(run: &mut Run) -> Result<()> {
    let density = external(run)?.ok_or_else(|| Error::Config("sweep.L_field needs an [external] density".into()))?;
    let p = &run.cfg.physical;
    let s = &run.cfg.solver;
    let opts = ThermoOptions {
        cutoff: p.cutoff,
        general: GeneralOptions { starts: s.starts, seed: run.cfg.seed, cap: s.general_cap, ..GeneralOptions::default() },
        bdf: BdfOptions { reference: ti_options(run), ..bdf_options(run) },
        lattice_cap: s.dense_cap,
    };
    let sides = run.cfg.sweep.field_sides.clone();
    let rows = sides
        .par_iter()
        .map(|&side| thermo_difference(&density, TorusParams::new(p.m0, p.alpha), &[side], &opts).map(|mut r| r.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                r.side.into(),
                r.points.into(),
                r.energy_field.into(),
                r.energy_free.into(),
                r.difference.into(),
                r.bdf_minimum.into(),
                r.consistency.into(),
                r.lower_bound.into(),
                r.charge.into(),
                r.density_at_origin.into(),
            ]
        })
        .collect();
    let name = run.csv_name("field");
    run.writer.write_csv(
        &name,
        &[
            "L",
            "points",
            "energy_field",
            "energy_free",
            "difference",
            "bdf_minimum",
            "consistency",
            "lower_bound",
            "charge",
            "density_at_origin",
        ],
        &table,
    )?;
    for r in &rows {
        let mut scalars = vec![("side", r.side), ("points", r.points as f64), ("bdf_minimum", r.bdf_minimum), ("charge", r.charge)];
        if let Some(d) = r.difference {
            scalars.push(("difference", d));
        }
        run.record(&format!("field_L_{}", r.side), 0, 0.0, &scalars);
    }
    let consistency = rows.iter().filter_map(|r| r.consistency).fold(f64::NEG_INFINITY, f64::max);
    if consistency.is_finite() {
        run.check_le("field_consistency", consistency, CONSISTENCY_TOL);
    }
    let minima: Vec<f64> = rows.iter().map(|r| r.bdf_minimum).collect();
    if minima.len() >= 2 {
        let step = minima[minima.len() - 1] - minima[minima.len() - 2];
        run.check_le("field_trend", step, 0.0);
    }
    Ok(())
}

fn bdf(run: &mut Run) -> Result<()> {
    let density = external(run)?.ok_or_else(|| Error::Config("bdf needs an [external] density".into()))?;
    let side = torus_side(run)?;
    let p = run.cfg.physical.clone();
    let lattice = Arc::new(Lattice::with_cap(side, p.cutoff, run.cfg.solver.dense_cap)?);
    let opts = bdf_options(run);
    let model = BdfModel::new(lattice.clone(), TorusParams::new(p.m0, p.alpha), Some(&density), &ti_options(run))?;
    let uniqueness = uniqueness_condition_check(p.alpha, density.coulomb_norm(p.cutoff))?;
    let vacuum = model.solve_polarized_vacuum(&opts)?;
    let history: Vec<Vec<Cell>> = vacuum
        .residual_history
        .iter()
        .zip(&vacuum.reference_deviation)
        .enumerate()
        .map(|(i, (&r, &d))| vec![(i + 1).into(), r.into(), d.into()])
        .collect();
    let name = run.csv_name("");
    run.writer.write_csv(&name, &["iteration", "residual", "reference_deviation"], &history)?;
    let rho = model.density_of_operator(&vacuum.q);
    let ext = density.lattice_coefficients(&lattice);
    let density_rows: Vec<Vec<Cell>> = (0..lattice.len())
        .map(|i| {
            let n = lattice.points()[i];
            let r = rho.get(n);
            vec![n[0].into(), n[1].into(), n[2].into(), lattice.momentum_norm(i).into(), r.re.into(), r.im.into(), ext[i].re.into()]
        })
        .collect();
    let name = run.csv_name("density");
    run.writer.write_csv(&name, &["nx", "ny", "nz", "k", "rho_re", "rho_im", "external"], &density_rows)?;
    let lower = -0.5 * p.alpha * model.external_coulomb_energy();
    let deviation = vacuum.reference_deviation.iter().copied().fold(0.0, f64::max);
    run.record(
        "bdf",
        vacuum.iterations,
        vacuum.residual,
        &[
            ("side", side),
            ("points", lattice.len() as f64),
            ("energy", vacuum.energy),
            ("linear", vacuum.terms.linear),
            ("external", vacuum.terms.external),
            ("direct", vacuum.terms.direct),
            ("exchange", vacuum.terms.exchange),
            ("lower_bound", lower),
            ("charge", vacuum.charge),
            ("gap", vacuum.gap),
            ("projected_gradient", vacuum.projected_gradient),
            ("reference_deviation", deviation),
            ("coulomb_norm", density.coulomb_norm(p.cutoff)),
            ("uniqueness_middle", uniqueness.middle),
            ("uniqueness_passed", if uniqueness.passed { 1.0 } else { 0.0 }),
        ],
    );
    run.check_le("bdf_energy_upper", vacuum.energy, 1e-12);
    run.check("bdf_energy_lower", vacuum.energy, lower, vacuum.energy >= lower - 1e-12);
    run.check_le("bdf_projected_gradient", vacuum.projected_gradient, PROJECTED_GRADIENT_TOL);
    run.check_le("bdf_reference_independence", deviation, REFERENCE_TOL);
    if uniqueness.passed {
        run.check_le("bdf_neutrality", vacuum.charge.abs(), NEUTRALITY_TOL);
    }
    Ok(())
}

fn kato(run: &mut Run) -> Result<()> {
    let sides = run.cfg.sweep.sides.clone();
    if sides.is_empty() {
        return Err(Error::Config("kato needs sweep.L".into()));
    }
    let cutoff = run.cfg.physical.cutoff;
    let mass = run.cfg.torus.kato_mass.unwrap_or(run.cfg.physical.m0);
    let mu = run.cfg.torus.mu;
    let values = sides
        .par_iter()
        .map(|&side| {
            let lattice = Lattice::with_cap(side, cutoff, KATO_CAP)?;
            let coulomb = match mu {
                Some(mu) => PeriodicCoulomb::with_mu(side, mu)?,
                None => PeriodicCoulomb::new(side)?,
            };
            kato_constant_with(&lattice, mass, &coulomb).map(|c| (lattice.len(), c))
        })
        .collect::<Result<Vec<_>>>()?;
    let constants: Vec<f64> = values.iter().map(|v| v.1).collect();
    let diffs: Vec<f64> = constants.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<Vec<Cell>> = sides
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (&l, &(n, c)))| vec![l.into(), n.into(), c.into(), (if i == 0 { None } else { Some(diffs[i - 1]) }).into()])
        .collect();
    let name = run.csv_name("");
    run.writer.write_csv(&name, &["L", "points", "constant", "difference"], &rows)?;
    let mut scalars = vec![("cutoff", cutoff), ("mass", mass), ("largest", *constants.last().expect("non-empty"))];
    if sides.len() >= 3 {
        let limit = extrapolate_kato(&sides, &constants)?;
        scalars.push(("extrapolated", limit));
        run.check_le("kato_limit", limit, PI / 2.0 + KATO_SLACK);
    }
    run.record("kato", 0, 0.0, &scalars);
    if diffs.len() >= 2 {
        let shrinking = diffs.windows(2).all(|w| w[1].abs() < w[0].abs());
        let ratio = diffs[diffs.len() - 1].abs() / diffs[diffs.len() - 2].abs();
        run.check("kato_differences_shrinking", ratio, 1.0, shrinking);
    }
    Ok(())
}

fn oracle_check(run: &mut Run) -> Result<()> {
    let p = params(run);
    let s = run.cfg.solver.clone();
    let cases = oracle_battery(s.oracle_cases, run.cfg.seed, p.m0, p.alpha, p.cutoff, s.grid_points)?;
    let rows: Vec<Vec<Cell>> = cases
        .iter()
        .enumerate()
        .map(|(i, c)| vec![i.into(), c.j.into(), c.r.into(), c.transform.into(), c.oracle.into(), c.relative_error.into()])
        .collect();
    let name = run.csv_name("angular");
    run.writer.write_csv(&name, &["case", "j", "r", "transform", "oracle", "relative_error"], &rows)?;
    let worst = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    run.record("angular_oracle", cases.len(), worst, &[("worst_relative_error", worst)]);
    run.check_le("angular_oracle", worst, ORACLE_TOL);
    let Some(side) = run.cfg.torus.side else {
        return Ok(());
    };
    let lattice = Arc::new(Lattice::with_cap(side, p.cutoff, s.dense_cap)?);
    let density = external(run)?;
    let mut model = torus_model(run, lattice.clone())?;
    if let Some(n) = &density {
        model = model.with_external(n.lattice_coefficients(&lattice))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(run.cfg.seed);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..s.gradient_states {
        let gamma = random_admissible_state(model.dim(), &mut rng);
        let delta = random_admissible_state(model.dim(), &mut rng);
        let (fd, an) = model.directional_derivative(&gamma, &delta, GRADIENT_STEP);
        let rel = (fd - an).abs() / (an.abs() + 1e-12);
        worst = worst.max(rel);
        rows.push(vec!["torus".into(), i.into(), fd.into(), an.into(), rel.into()]);
    }
    run.check_le("torus_gradient", worst, GRADIENT_TOL);
    if let Some(n) = &density {
        let bdf = BdfModel::new(lattice, TorusParams::new(p.m0, p.alpha), Some(n), &ti_options(run))?;
        let mut bdf_worst = 0.0f64;
        for i in 0..s.gradient_states {
            let q = bdf.random_admissible(&mut rng);
            let delta = bdf.random_admissible(&mut rng);
            let (fd, an) = bdf.directional_derivative(&q, &delta, GRADIENT_STEP);
            let rel = (fd - an).abs() / (an.abs() + 1e-12);
            bdf_worst = bdf_worst.max(rel);
            rows.push(vec!["bdf".into(), i.into(), fd.into(), an.into(), rel.into()]);
        }
        run.check_le("bdf_gradient", bdf_worst, GRADIENT_TOL);
    }
    let name = run.csv_name("gradient");
    run.writer.write_csv(&name, &["model", "state", "finite_difference", "analytic", "relative_error"], &rows)?;
    run.record("gradient_oracle", s.gradient_states, worst, &[("worst_relative_error", worst)]);
    Ok(())
}
