use std::path::Path;
use std::thread;

use fchoquard_core::diagnostics::{
    energy_crossing, gn_hls_probe, random_smooth_field, rearrange_decreasing, scaling_curve,
    scaling_range, subadditivity_scan, RearrangementCheck,
};
use fchoquard_core::dynamics::{
    run_observed, stability_experiment, stability_experiment_coupled, Conservation,
    CoupledPropagator, Evolution, PropagatorConfig, ScalarPropagator, StabilityReport,
};
use fchoquard_core::grid_spectral::{Field, FieldPair, GridSpec};
use fchoquard_core::ground_state::{
    solve_coupled, solve_general, solve_scalar,
    CoupledGroundState, GroundState, IterationRecord,
};
use fchoquard_core::io::{FieldDump, ModelSection, Table};
use fchoquard_core::model::{Functional, KernelSpec, ValidationReport};
use num_complex::Complex;
use serde_json::{json, Value};

use crate::cli::{Command, InitArg, TimeArgs};
use crate::run::{Failure, Outcome, Run};

pub fn execute(command: &Command, run: &mut Run) -> Outcome {
    match command {
        Command::Validate { .. } => validate(run),
        Command::Solve { init, .. } => solve(run, init),
        Command::SolveCoupled { init, decoupled, .. } => solve_pair(run, init, *decoupled),
        Command::Evolve { init, time, .. } => evolve(run, init, time),
        Command::Stability { time, eps, members, common } => {
            stability(run, time, *eps, *members, common.deterministic)
        }
        Command::ScanSigma { splits, .. } => scan_sigma(run, splits),
        Command::ScalingCurve { init, thetas, count, .. } => scaling(run, init, thetas, *count),
        Command::Rearrange { init, .. } => rearrange(run, init),
        Command::CheckKernel { .. } => check_kernel(run),
        Command::GnProbe { samples, .. } => gn_probe(run, *samples),
    }
}

fn report_json(r: &ValidationReport) -> Value {
    json!({ "ok": r.ok(), "violations": r.violations })
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn validate(run: &mut Run) -> Outcome {
    let report = run.config.validate();
    run.save_json("validation.json", &report_json(&report))?;
    if !report.ok() {
        return Err(Failure::Invalid(report.to_string()));
    }
    println!("{} model: ok", run.config.model.kind());
    Ok(())
}

fn check_kernel(run: &mut Run) -> Outcome {
    let reports = run.config.kernel_reports()?;
    let mut all_ok = true;
    let mut entries = Vec::new();
    let mut text = Vec::new();
    for (k, r) in &reports {
        let name = match k {
            KernelSpec::Riesz { beta } => format!("riesz(beta = {beta})"),
            KernelSpec::Tabulated(t) => format!("tabulated({} samples on [{}, {}])", t.values.len(), t.r_min, t.r_max),
        };
        let verdict = if r.ok() { "H1-H3 pass".to_owned() } else { r.to_string() };
        println!("{name}: {verdict}");
        text.push(format!("{name}: {verdict}"));
        all_ok &= r.ok();
        entries.push(json!({ "kernel": k, "report": report_json(r) }));
    }
    run.save_json("kernel_report.json", &Value::Array(entries))?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Invalid(text.join("\n")))
    }
}

fn load_init(path: &Path, grid: &GridSpec<f64>, components: usize) -> Outcome<Vec<Field<f64>>> {
    let dump = FieldDump::load(path)?;
    dump.grid().ensure_same(grid)?;
    if dump.components.len() < components {
        return Err(Failure::Invalid(format!(
            "{} holds {} component(s), {components} needed",
            path.display(),
            dump.components.len()
        )));
    }
    Ok(dump.components.into_iter().take(components).collect())
}

fn scalar_init(run: &Run, init: &InitArg) -> Outcome<Option<Field<f64>>> {
    let grid = run.config.grid_spec()?;
    match &init.init {
        Some(p) => Ok(load_init(p, &grid, 1)?.pop()),
        None => Ok(None),
    }
}

fn pair_init(run: &Run, init: &InitArg) -> Outcome<Option<FieldPair<f64>>> {
    let grid = run.config.grid_spec()?;
    match &init.init {
        Some(p) => {
            let mut v = load_init(p, &grid, 2)?;
            let second = v.pop().expect("two components");
            let first = v.pop().expect("two components");
            Ok(Some(FieldPair::new(first, second)?))
        }
        None => Ok(None),
    }
}

fn history_table(history: &[IterationRecord<f64>], masses: &[f64], stride: usize) -> Outcome<Table> {
    let k = masses.len();
    let mut cols = vec!["iter".to_owned(), "energy".to_owned()];
    let suffix = |name: &str, j: usize| if k == 1 { name.to_owned() } else { format!("{name}{}", j + 1) };
    for name in ["mass", "omega", "residual"] {
        cols.extend((0..k).map(|j| suffix(name, j)));
    }
    let mut t = Table::new(&cols);
    let last = history.len().saturating_sub(1);
    for (i, h) in history.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let mut row = vec![h.iteration as f64, h.energy];
        row.extend_from_slice(masses);
        row.extend(h.omega.iter().copied());
        row.extend(h.residual.iter().copied());
        t.push(row)?;
    }
    Ok(t)
}

fn ground_state(run: &Run, init: Option<&Field<f64>>) -> Outcome<GroundState<f64>> {
    let grid = run.config.grid_spec()?;
    let flow = run.config.flow();
    Ok(match &run.config.model {
        ModelSection::Scalar(m) => solve_scalar(m, grid, &flow, init)?,
        ModelSection::General(_) => solve_general(&run.config.general_model()?, grid, &flow, init)?,
        ModelSection::Coupled(_) => {
            return Err(Failure::Invalid("this command needs a scalar or general model".into()))
        }
    })
}

fn print_warnings(w: &[String]) {
    for line in w {
        eprintln!("warning: {line}");
    }
}

fn sigma_of(run: &Run) -> Outcome<f64> {
    Ok(run.config.general_model()?.sigma)
}

fn record_ground_state(run: &mut Run, gs: &GroundState<f64>) -> Outcome {
    let alpha = run.config.model.alpha();
    let sigma = sigma_of(run)?;
    let field_file = run.config.outputs.field_file.clone();
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_dump(&field_file, &FieldDump::single(alpha, gs.u.clone()))?;
    let table = history_table(&gs.history, &[sigma], run.config.outputs.history_stride)?;
    run.save_table(&diag_file, &table)?;
    run.save_json(
        "summary.json",
        &json!({
            "energy": gs.energy,
            "energy_parts": gs.energy_parts,
            "omega": gs.omega,
            "residual": gs.residual,
            "iterations": gs.iterations,
            "converged": gs.converged,
            "status": gs.status,
            "flags": gs.flags,
            "min_modulus": gs.min_modulus,
            "boundary_mass": gs.boundary_mass,
            "warnings": gs.warnings,
        }),
    )
}

fn not_converged(status: impl std::fmt::Debug, residual: impl std::fmt::Display) -> Failure {
    Failure::NotConverged(format!("status {status:?}, residual {residual}"))
}

fn solve(run: &mut Run, init: &InitArg) -> Outcome {
    let u0 = scalar_init(run, init)?;
    let gs = ground_state(run, u0.as_ref())?;
    record_ground_state(run, &gs)?;
    println!("energy   = {:.12e}", gs.energy);
    println!("omega    = {:.12e}", gs.omega);
    println!("residual = {:.3e} after {} iterations ({:?})", gs.residual, gs.iterations, gs.status);
    println!("flags    = {:?}", gs.flags);
    print_warnings(&gs.warnings);
    if gs.converged {
        Ok(())
    } else {
        Err(not_converged(gs.status, gs.residual))
    }
}

fn coupled_ground_state(run: &Run, init: Option<&FieldPair<f64>>) -> Outcome<CoupledGroundState<f64>> {
    let m = run.config.coupled_model()?;
    Ok(solve_coupled(m, run.config.grid_spec()?, &run.config.flow(), init)?)
}

fn solve_pair(run: &mut Run, init: &InitArg, decoupled: bool) -> Outcome {
    let m = run.config.coupled_model()?.clone();
    let u0 = pair_init(run, init)?;
    let gs = coupled_ground_state(run, u0.as_ref())?;
    let field_file = run.config.outputs.field_file.clone();
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_dump(&field_file, &FieldDump::new(m.alpha, vec![gs.u1.clone(), gs.u2.clone()])?)?;
    let table = history_table(&gs.history, &[m.sigma1, m.sigma2], run.config.outputs.history_stride)?;
    run.save_table(&diag_file, &table)?;
    let mut summary = json!({
        "energy": gs.energy,
        "energy_parts": gs.energy_parts,
        "omega": [gs.omega1, gs.omega2],
        "residual": [gs.residuals.0, gs.residuals.1],
        "iterations": gs.iterations,
        "converged": gs.converged,
        "status": gs.status,
        "flags": gs.flags,
        "boundary_mass": gs.boundary_mass,
        "warnings": gs.warnings,
    });
    println!("energy   = {:.12e}", gs.energy);
    println!("omega    = ({:.12e}, {:.12e})", gs.omega1, gs.omega2);
    println!("residual = ({:.3e}, {:.3e}) after {} iterations ({:?})", gs.residuals.0, gs.residuals.1, gs.iterations, gs.status);
    println!("flags    = {:?}", gs.flags);
    print_warnings(&gs.warnings);
    let mut all_converged = gs.converged;
    if decoupled {
        let grid = run.config.grid_spec()?;
        let flow = run.config.flow();
        let parts = [solve_scalar(&m.component(1), grid, &flow, None)?, solve_scalar(&m.component(2), grid, &flow, None)?];
        let sum = parts[0].energy + parts[1].energy;
        all_converged &= parts.iter().all(|p| p.converged);
        summary["decoupled_energies"] = json!([parts[0].energy, parts[1].energy]);
        summary["coupling_margin"] = json!(sum - gs.energy);
        println!("decoupled sum = {sum:.12e}, margin = {:.6e}", sum - gs.energy);
    }
    run.save_json("summary.json", &summary)?;
    if all_converged {
        Ok(())
    } else {
        Err(not_converged(gs.status, format!("{:?}", gs.residuals)))
    }
}

fn time_config(run: &Run, time: &TimeArgs) -> Outcome<PropagatorConfig> {
    let mut cfg = run.config.dynamics.clone();
    if let Some(dt) = time.dt {
        cfg.dt = dt;
    }
    if let Some(t) = time.t_final {
        cfg.t_final = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn conservation_table(cons: &Conservation<f64>) -> Outcome<Table> {
    let k = cons.records.first().map_or(1, |r| r.masses.len());
    let mut cols = vec!["time".to_owned()];
    if k == 1 {
        cols.push("mass".into());
    } else {
        cols.extend((1..=k).map(|j| format!("mass{j}")));
    }
    cols.push("energy".into());
    let mut t = Table::new(&cols);
    for r in &cons.records {
        let mut row = vec![r.time];
        row.extend(r.masses.iter().copied());
        row.push(opt(r.energy));
        t.push(row)?;
    }
    Ok(t)
}

fn propagate<E: Evolution<f64>>(ev: &mut E, cfg: &PropagatorConfig) -> Outcome<Conservation<f64>> {
    let mut cons = Conservation::default();
    match run_observed(ev, cfg, &mut cons, |_| Ok(())) {
        Ok(()) => Ok(cons),
        Err(e) => Err(e.into()),
    }
}

fn require_converged(converged: bool, what: &str) -> Outcome {
    if converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!("{what}: the ground state did not converge")))
    }
}

fn evolve(run: &mut Run, init: &InitArg, time: &TimeArgs) -> Outcome {
    let cfg = time_config(run, time)?;
    let grid = run.config.grid_spec()?;
    let alpha = run.config.model.alpha();
    let diag_file = run.config.outputs.diagnostics_file.clone();
    let (cons, final_dump) = match &run.config.model {
        ModelSection::Coupled(m) => {
            let m = m.clone();
            let u0 = match pair_init(run, init)? {
                Some(p) => p,
                None => {
                    let gs = coupled_ground_state(run, None)?;
                    require_converged(gs.converged, "evolve")?;
                    FieldPair::new(gs.u1, gs.u2)?
                }
            };
            let mut ev = CoupledPropagator::new(&u0, &m, &cfg)?;
            let cons = propagate(&mut ev, &cfg)?;
            let p = ev.pair();
            (cons, FieldDump::new(alpha, vec![p.first, p.second])?)
        }
        _ => {
            let u0 = match scalar_init(run, init)? {
                Some(u) => u,
                None => {
                    let gs = ground_state(run, None)?;
                    require_converged(gs.converged, "evolve")?;
                    gs.u
                }
            };
            let f = Functional::general(&run.config.general_model()?, grid, cfg.convolution)?;
            let mut ev = ScalarPropagator::from_functional(f, &u0)?;
            let cons = propagate(&mut ev, &cfg)?;
            (cons, FieldDump::single(alpha, ev.field().clone()))
        }
    };
    run.save_dump("final_state.fchq", &final_dump)?;
    run.save_table(&diag_file, &conservation_table(&cons)?)?;
    run.save_json(
        "summary.json",
        &json!({
            "dt": cons.dt,
            "t_final": cfg.t_final,
            "mass_drift": cons.mass_drift,
            "mass_step_drift": cons.mass_step_drift,
            "energy_drift": cons.energy_drift,
        }),
    )?;
    println!("mass drift   = {:.3e} (per step {:.3e})", cons.mass_drift, cons.mass_step_drift);
    println!("energy drift = {:.3e}", cons.energy_drift);
    Ok(())
}

/// Runs `f` for every seed, concurrently unless `ordered`.
fn ensemble<R: Send, F: Fn(u64) -> R + Sync>(seeds: &[u64], ordered: bool, f: F) -> Vec<R> {
    if ordered {
        return seeds.iter().map(|&s| f(s)).collect();
    }
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = seeds.iter().map(|&s| scope.spawn(move || f(s))).collect();
        handles.into_iter().map(|h| h.join().expect("ensemble member panicked")).collect()
    })
}

fn stability(run: &mut Run, time: &TimeArgs, eps: f64, members: u64, ordered: bool) -> Outcome {
    if members == 0 {
        return Err(Failure::Invalid("--members must be at least 1".into()));
    }
    let cfg = time_config(run, time)?;
    let seeds: Vec<u64> = (0..members).map(|k| run.config.seed.wrapping_add(k)).collect();
    let alpha = run.config.model.alpha();
    let field_file = run.config.outputs.field_file.clone();
    let reports: Vec<fchoquard_core::Result<StabilityReport<f64>>> = match &run.config.model {
        ModelSection::Scalar(m) => {
            let m = m.clone();
            let gs = ground_state(run, None)?;
            run.save_dump(&field_file, &FieldDump::single(alpha, gs.u.clone()))?;
            require_converged(gs.converged, "stability")?;
            ensemble(&seeds, ordered, |s| stability_experiment(&gs, &m, eps, &cfg, s))
        }
        ModelSection::Coupled(m) => {
            let m = m.clone();
            let gs = coupled_ground_state(run, None)?;
            run.save_dump(&field_file, &FieldDump::new(alpha, vec![gs.u1.clone(), gs.u2.clone()])?)?;
            require_converged(gs.converged, "stability")?;
            ensemble(&seeds, ordered, |s| stability_experiment_coupled(&gs, &m, eps, &cfg, s))
        }
        ModelSection::General(_) => {
            return Err(Failure::Invalid("stability needs a scalar or coupled model".into()))
        }
    };
    let reports = reports.into_iter().collect::<fchoquard_core::Result<Vec<_>>>()?;
    let mut series = Table::new(&["member", "seed", "time", "distance"]);
    let mut members_table = Table::new(&[
        "member", "seed", "initial_distance", "max_distance", "growth", "mass_drift", "energy_drift", "blowup_time",
    ]);
    for (k, (r, &s)) in reports.iter().zip(&seeds).enumerate() {
        for (t, d) in r.times.iter().zip(&r.modulated_distance) {
            series.push(vec![k as f64, s as f64, *t, *d])?;
        }
        members_table.push(vec![
            k as f64,
            s as f64,
            r.initial_distance,
            r.max_distance,
            r.growth(),
            r.mass_drift,
            r.energy_drift,
            opt(r.blowup_time),
        ])?;
        println!(
            "member {k} (seed {s}): initial {:.3e}, max {:.3e}, growth {:.3}{}",
            r.initial_distance,
            r.max_distance,
            r.growth(),
            r.blowup_time.map_or(String::new(), |t| format!(", blew up at t = {t}"))
        );
    }
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_table(&diag_file, &series)?;
    run.save_table("members.csv", &members_table)?;
    let worst = reports.iter().map(|r| r.growth()).fold(0.0, f64::max);
    run.save_json(
        "summary.json",
        &json!({ "eps": eps, "seeds": seeds, "max_growth": worst, "dt": cfg.dt, "t_final": cfg.t_final }),
    )
}

fn scan_sigma(run: &mut Run, fractions: &[f64]) -> Outcome {
    let m = run.config.scalar_model()?.clone();
    let splits: Vec<f64> = fractions.iter().map(|f| f * m.sigma).collect();
    let scan = subadditivity_scan(&m, &splits, run.config.grid_spec()?, &run.config.flow())?;
    let mut t = Table::new(&["split_fraction", "sigma_split", "energy_split", "energy_rest", "energy_total", "margin"]);
    for (j, f) in fractions.iter().enumerate() {
        t.push(vec![*f, scan.splits[j], scan.energy_split[j], scan.energy_rest[j], scan.energy_total, opt(scan.margins[j])])?;
        match scan.margins[j] {
            Some(v) => println!("split {f}: margin {v:.6e}"),
            None => println!("split {f}: a sub-solve did not converge"),
        }
    }
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_table(&diag_file, &t)?;
    run.save_json(
        "summary.json",
        &json!({ "energy_total": scan.energy_total, "margins": scan.margins, "strictly_subadditive": scan.strictly_subadditive() }),
    )?;
    if scan.margins.iter().all(Option::is_some) {
        Ok(())
    } else {
        Err(Failure::NotConverged("some sub-solves did not converge".into()))
    }
}

fn trial_field(run: &Run, init: &InitArg, sigma: f64) -> Outcome<Field<f64>> {
    let grid = run.config.grid_spec()?;
    Ok(match scalar_init(run, init)? {
        Some(mut u) => {
            u.normalize_to(sigma)?;
            u
        }
        None => {
            let w = grid.length() / 16.0;
            let mut u = Field::from_fn(grid, |x| {
                Complex::new((-x.iter().map(|c| c * c).sum::<f64>() / (2.0 * w * w)).exp(), 0.0)
            })?;
            u.normalize_to(sigma)?;
            u
        }
    })
}

fn scaling(run: &mut Run, init: &InitArg, thetas: &[f64], count: usize) -> Outcome {
    let m = run.config.scalar_model()?.clone();
    let f = trial_field(run, init, m.sigma)?;
    let (lo, hi) = scaling_range(&f);
    let (lo, hi) = (lo * (1.0 + 1e-9), hi * (1.0 - 1e-9));
    let ladder: Vec<f64> = if thetas.is_empty() {
        if count < 2 || lo >= hi {
            return Err(Failure::Invalid(format!("cannot build a θ ladder of {count} points on [{lo}, {hi}]")));
        }
        (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
    } else {
        thetas.to_vec()
    };
    let points = scaling_curve(&f, &m, &ladder)?;
    let mut t = Table::new(&["theta", "energy", "seminorm_sq", "mass_defect"]);
    for p in &points {
        t.push(vec![p.theta, p.energy, p.seminorm_sq, p.mass_defect])?;
    }
    let crossing = energy_crossing(&f, &m, lo, hi, 1e-8).ok();
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_table(&diag_file, &t)?;
    run.save_json("summary.json", &json!({ "theta_range": [lo, hi], "energy_crossing": crossing }))?;
    println!("admissible θ range [{lo:.4}, {hi:.4}], {} points", points.len());
    if let Some(c) = crossing {
        println!("energy changes sign at θ = {c:.8}");
    }
    Ok(())
}

fn rearrange(run: &mut Run, init: &InitArg) -> Outcome {
    let m = run.config.scalar_model()?.clone();
    let grid = run.config.grid_spec()?;
    let u = match scalar_init(run, init)? {
        Some(u) => u,
        None => {
            let mut u = random_smooth_field(grid, run.config.seed, 0);
            u.normalize_to(m.sigma)?;
            u
        }
    };
    let star = rearrange_decreasing(&u);
    let check = RearrangementCheck::new(&u, &m)?;
    let mut cols = Vec::new();
    let mut row = Vec::new();
    for (r, before, after) in &check.lr_norms {
        cols.push(format!("l{r}_before"));
        cols.push(format!("l{r}_after"));
        row.extend([*before, *after]);
    }
    cols.extend(["coulomb_before", "coulomb_after", "seminorm_before", "seminorm_after"].map(String::from));
    row.extend([check.coulomb_before, check.coulomb_after, check.seminorm_before, check.seminorm_after]);
    let mut t = Table::new(&cols);
    t.push(row)?;
    run.save_dump("rearranged.fchq", &FieldDump::new(m.alpha, vec![u, star])?)?;
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_table(&diag_file, &t)?;
    for (r, before, after) in &check.lr_norms {
        println!("L^{r}: {before:.12e} -> {after:.12e}");
    }
    println!("Coulomb: {:.12e} -> {:.12e}", check.coulomb_before, check.coulomb_after);
    println!("seminorm²: {:.12e} -> {:.12e}", check.seminorm_before, check.seminorm_after);
    Ok(())
}

fn gn_probe(run: &mut Run, samples: usize) -> Outcome {
    let m = run.config.scalar_model()?.clone();
    let probe = gn_hls_probe(samples, &m, run.config.grid_spec()?, run.config.seed)?;
    let mut t = Table::new(&["sample", "gn_ratio", "hls_ratio"]);
    for (i, (g, h)) in probe.gn_ratios.iter().zip(&probe.hls_ratios).enumerate() {
        t.push(vec![i as f64, *g, *h])?;
    }
    let diag_file = run.config.outputs.diagnostics_file.clone();
    run.save_table(&diag_file, &t)?;
    run.save_json("summary.json", &json!({ "samples": samples, "gn_max": probe.gn_max, "hls_max": probe.hls_max }))?;
    println!("largest GN ratio  = {:.6e}", probe.gn_max);
    println!("largest HLS ratio = {:.6e}", probe.hls_max);
    Ok(())
}
