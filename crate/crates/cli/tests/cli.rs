use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fchoquard_core::io::{FieldDump, Manifest, Table};
use serde_json::{json, Value};
use tempfile::TempDir;

fn reference(points: usize) -> Value {
    json!({
        "model": {"kind": "scalar", "dim": 2, "alpha": 0.8, "beta": 1.5, "a": 1.0,
                  "lambda": 1.0, "s": 2.5, "p": 2.0, "sigma": 1.0},
        "grid": {"dim": 2, "points": points, "length": 16.0},
        "dynamics": {"dt": 0.01, "t_final": 1.0, "output_stride": 10, "conservation_check_stride": 10},
        "seed": 5
    })
}

fn coupled() -> Value {
    json!({
        "model": {"kind": "coupled", "dim": 2, "alpha": 0.8, "beta": 1.5, "lambda1": 1.0,
                  "lambda2": 0.8, "c": 0.5, "p1": 2.0, "p2": 2.0, "q": 2.2,
                  "sigma1": 1.0, "sigma2": 0.8},
        "grid": {"dim": 2, "points": 64, "length": 16.0},
        "dynamics": {"dt": 0.01, "t_final": 1.0, "output_stride": 10, "conservation_check_stride": 10}
    })
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn fchoquard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fchoquard")).args(args).output().unwrap()
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "-c", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fchoquard(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn validate_names_the_violated_exponent_window() {
    let dir = TempDir::new().unwrap();
    let mut bad = reference(64);
    bad["model"]["alpha"] = json!(0.5);
    bad["model"]["beta"] = json!(1.0);
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let o = run("validate", &cfg, &dir.path().join("v"), &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("p < (N+2α+β)/N"), "{}", stderr(&o));
    assert!(stderr(&o).contains("bound = 2"), "{}", stderr(&o));

    let good = write_config(dir.path(), "good.json", &reference(64));
    let o = run("validate", &good, &dir.path().join("g"), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("g/manifest.json").exists());
}

#[test]
fn compute_commands_refuse_invalid_configs_before_running() {
    let dir = TempDir::new().unwrap();
    let mut bad = reference(64);
    bad["model"]["p"] = json!(3.0);
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let out = dir.path().join("o");
    let o = run("solve", &cfg, &out, &[]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());

    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    assert_eq!(code(&run("solve", &dir.path().join("broken.json"), &out, &[])), 2);
    let mut typo = reference(64);
    typo["sede"] = json!(1);
    let cfg = write_config(dir.path(), "typo.json", &typo);
    assert_eq!(code(&run("solve", &cfg, &out, &[])), 2);
    let cfg = write_config(dir.path(), "grid.json", &reference(48));
    assert_eq!(code(&run("solve", &cfg, &out, &[])), 2);
}

#[test]
fn io_failures_exit_with_4() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run("solve", &missing, &dir.path().join("o"), &[])), 4);

    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert_eq!(code(&run("solve", &cfg, &blocker.join("sub"), &[])), 4);

    let garbage = dir.path().join("garbage.fchq");
    fs::write(&garbage, b"FCHQ1 too short").unwrap();
    let o = run("solve", &cfg, &dir.path().join("o"), &["--init", garbage.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn solve_reference_writes_dump_and_diagnostics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(128));
    let out = dir.path().join("solve");
    let o = run("solve", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let dump = FieldDump::load(out.join("ground_state.fchq")).unwrap();
    assert_eq!(dump.components.len(), 1);
    assert_eq!(dump.grid().points(), 128);
    assert_eq!(dump.alpha, 0.8);
    assert!((dump.components[0].mass() - 1.0).abs() < 1e-12);

    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    assert_eq!(t.columns(), ["iter", "energy", "mass", "omega", "residual"]);
    let omega = t.column("omega").unwrap();
    assert!(*omega.last().unwrap() > 0.0);
    assert!(*t.column("residual").unwrap().last().unwrap() < 1e-8);

    let s = summary(&out);
    assert_eq!(s["converged"], json!(true));
    assert!(s["energy"].as_f64().unwrap() < 0.0);

    let m = Manifest::load(out.join("manifest.json")).unwrap();
    assert_eq!(m.command, "solve");
    assert_eq!(m.exit_code, 0);
    assert_eq!(m.seed, 5);
    assert!(m.outputs.contains(&"ground_state.fchq".to_owned()));
    assert!(!m.version.is_empty());
}

#[test]
fn nonconvergence_exits_with_3_and_keeps_artifacts() {
    let dir = TempDir::new().unwrap();
    let mut c = reference(64);
    c["solver"] = json!({"max_iters": 3});
    let cfg = write_config(dir.path(), "short.json", &c);
    let out = dir.path().join("o");
    let o = run("solve", &cfg, &out, &[]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(out.join("ground_state.fchq").exists());
    assert_eq!(Manifest::load(out.join("manifest.json")).unwrap().exit_code, 3);
}

#[test]
fn deterministic_runs_and_manifest_replays_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run("stability", &cfg, out, &["--deterministic", "--tfinal", "0.5", "--members", "2"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["ground_state.fchq", "diagnostics.csv", "members.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let m = Manifest::load(a.join("manifest.json")).unwrap();
    let replay = dir.path().join("replay");
    let mut args = vec![m.command.as_str(), "-c"];
    let manifest_path = a.join("manifest.json");
    args.push(manifest_path.to_str().unwrap());
    args.extend(["--out", replay.to_str().unwrap()]);
    args.extend(m.arguments.iter().map(String::as_str));
    let o = fchoquard(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(a.join("members.csv")).unwrap(), fs::read(replay.join("members.csv")).unwrap());

    let parallel = dir.path().join("p");
    let o = run("stability", &cfg, &parallel, &["--tfinal", "0.5", "--members", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(a.join("members.csv")).unwrap(), fs::read(parallel.join("members.csv")).unwrap());
}

#[test]
fn seed_and_grid_overrides_reach_the_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(128));
    let out = dir.path().join("o");
    let o = run("gn-probe", &cfg, &out, &["--seed", "11", "--grid", "32", "--samples", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = Manifest::load(out.join("manifest.json")).unwrap();
    assert_eq!(m.seed, 11);
    assert_eq!(m.config.grid.points, 32);
    assert_eq!(m.config.seed, 11);
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    assert_eq!(t.columns(), ["sample", "gn_ratio", "hls_ratio"]);
    assert_eq!(t.rows().len(), 4);
}

#[test]
fn scan_sigma_margins_are_positive() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let out = dir.path().join("o");
    let o = run("scan-sigma", &cfg, &out, &["--splits", "0.25,0.5,0.75"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    let margins = t.column("margin").unwrap();
    assert_eq!(margins.len(), 3);
    assert!(margins.iter().all(|&m| m > 0.0), "{margins:?}");
    assert_eq!(t.column("sigma_split").unwrap(), vec![0.25, 0.5, 0.75]);
}

#[test]
fn stability_keeps_distance_within_five_times_initial() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let out = dir.path().join("o");
    let o = run("stability", &cfg, &out, &["--eps", "0.01", "--tfinal", "20"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    assert_eq!(t.columns(), ["member", "seed", "time", "distance"]);
    let d = t.column("distance").unwrap();
    let max = d.iter().copied().fold(0.0, f64::max);
    assert!(max <= 5.0 * d[0], "{max} vs {}", d[0]);
    assert!((t.column("time").unwrap().last().unwrap() - 20.0).abs() < 1e-9);
}

#[test]
fn check_kernel_reports_riesz_pass_and_exponential_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let o = run("check-kernel", &cfg, &dir.path().join("a"), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("H1-H3 pass"));

    let n = 64;
    let (r_min, r_max) = (0.01f64, 20.0f64);
    let values: Vec<f64> = (0..n)
        .map(|i| (-(r_min * (r_max / r_min).powf(i as f64 / (n - 1) as f64))).exp())
        .collect();
    let kernel = json!({"type": "tabulated", "r_min": r_min, "r_max": r_max, "values": values,
                        "weak_index": 2.0, "gamma": 0.5});
    fs::write(dir.path().join("exp.json"), kernel.to_string()).unwrap();
    let general = json!({
        "model": {"kind": "general", "dim": 2, "alpha": 0.8, "sigma": 1.0,
                  "power_terms": [{"a": 1.0, "s": 2.5}],
                  "hartree_terms": [{"lambda": 1.0, "p": 2.0, "kernel": {"file": "exp.json"}}]},
        "grid": {"dim": 2, "points": 32, "length": 16.0}
    });
    let cfg = write_config(dir.path(), "general.json", &general);
    let o = run("check-kernel", &cfg, &dir.path().join("b"), &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("H2"), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b/kernel_report.json")).unwrap()).unwrap();
    assert_eq!(report[0]["report"]["ok"], json!(false));
}

#[test]
fn coupled_solve_beats_decoupled_sum_and_evolution_conserves_mass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "coupled.json", &coupled());
    let out = dir.path().join("s");
    let o = run("solve-coupled", &cfg, &out, &["--decoupled"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&out);
    assert!(s["coupling_margin"].as_f64().unwrap() > 0.0);
    let dump = FieldDump::load(out.join("ground_state.fchq")).unwrap();
    assert_eq!(dump.components.len(), 2);
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    assert!(t.columns().contains(&"omega2".to_owned()));

    let ev = dir.path().join("e");
    let init = out.join("ground_state.fchq");
    let o = run("evolve", &cfg, &ev, &["--init", init.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::load(ev.join("diagnostics.csv")).unwrap();
    assert_eq!(t.columns(), ["time", "mass1", "mass2", "energy"]);
    for (col, sigma) in [("mass1", 1.0), ("mass2", 0.8)] {
        for m in t.column(col).unwrap() {
            assert!(((m - sigma) / sigma).abs() < 1e-11, "{col}: {m}");
        }
    }
    assert_eq!(FieldDump::load(ev.join("final_state.fchq")).unwrap().components.len(), 2);
}

#[test]
fn rearrange_and_scaling_curve_write_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &reference(64));
    let out = dir.path().join("r");
    let o = run("rearrange", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    let (b, a) = (t.column("l2_before").unwrap()[0], t.column("l2_after").unwrap()[0]);
    assert!(((a - b) / b).abs() < 1e-13);
    assert!(t.column("coulomb_after").unwrap()[0] >= t.column("coulomb_before").unwrap()[0] * (1.0 - 1e-8));
    assert_eq!(FieldDump::load(out.join("rearranged.fchq")).unwrap().components.len(), 2);

    let out = dir.path().join("s");
    let o = run("scaling-curve", &cfg, &out, &["--count", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::load(out.join("diagnostics.csv")).unwrap();
    assert_eq!(t.columns(), ["theta", "energy", "seminorm_sq", "mass_defect"]);
    assert_eq!(t.rows().len(), 6);
    let o = run("scaling-curve", &cfg, &dir.path().join("x"), &["--thetas", "100"]);
    assert_eq!(code(&o), 2);
}
