use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use lprf::io::{self, FieldFile};
use lprf::pipeline::files;
use lprf::report::Report;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lprf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lprf"))
        .args(args)
        .env_remove("LPRF_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path, name: &str) -> Report {
    Report::parse_structured(&fs::read_to_string(dir.join(name)).unwrap(), name).unwrap()
}

#[test]
fn analyze_zero_data_reports_zeros() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", "data.profile = zero\n");
    let out = tmp.path().join("a");
    let o = lprf(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out, "analysis.kv");
    for key in ["data.besov", "data.weak_l3", "data.l2_uloc", "data.max_abs", "data.symmetry_defect", "data.divergence_ratio"] {
        assert_eq!(r.number(key), Some(0.0), "{key}");
    }
    assert_eq!(r.boolean("data.divergence_free"), Some(true));
}

#[test]
fn analyze_flags_radial_data_and_reports_its_weak_norm() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r.cfg", "data.profile = radial\ndata.amplitude = 1\ngrid.n = 64\n");
    let out = tmp.path().join("a");
    let o = lprf(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out, "analysis.kv");
    let (w, exact) = (r.number("data.weak_l3").unwrap(), r.number("data.weak_l3_reference").unwrap());
    assert!((w - exact).abs() < 0.05 * exact, "{w} vs {exact}");
    assert!(r.number("data.symmetry_defect").unwrap() < 1e-12);
    assert_eq!(r.boolean("data.divergence_free"), Some(false));
    assert!(fs::read_to_string(out.join("lp_blocks.csv")).unwrap().starts_with("j,magnitude\n"));
}

#[test]
fn malformed_config_exits_with_2_naming_line_and_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "data.profile = zero\ngrid.n = 30\n");
    let o = lprf(&["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "bad2.cfg", "# comment\nsolver.bogus = 1\n");
    let o = lprf(&["solve", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("line 2") && msg.contains("solver.bogus"), "{msg}");
}

#[test]
fn zero_solve_passes_quickly_and_verify_reproduces_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", "data.profile = zero\n");
    let run = tmp.path().join("run");
    let start = Instant::now();
    let o = lprf(&["solve", "--config", &cfg, "--out", run.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let r = report(&run, files::REPORT);
    assert_eq!(r.boolean("local_energy.all_passed"), Some(true));
    assert_eq!(r.boolean("cutoff.small"), Some(true));
    assert_eq!(r.number("compose.sup_l2_a"), Some(0.0));

    let first = lprf(&["verify", run.to_str().unwrap()]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stderr(&first).contains("matches solve-time report: yes"));
    let once = fs::read(run.join(files::VERIFY)).unwrap();
    assert_eq!(once, fs::read(run.join(files::REPORT)).unwrap());
    let second = lprf(&["verify", run.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(once, fs::read(run.join(files::VERIFY)).unwrap());
}

#[test]
fn truncated_field_file_is_an_integrity_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", "data.profile = zero\ngrid.n = 16\nsolver.modes = 16\n");
    let run = tmp.path().join("run");
    assert!(lprf(&["solve", "--config", &cfg, "--out", run.to_str().unwrap()]).status.success());
    let path = run.join(files::W);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 17]).unwrap();
    let o = lprf(&["verify", run.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("W.lprf"), "{}", stderr(&o));
    fs::remove_file(&path).unwrap();
    let o = lprf(&["verify", run.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("W.lprf"));
}

fn perturb(path: &Path, rng: &mut ChaCha8Rng) {
    let name = path.display().to_string();
    let mut file = FieldFile::read(path).unwrap();
    let scale = file.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in &mut file.data {
        *x += 0.01 * scale * rng.gen_range(-1.0..1.0);
    }
    file.write(path).unwrap_or_else(|e| panic!("{name}: {e}"));
}

#[test]
fn noisy_fields_shift_slacks_and_grow_the_symmetry_defect() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dss.cfg",
        "data.profile = swirl\ndata.amplitude = 0.2\ndata.modulation = 0.3\ngrid.n = 16\ngrid.half_width = 6\nsolver.modes = 16\ndiagnostics.rates = false\n",
    );
    let run = tmp.path().join("run");
    let o = lprf(&["solve", "--config", &cfg, "--out", run.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let clean = report(&run, files::REPORT);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for f in [files::V0, files::A, files::B] {
        perturb(&run.join(f), &mut rng);
    }
    let o = lprf(&["verify", run.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("matches solve-time report: no"));
    let noisy = report(&run, files::VERIFY);
    let defect = |r: &Report| r.number("data.v0.symmetry_defect").unwrap();
    assert!(defect(&noisy) > 100.0 * defect(&clean).max(1e-14), "{} vs {}", defect(&noisy), defect(&clean));
    let shifted = (0..12)
        .filter(|i| {
            let key = format!("local_energy.case{i:02}.slack");
            clean.number(&key) != noisy.number(&key)
        })
        .count();
    assert_eq!(shifted, 12);
}

#[test]
fn failing_stage_is_named_and_partial_artifacts_are_kept() {
    let tmp = tempfile::tempdir().unwrap();
    // the background tail is far above the smallness target
    let cfg = write_config(
        tmp.path(),
        "big.cfg",
        "data.profile = swirl\ndata.amplitude = 3\ngrid.n = 16\nsolver.modes = 16\nbackground.alpha = 0.1\n",
    );
    let run = tmp.path().join("run");
    let o = lprf(&["solve", "--config", &cfg, "--out", run.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("cutoff"), "{}", stderr(&o));
    assert!(fs::read_to_string(run.join(files::FAILURE)).unwrap().contains("cutoff"));
    assert!(run.join(files::U0).exists() && !run.join(files::W).exists());
    let u0 = FieldFile::read(&run.join(files::U0)).unwrap();
    assert!(io::profile_from_file(&u0, "U0.lprf").is_ok());
}

#[test]
fn sweep_writes_a_table_and_rejects_short_axes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.cfg",
        "data.profile = swirl\ndata.amplitude = 0.05\ngrid.n = 16\nsweep.k = 8, 12, 16\nsolver.modes = 16\n",
    );
    let out = tmp.path().join("sweep");
    let o = lprf(&["sweep", "--config", &cfg, "--axis", "k", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("sweep_k.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,status,energy_norm,fixed_point_residual,eq_a_relative,cauchy");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("8,ok,") && lines[3].starts_with("16,ok,"));

    let short = write_config(tmp.path(), "short.cfg", "data.profile = zero\nsweep.eps_moll = 0.1\n");
    let o = lprf(&["sweep", "--config", &short, "--axis", "eps_moll"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("at least 3"), "{}", stderr(&o));
    let o = lprf(&["sweep", "--config", &short, "--axis", "dt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_settings_are_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", "data.profile = zero\ngrid.n = 16\nsolver.modes = 16\n");
    let o = Command::new(env!("CARGO_BIN_EXE_lprf"))
        .args(["analyze", "--config", &cfg])
        .env("LPRF_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_lprf"))
        .args(["analyze", "--config", &cfg, "--threads", "2"])
        .env("LPRF_THREADS", "many")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn seed_and_overrides_are_applied_and_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.cfg", "data.profile = zero\n");
    let out = tmp.path().join("a");
    let o = lprf(&[
        "analyze", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "42", "--set", "grid.n=16", "--set", "solver.modes=16",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out, "analysis.kv");
    assert_eq!(r.number("run.seed"), Some(42.0));
    assert_eq!(r.number("grid.n"), Some(16.0));
    let o = lprf(&["analyze", "--config", &cfg, "--set", "grid.n"]);
    assert_eq!(o.status.code(), Some(2));
}
