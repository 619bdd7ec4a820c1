use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ringsqz::params::f_p_for_finesse;
use ringsqz::PhysicalConfig;

const DEVICE: &str = r#"
[physical]
ring_radius = 50e-6
n_eff = 2.2
signal_wavelength = 1550e-9
chi2_eff = 54e-12
A_eff = 0.71e-12
Q_sI = 2e6
Q_pI = 8e5
"#;

fn knobs(g0: f64, tau_p: f64, f_s: f64, f_p: f64) -> String {
    format!("\n[knobs]\ng0 = {g0}\ntau_p = {tau_p}\nf_s = {f_s}\nf_p = {f_p}\n")
}

fn ringsqz(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringsqz"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.arg("--out-dir").arg(dir.join("out")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(1.7, 1.0, 0.03, 0.01))), &["run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("squeezing_db"));
    for f in ["trajectory.csv", "spectrum.csv", "summary.json"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f} missing");
    }
    let s = summary(tmp.path());
    let sq = s["summary"]["squeezing_db"].as_f64().unwrap();
    assert!((sq - 10.18).abs() < 0.05, "{sq}");
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);

    let traj = fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    assert!(traj.starts_with("# config_hash="));
    assert!(traj.lines().any(|l| l == "t,g,r,n_th,dx2,dy2,n_sig"));
}

#[test]
fn unpumped_run_reports_vacuum() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(0.0, 2.0, 0.05, 0.03))), &["run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(tmp.path());
    assert_eq!(s["summary"]["squeezing_db"].as_f64(), Some(0.0));
    assert_eq!(s["summary"]["antisqueezing_db"].as_f64(), Some(0.0));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = format!("{DEVICE}{}", knobs(1.0, 3.0, 0.045, 0.03));
    assert!(ringsqz(a.path(), Some(&cfg), &["run"]).status.success());
    assert!(ringsqz(b.path(), Some(&cfg), &["run"]).status.success());
    for f in ["trajectory.csv", "spectrum.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_field_is_a_config_error_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{DEVICE}{}", knobs(1.0, 3.0, 0.045, 0.03)).replace("A_eff = 0.71e-12\n", "");
    let o = ringsqz(tmp.path(), Some(&cfg), &["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("physical.A_eff"), "{}", stderr(&o));
}

#[test]
fn out_of_range_knob_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(1.0, 3.0, 1.2, 0.03))), &["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f_s"), "{}", stderr(&o));
}

#[test]
fn unknown_figure_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), None, &["replicate", "fig12"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig2"));
}

#[test]
fn replicate_family_writes_one_file_per_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), None, &["replicate", "fig3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    for f_p in ["0.01", "0.02", "0.03", "0.04", "0.05", "0.06"] {
        assert!(out.join(format!("fig3_f_p_{f_p}.csv")).exists());
    }
    assert!(out.join("fig3_summary.json").exists());
}

#[test]
fn replicate_contour_writes_matrices_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), None, &["replicate", "fig8", "--grid", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let csv = fs::read_to_string(out.join("fig8_squeezing_db.csv")).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 5);
    assert!(body[0].starts_with("g0\\tau_p,"));
    assert!(body.iter().all(|l| l.split(',').count() == 5));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fig8.json")).unwrap()).unwrap();
    assert_eq!(side["axis1_values"].as_array().unwrap().len(), 4);
    assert_eq!(side["failed_cells"].as_array().unwrap().len(), 0);
}

#[test]
fn sweep_requires_its_section() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(1.0, 3.0, 0.045, 0.03))), &["sweep"]);
    assert_eq!(o.status.code(), Some(2));

    let sweep = "\n[sweep]\naxis1 = { knob = \"f_s\", min = 0.03, max = 0.06, count = 3 }\naxis2 = { knob = \"tau_p\", min = 1.0, max = 3.0, count = 3 }\n";
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}{sweep}", knobs(1.0, 3.0, 0.045, 0.03))), &["sweep", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("out/sweep_squeezing_db.csv").exists());
    assert!(!tmp.path().join("out/sweep.json").exists());
}

#[test]
fn validate_pump_applies_bound_at_high_finesse() {
    let tmp = tempfile::tempdir().unwrap();
    let f_p = f_p_for_finesse(&PhysicalConfig::default(), 20.0);
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(1.0, 3.0, 0.05, f_p))), &["validate-pump"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"), "{}", stdout(&o));
    assert!(tmp.path().join("out/pump_comparison.csv").exists());
}

#[test]
fn validate_pump_flags_uncoupled_pump() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{}", knobs(1.0, 3.0, 0.05, 0.999999999999999))), &["validate-pump"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("uncoupled"), "{}", stdout(&o));
}

#[test]
fn unreachable_target_exits_with_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let opt = "\n[optimize]\ntarget_db = 3.5\nbounds = { g0 = [0.5, 1.0], tau_p = [1.0, 2.0], f_s = [0.45, 0.5], f_p = [0.01, 0.02] }\n";
    let o = ringsqz(tmp.path(), Some(&format!("{DEVICE}{opt}")), &["optimize"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(tmp.path().join("out/optimum.json").exists());
}
