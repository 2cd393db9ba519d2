use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use afp::spectral::{io, Grid};
use serde_json::Value;

fn afp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afp")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    afp::cli::read_result(path).unwrap()
}

fn minimize_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["minimize", "--beta", "1", "--gamma", "2", "--n", "64", "--box", "8", "--max-iter", "40", "--out", out];
    v.extend_from_slice(extra);
    v
}

#[test]
fn minimize_writes_every_output_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let ra = afp(&minimize_args(a, &[]));
    let rb = afp(&minimize_args(b, &[]));
    // 40 iterations do not reach the default tolerance
    assert_eq!(ra.status.code(), Some(3), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(rb.status.code(), Some(3));
    for f in ["result.json", "density.csv", "density.pgm", "phase.pgm", "field.bin", "iterations.csv"] {
        assert!(Path::new(a).join(f).is_file(), "missing {f}");
    }
    for f in ["field.bin", "iterations.csv", "density.csv", "density.pgm", "phase.pgm"] {
        assert_eq!(fs::read(Path::new(a).join(f)).unwrap(), fs::read(Path::new(b).join(f)).unwrap(), "{f} differs");
    }
    // identical apart from the echoed output directory
    let strip = |p: &str| {
        let mut v = json(&Path::new(p).join("result.json"));
        v["config"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(a), strip(b));

    let r = json(&Path::new(a).join("result.json"));
    assert_eq!(r["command"], "minimize");
    assert_eq!(r["grid"]["n"], 64);
    assert_eq!(r["coupling"]["beta"], 1.0);
    assert_eq!(r["iterations"], 40);
    assert_eq!(r["converged"], false);
    for key in ["total", "kinetic_magnetic", "quartic", "potential", "el_residual", "multiplier"] {
        assert!(r["report"][key].is_number(), "report.{key}");
    }
    assert!(r["klt_bound"].is_null(), "no closed-form critical coupling at odd β");

    let field = io::load_field(Path::new(a).join("field.bin")).unwrap();
    assert_eq!(*field.grid(), Grid::new(8.0, 64).unwrap());
    assert!((field.mass() - 1.0).abs() < 1e-12);

    let log = fs::read_to_string(Path::new(a).join("iterations.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("iter,energy,residual,step"));
    assert_eq!(log.lines().count(), 42);

    let pgm = fs::read(Path::new(a).join("density.pgm")).unwrap();
    let header = b"P5\n64 64\n65535\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 2 * 64 * 64);
}

#[test]
fn restart_from_a_saved_field() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    afp(&minimize_args(first.to_str().unwrap(), &[]));
    let init = format!("file:{}", first.join("field.bin").display());
    let r = afp(&minimize_args(second.to_str().unwrap(), &["--init", &init, "--perturbation", "0"]));
    assert!(matches!(r.status.code(), Some(0) | Some(3)), "{}", String::from_utf8_lossy(&r.stderr));
    let e1 = json(&first.join("result.json"))["report"]["total"].as_f64().unwrap();
    let e2 = json(&second.join("result.json"))["report"]["total"].as_f64().unwrap();
    assert!(e2 <= e1 + 1e-12, "restart raised the energy: {e1} -> {e2}");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nbeta = 1\ngamma = 2\nn = 64\nbox = 8\nmax_iter = 5\n").unwrap();
    let out = dir.path().join("o");
    let r = afp(&["--config", cfg.to_str().unwrap(), "minimize", "--max-iter", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    let j = json(&out.join("result.json"));
    assert_eq!(j["iterations"], 3, "command line wins over the file");
    assert_eq!(j["config"]["gamma"], 2.0);
    assert_eq!(j["grid"]["half_width"], 8.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    // strongly attractive without magnetic repulsion: the energy is unbounded below
    let r = afp(&["minimize", "--beta", "0", "--gamma", "-10", "--n", "64", "--box", "8", "--out", out]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(afp(&["minimize", "--n", "100", "--out", out]).status.code(), Some(1));
    assert_eq!(afp(&["minimize", "--potential", "quartic", "--out", out]).status.code(), Some(1));
    assert_eq!(afp(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(afp(&["--help"]).status.code(), Some(0));
}

#[test]
fn soliton_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let r = afp(&["soliton", "--p", "0,1", "--q", "1", "--verify", "--box", "32", "--n", "512", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let j = json(&out.join("result.json"));
    assert_eq!(j["pair"]["n_flux_half"], 1);
    assert_eq!(j["verification"]["nll_membership"], true);
    assert_eq!(j["verification"]["passed"], true);
    assert_eq!(j["verification"]["vorticity"]["m"], 0);
    assert!(j["report"]["total"].as_f64().unwrap().abs() < 1e-2);
    assert!(out.join("field.bin").is_file());

    // common roots make the pair degenerate
    let bad = afp(&["soliton", "--p", "-1,1", "--q", "1,-1", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn townes_and_scan() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t");
    assert_eq!(afp(&["townes", "--out", t.to_str().unwrap()]).status.code(), Some(0));
    let j = json(&t.join("result.json"));
    assert!((j["c_lgn_over_2pi"].as_f64().unwrap() - 0.931).abs() < 5e-3);
    assert!(fs::read_to_string(t.join("townes.csv")).unwrap().starts_with("r,tau\n"));

    let s = dir.path().join("scan");
    let r = afp(&[
        "scan-gamma", "--betas", "0", "--n", "64", "--box", "8", "--seeds", "1,2", "--max-iter", "300", "--workers", "1",
        "--out", s.to_str().unwrap(),
    ]);
    assert!(matches!(r.status.code(), Some(0) | Some(3)), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(s.join("scan.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("beta,gamma_star_estimate,bogomolnyi_floor,lgn_floor,vortex_count,converged"));
    assert_eq!(csv.lines().count(), 2);
    let j = json(&s.join("result.json"));
    let est = j["points"][0]["gamma_star_estimate"].as_f64().unwrap();
    assert!((est / (0.931 * 2.0 * std::f64::consts::PI) - 1.0).abs() < 0.03, "{est}");

    let unsorted = afp(&["scan-gamma", "--betas", "2,0", "--out", s.to_str().unwrap()]);
    assert_eq!(unsorted.status.code(), Some(1));
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = afp(&["verify", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert_eq!(r.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert_eq!(json(&dir.path().join("verify.json"))["passed"], true);
}
