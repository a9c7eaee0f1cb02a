use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use skewloops::report::{Report, PROFILE_CSV_HEADER};
use tempfile::{tempdir, TempDir};

fn skewloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewloop"))
        .args(args)
        .env("SKEWLOOP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    let out = skewloop(args);
    out.status.code().expect("exited normally")
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Self(tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn export(&self, fixture: &str) -> String {
        let curve = self.s(&format!("{fixture}.curve"));
        assert_eq!(code(&["export-fixture", fixture, "--curve", &curve]), 0);
        curve
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_quadric_exit_codes() {
    let d = Dir::new();
    let lat = d.export("upper-sheet-perturbed-latitude");
    assert_eq!(code(&["analyze-quadric", &lat, "--json", &d.s("lat.json")]), 0);
    let report = json(&d.path("lat.json"));
    let counts = &report["body"]["bounds"]["counts"];
    assert!(counts["d1"].as_u64().unwrap() + counts["d2"].as_u64().unwrap() >= 2);

    let circle = d.export("great-circle");
    assert_eq!(code(&["analyze-quadric", &circle]), 3);

    fs::write(d.path("bad.curve"), "format = skewloop-curve/1\nsignature = 1 1 1\nx = 0 1 0\ny = 0 0\n").unwrap();
    let out = skewloop(&["analyze-quadric", &d.s("bad.curve")]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn certify_skew_exit_codes() {
    let d = Dir::new();
    let circle = d.export("great-circle");
    assert_eq!(code(&["certify-skew", &circle, "--json", &d.s("c.json")]), 1);
    let w = &json(&d.path("c.json"))["body"]["certificate"]["witness_pair"];
    let (s, t) = (w["s"].as_f64().unwrap(), w["t"].as_f64().unwrap());
    assert!(s.abs() < 1e-12 && (t - std::f64::consts::PI).abs() < 1e-12);

    let cusp = d.export("sphere-cusp");
    assert_eq!(code(&["certify-skew", &cusp]), 65);

    let curve = d.s("ft.curve");
    let surface = d.s("ft.surface");
    assert_eq!(code(&["export-fixture", "folded-triangle", "--curve", &curve, "--surface", &surface]), 0);
    assert_eq!(code(&["certify-skew", &curve, "--grid", "2048"]), 0);
    // the folded sheet has flat pieces
    assert_eq!(code(&["unfold", &surface, &curve]), 66);
}

#[test]
fn unfold_writes_a_profile_and_flags_window_errors() {
    let d = Dir::new();
    let surface = "format = skewloop-surface/1\nkind = cylinder\nwindow.u = 0 6\nwindow.v = -2 2\norigin = 0 0 0\naxis = 0 0 1\n\
                   directrix.x = 0 1 0\ndirectrix.y = 0 0 1\n";
    fs::write(d.path("cyl.surface"), surface).unwrap();
    fs::write(d.path("loop.curve"), "format = skewloop-curve/1\nmode = surface\nu = 3 1.2 0\nv = 0 0 0.8\n").unwrap();
    let args = ["unfold", &d.s("cyl.surface"), &d.s("loop.curve"), "--csv", &d.s("p.csv"), "--json", &d.s("u.json")];
    assert_eq!(code(&args), 0);
    let csv = fs::read_to_string(d.path("p.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(PROFILE_CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 1024);
    assert_eq!(json(&d.path("u.json"))["body"]["oracle"]["confirmed"], Value::Bool(true));

    fs::write(d.path("wide.curve"), "format = skewloop-curve/1\nmode = surface\nu = 3 1.2 0\nv = 0 0 2.5\n").unwrap();
    assert_eq!(code(&["unfold", &d.s("cyl.surface"), &d.s("wide.curve")]), 67);

    let cone = "format = skewloop-surface/1\nkind = cone\nwindow.u = 0 6.2\nwindow.v = 0.5 4\napex = 0 0 0\n\
                directrix.x = 0 1 0\ndirectrix.y = 0 0 1\ndirectrix.z = 1 0 0\n";
    fs::write(d.path("cone.surface"), cone).unwrap();
    fs::write(d.path("apex.curve"), "format = skewloop-curve/1\nmode = surface\nu = 3 1 0\nv = 0.6 0 0.5\n").unwrap();
    assert_eq!(code(&["unfold", &d.s("cone.surface"), &d.s("apex.curve")]), 67);
}

#[test]
fn morse_report_checks_hand_written_records() {
    let d = Dir::new();
    fs::write(d.path("ok.records"), "format = skewloop-records/1\nambient = 1 1\nrecord = isolated 0 1\nrecord = isolated 1 1\n").unwrap();
    assert_eq!(code(&["morse-report", &d.s("ok.records"), "--json", &d.s("m.json")]), 0);
    assert_eq!(json(&d.path("m.json"))["body"]["ledger"]["quotient"], serde_json::json!([]));
    fs::write(d.path("bad.records"), "format = skewloop-records/1\nrecord = diagonal 1 1 1\n").unwrap();
    assert_eq!(code(&["morse-report", &d.s("bad.records")]), 2);
}

#[test]
fn io_errors_and_usage_errors() {
    assert_eq!(code(&["analyze-quadric", "/nonexistent/curve"]), 74);
    assert_eq!(code(&["no-such-command"]), 64);
}

#[test]
fn reports_are_byte_identical_across_runs_apart_from_timings() {
    let d = Dir::new();
    let curve = d.s("r.curve");
    assert_eq!(code(&["export-fixture", "random", "--case", "two-sheeted", "--seed", "9", "--curve", &curve]), 0);
    for name in ["a", "b"] {
        let args = ["analyze-quadric", &curve, "--json", &d.s(&format!("{name}.json")), "--plotdata", &d.s(&format!("{name}.plot"))];
        assert_eq!(code(&args), 0);
    }
    let (a, b) = (Report::from_json(&fs::read_to_string(d.path("a.json")).unwrap()).unwrap(), {
        Report::from_json(&fs::read_to_string(d.path("b.json")).unwrap()).unwrap()
    });
    assert_eq!(a.digest(), b.digest());
    assert_eq!(a.body, b.body);
    assert_eq!(fs::read(d.path("a.plot")).unwrap(), fs::read(d.path("b.plot")).unwrap());
}
