use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

use fracrev::graph::parse_graph_spec;
use fracrev::report::RunReport;
use fracrev::walk::TransportKind;

fn fracrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracrev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> RunReport {
    let out = fracrev(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn analyze_c6_from_one_vertex() {
    let r = report(&["analyze", "cycle:6", "--from", "0"]);
    assert_eq!(r.certificates.len(), 1);
    let c = &r.certificates[0];
    assert_eq!((c.a, c.b), (0, 3));
    assert!((c.tau - 2.0 * PI / 3.0).abs() < 1e-9);
    assert_eq!(c.kind, TransportKind::FractionalRevival);
}

#[test]
fn analyze_p5_with_scan_is_empty() {
    let r = report(&["analyze", "path:5", "--scan"]);
    assert!(r.certificates.is_empty());
    assert!(r.timing.contains_key("scan"));
}

#[test]
fn analyze_star_product() {
    let r = report(&["analyze", "prod(star:16,path:2)", "--from", "0"]);
    let c = &r.certificates[0];
    assert_eq!(c.kind, TransportKind::BalancedFr);
    assert!((c.tau - PI / 4.0).abs() < 1e-9);
}

#[test]
fn json_file_round_trips_and_revalidates() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("p4.json");
    let csv = dir.path().join("p4.csv");
    let out = fracrev(&[
        "analyze",
        "path:4",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("fractional_revival"), "{table}");
    let text = fs::read_to_string(&json).unwrap();
    let r = RunReport::from_json(&text).unwrap();
    assert_eq!(r.to_json(), text);
    r.revalidate("path:4", &parse_graph_spec("path:4").unwrap()).unwrap();
    let rows = fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("graph,a,b,tau,alpha_re"));
    assert_eq!(rows.lines().count(), r.certificates.len() + 1);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut r: RunReport| {
        r.timing.clear();
        r
    };
    let a = strip(report(&["analyze", "cycle:8", "--sequential"]));
    let b = strip(report(&["analyze", "cycle:8"]));
    assert_eq!(a.certificates, b.certificates);
    assert_eq!(a.predicates, b.predicates);
}

#[test]
fn quotient_of_double_cone() {
    let r = report(&["quotient", "cone2:cycle:4", "--pin", "a", "--pin", "b"]);
    let m = &r.predicates["quotient.matrix"];
    assert_eq!(m.detail.as_deref(), Some("[[0, 2, 0], [2, 2, 2], [0, 2, 0]]"));
    assert!(r.predicates["quotient.transport"].holds);
    assert!(r.certificates.iter().any(|c| c.graph == "quotient" && c.kind.is_revival()));
}

#[test]
fn quotient_of_star() {
    let r = report(&["quotient", "star:6", "--pin", "0"]);
    assert!(r.predicates["quotient.cells"].detail.as_deref().unwrap().starts_with("2 cells"));
}

#[test]
fn construct_then_analyze_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c4.graph");
    let out = fracrev(&["construct", "cycle:4", "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&["analyze", file.to_str().unwrap(), "--from", "0"]);
    assert!(r
        .certificates
        .iter()
        .any(|c| c.kind == TransportKind::PerfectStateTransfer && c.b == 2));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let out = fracrev(&["analyze", "prod(path:2,cycle:x)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at 18"));
    let out = fracrev(&["analyze", "cycle:4", "--from", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_disagreement_exits_3() {
    // t·‖A‖ ~ 1e10: phase errors reach 1e-5 and the oracle voids the certificate
    let out = fracrev(&["scan", "scale(path:3,1e9)", "--from", "0"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disagree"));
}

#[test]
fn suite_groups() {
    let out = fracrev(&["paper-suite", "--only", "cycles"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for n in [4, 6, 8, 10, 12, 14, 16] {
        assert!(text.contains(&format!("C{n} ")), "missing C{n}");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn suite_failure_exits_4() {
    let out = fracrev(&["paper-suite", "--only", "weighted", "--tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("failing rows"));
}

#[test]
fn unknown_group_is_rejected() {
    let out = fracrev(&["paper-suite", "--only", "spheres"]);
    assert_eq!(out.status.code(), Some(2));
}
