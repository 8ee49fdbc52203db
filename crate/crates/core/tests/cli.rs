use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn irbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irbox"))
        .args(args)
        .env_remove("IRBOX_TOLERANCE")
        .env_remove("IRBOX_FORMAT")
        .env_remove("IRBOX_DEPTH_CAP")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = irbox(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn code(args: &[&str]) -> (i32, String) {
    let out = irbox(args);
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&ok(args)).expect("valid JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn indices_two_rows() {
    let out = String::from_utf8(ok(&["indices", p(&data("two_rows.csv"))])).unwrap();
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "firm_id,period,debt,equity,assets,assets_synthesized,region,tr,nr,aco,firi,firi_h,firi_v,gear,pi"
    );
    assert_eq!(
        lines.next().unwrap(),
        "acme,2020,1,1,2,true,on-unity,2,0,2,1,1,1,1,1"
    );
    assert_eq!(
        lines.next().unwrap(),
        "acme,2021,3,1,4,true,above-unity,4,2,2,0.5,0.5,1.5,3,1.5"
    );
    assert!(lines.next().is_none());
}

#[test]
fn indices_json_has_summary() {
    let v = json(&["--format", "json", "indices", p(&data("two_rows.csv"))]);
    assert_eq!(v["records"].as_array().unwrap().len(), 2);
    assert_eq!(v["records"][1]["indices"]["firi"], 0.5);
    assert_eq!(v["summary"]["min"], 0.5);
    assert_eq!(v["summary"]["max"], 1.0);
    assert_eq!(v["summary"]["mean"], 0.75);
    assert_eq!(v["summary"]["count"], 2);
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_irbox"))
        .args(["indices", p(&data("two_rows.csv"))])
        .env("IRBOX_FORMAT", "json")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn missing_column_is_input_error() {
    let (c, err) = code(&["indices", p(&data("missing_equity.csv"))]);
    assert_eq!(c, 2);
    assert!(err.contains("equity"), "{err}");
}

#[test]
fn degenerate_row_is_validation_error() {
    let (c, err) = code(&["indices", p(&data("degenerate.csv"))]);
    assert_eq!(c, 3);
    assert!(err.contains("acme") && err.contains("2021"), "{err}");
}

#[test]
fn missing_file_is_input_error() {
    let (c, _) = code(&["indices", p(&data("no_such_file.csv"))]);
    assert_eq!(c, 2);
}

#[test]
fn negative_equity_needs_distress_flag() {
    let (c, _) = code(&["indices", p(&data("distress.csv"))]);
    assert_eq!(c, 3);
    ok(&["indices", "--distress", p(&data("distress.csv"))]);
}

#[test]
fn indices_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    ok(&["indices", p(&data("cross_section.csv")), "--out", p(&first)]);
    ok(&["indices", p(&first), "--out", p(&second)]);
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gasket_stats_depth_five() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("g.svg");
    let v = json(&["gasket", "--depth", "5", "--svg", p(&svg)]);
    assert_eq!(v["remaining_count"], 486);
    assert_eq!(v["area_removed"], "781/1024");
    assert_eq!(v["area_remaining"], "243/1024");
    assert_eq!(v["perimeter_coefficient"], "243/16");
    assert_eq!(v["cumulative_series_coefficient"], "633/32");
    assert_eq!(v["area_matches_closed_form"], true);
    assert_eq!(v["perimeter_matches_closed_form"], true);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let polys = doc
        .descendants()
        .filter(|n| n.has_tag_name("polygon"))
        .count();
    assert_eq!(polys, 486);
}

#[test]
fn gasket_small_depths() {
    let v = json(&["gasket", "--depth", "0"]);
    assert_eq!(v["remaining_count"], 2);
    assert_eq!(v["area_removed"], "0/1");
    let v = json(&["gasket", "--depth", "1"]);
    assert_eq!(v["remaining_count"], 6);
    assert_eq!(v["area_removed"], "1/4");
}

#[test]
fn gasket_depth_over_cap_is_limit_error() {
    assert_eq!(code(&["gasket", "--depth", "13"]).0, 4);
    assert_eq!(code(&["--depth-cap", "3", "gasket", "--depth", "4"]).0, 4);
    let out = Command::new(env!("CARGO_BIN_EXE_irbox"))
        .args(["gasket", "--depth", "4"])
        .env("IRBOX_DEPTH_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn dimension_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("n.csv");
    let v = json(&[
        "dimension",
        "--depth",
        "6",
        "--window",
        "2..5",
        "--table",
        p(&table),
    ]);
    assert_eq!(v["window"], serde_json::json!([2, 5]));
    let d = v["dimension"].as_f64().unwrap();
    assert!(d > 1.5 && d < 1.75, "{d}");
    // interior convention: N(m) = 2·3^m − 2^m
    assert_eq!(
        std::fs::read_to_string(&table).unwrap(),
        "m,n\n2,14\n3,46\n4,146\n5,454\n"
    );
}

#[test]
fn dimension_square_is_two() {
    let v = json(&["dimension", "--square"]);
    assert_eq!(v["dimension"], 2.0);
    assert_eq!(v["fit_quality"], 1.0);
}

#[test]
fn dimension_short_window_is_input_error() {
    let (c, err) = code(&["dimension", "--depth", "10", "--window", "3..4"]);
    assert_eq!(c, 2);
    assert!(!err.is_empty());
    assert_eq!(
        code(&["dimension", "--depth", "5", "--window", "2..7"]).0,
        2
    );
}

#[test]
fn dimension_from_binary_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let tris = dir.path().join("g.bin");
    ok(&["gasket", "--depth", "6", "--triangles", p(&tris)]);
    let from_file = json(&["dimension", "--triangles", p(&tris), "--window", "2..5"]);
    let built = json(&["dimension", "--depth", "6", "--window", "2..5"]);
    assert_eq!(from_file["samples"], built["samples"]);
    assert_eq!(from_file["dimension"], built["dimension"]);
}

#[test]
fn dimension_csv_format_prints_table() {
    let out = ok(&[
        "--format",
        "csv",
        "dimension",
        "--depth",
        "5",
        "--window",
        "1..4",
    ]);
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "m,n\n1,4\n2,14\n3,46\n4,146\n"
    );
}

#[test]
fn simulate_single_firm() {
    let v = json(&["simulate", p(&data("single_firm.json"))]);
    assert_eq!(v["welfare"]["equilibrium_pi"], 1.5);
    assert_eq!(v["firms"][0]["id"], "acme");
    let w = &v["welfare"];
    assert_eq!(
        w["w"].as_f64().unwrap(),
        w["p1"].as_f64().unwrap() + w["p2"].as_f64().unwrap()
    );
}

#[test]
fn simulate_balanced() {
    let v = json(&["simulate", p(&data("balanced.json"))]);
    assert_eq!(v["welfare"]["equilibrium_pi"], 1.0);
    assert_eq!(v["firms"][1]["id"], "firm-1");
}

#[test]
fn simulate_unbounded_is_validation_error() {
    let (c, err) = code(&["simulate", p(&data("unbounded.json"))]);
    assert_eq!(c, 3);
    assert!(err.contains("unbounded") || err.contains("r ="), "{err}");
}

#[test]
fn simulate_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"params":{"r":1,"z":0.5,"tau":1,"p":0,"pi_store":0.5},"firms":[],"extra":1}"#,
    )
    .unwrap();
    assert_eq!(code(&["simulate", p(&bad)]).0, 2);
}

#[test]
fn prob_methods() {
    let v = json(&["prob", p(&data("distress.csv"))]);
    assert_eq!(v["estimate"]["probability"], 0.4);
    assert_eq!(v["estimate"]["conditioning_count"], 5);
    assert_eq!(v["estimate"]["insolvent_count"], 2);
    let v = json(&["prob", "--method", "geometric", p(&data("distress.csv"))]);
    // side 5, e_min −2: 2/7 of the extended rectangle
    assert_eq!(v["estimate"]["probability"], 2.0 / 7.0);
}

fn attr(node: roxmltree::Node, name: &str) -> f64 {
    node.attribute(name)
        .unwrap_or_else(|| panic!("missing {name}"))
        .parse()
        .unwrap()
}

#[test]
fn irbox_svg_has_firi_rays_with_expected_slopes() {
    let svg = String::from_utf8(ok(&[
        "irbox",
        p(&data("distress.csv")),
        "--distress",
        "--layers",
        "points,unity,firi",
        "--firi-levels",
        "0.5",
    ]))
    .unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let rays: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("line") && n.attribute("data-level") == Some("0.5"))
        .collect();
    assert_eq!(rays.len(), 2);
    let mut slopes: Vec<f64> = rays
        .iter()
        .map(|n| {
            // screen y grows downward
            -(attr(*n, "y2") - attr(*n, "y1")) / (attr(*n, "x2") - attr(*n, "x1"))
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    assert!((slopes[0] - 1.0 / 3.0).abs() < 1e-2, "{slopes:?}");
    assert!((slopes[1] - 3.0).abs() < 1e-1, "{slopes:?}");
}

#[test]
fn irbox_svg_coordinates_stay_in_viewbox() {
    let svg = String::from_utf8(ok(&[
        "irbox",
        p(&data("cross_section.csv")),
        "--layers",
        "points,unity,tr,nr,aco,firi,gasket",
        "--width",
        "640",
        "--height",
        "480",
    ]))
    .unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    let vb: Vec<f64> = root
        .attribute("viewBox")
        .unwrap()
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let inside_x = |x: f64| x >= vb[0] && x <= vb[0] + vb[2];
    let inside_y = |y: f64| y >= vb[1] && y <= vb[1] + vb[3];
    let mut checked = 0;
    for n in doc.descendants() {
        match n.tag_name().name() {
            "line" => {
                assert!(inside_x(attr(n, "x1")) && inside_x(attr(n, "x2")));
                assert!(inside_y(attr(n, "y1")) && inside_y(attr(n, "y2")));
                checked += 1;
            }
            "circle" => {
                assert!(inside_x(attr(n, "cx")) && inside_y(attr(n, "cy")));
                checked += 1;
            }
            "polygon" => {
                for pair in n.attribute("points").unwrap().split_whitespace() {
                    let (x, y) = pair.split_once(',').unwrap();
                    assert!(inside_x(x.parse().unwrap()) && inside_y(y.parse().unwrap()));
                }
                checked += 1;
            }
            _ => {}
        }
    }
    assert!(checked > 100, "only {checked} shapes");
}

#[test]
fn irbox_without_layers_is_input_error() {
    assert_eq!(code(&["irbox", p(&data("two_rows.csv"))]).0, 2);
}

#[test]
fn irbox_bad_firi_level_is_input_error() {
    assert_eq!(
        code(&[
            "irbox",
            p(&data("two_rows.csv")),
            "--layers",
            "firi",
            "--firi-levels",
            "1.5"
        ])
        .0,
        2
    );
}

#[test]
fn every_subcommand_is_deterministic() {
    let csv = data("cross_section.csv");
    let distress = data("distress.csv");
    let scenario = data("single_firm.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["indices", p(&csv)],
        vec!["--format", "json", "indices", p(&csv)],
        vec![
            "irbox",
            p(&csv),
            "--layers",
            "points,unity,tr,nr,aco,firi,gasket",
        ],
        vec!["gasket", "--depth", "4"],
        vec!["dimension", "--depth", "7"],
        vec!["simulate", p(&scenario)],
        vec!["prob", p(&distress)],
        vec!["prob", "--method", "geometric", p(&distress)],
    ];
    for args in runs {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let stdout = ok(&["gasket", "--depth", "3"]);
    ok(&["gasket", "--depth", "3", "--stats", p(&out)]);
    assert_eq!(std::fs::read(&out).unwrap(), stdout);
}
