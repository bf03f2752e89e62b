use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use locfact::harness::{self, ExperimentReport, Format, FACTORIZATION_HEADER, LR_HEADER};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

const P6: &str = r#"
[lattice]
kind = "path"
n = 6

[interaction]
model = "tfim"

[region]
left = 3

[sweep]
r = [1, 2]
dt = [0.2, 0.5]
side = "both"

[lr]
a_site = 0
b_sites = [2, 3, 4, 5]
dt = [0.0, 0.1, 0.3]
"#;

const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let mut rows = vec![header];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

#[test]
fn p8_sweep_matches_golden_csv() {
    let cfg = harness::load_config(configs_dir().join("p8_tfim.toml")).unwrap();
    let report = harness::run_factorization_sweep(&cfg).unwrap();
    assert_eq!(report.factorization.len(), 8);
    assert!(report.all_satisfied());
    let dir = tempfile::tempdir().unwrap();
    harness::emit(&report, &[Format::Csv], dir.path()).unwrap();
    let got = read_rows(&dir.path().join(harness::FACTORIZATION_CSV));
    let want = read_rows(&golden("p8_tfim.csv"));
    assert_eq!(got.len(), want.len());
    assert_eq!(got[0], want[0]);
    for (g, w) in got.iter().zip(&want).skip(1) {
        for ((gv, wv), col) in g.iter().zip(w).zip(FACTORIZATION_HEADER) {
            match (gv.parse::<f64>(), wv.parse::<f64>()) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-9 + 1e-9 * b.abs(), "{col}: {a} vs {b}"),
                _ => assert_eq!(gv, wv, "{col}"),
            }
        }
    }
}

#[test]
fn factorization_errors_survive_step_refinement() {
    // the golden P8 errors at R = 2 agree with a four-fold refined run of the other scheme
    let text = fs::read_to_string(configs_dir().join("p8_tfim.toml"))
        .unwrap()
        .replace("r = [2, 4]", "r = [2]")
        .replace("side = \"both\"", "side = \"right\"")
        .replace("scheme = \"midpoint\"", "scheme = \"rk4\"")
        .replace("steps_per_unit_time = 256", "steps_per_unit_time = 1024");
    let refined = harness::run_factorization_sweep(&harness::parse_config(&text).unwrap()).unwrap();
    let want = read_rows(&golden("p8_tfim.csv"));
    for cell in &refined.factorization {
        let row = want
            .iter()
            .skip(1)
            .find(|row| row[0] == cell.r.to_string() && row[1] == cell.dt.to_string() && row[2] == "right")
            .unwrap();
        let frozen: f64 = row[4].parse().unwrap();
        let e = cell.error.unwrap();
        assert!((e - frozen).abs() <= 1e-6 * frozen, "R={} dt={}: {e} vs {frozen}", cell.r, cell.dt);
    }
}

#[test]
fn sweeps_are_deterministic_and_round_trip() {
    let cfg = harness::parse_config(P6).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let report = harness::run_factorization_sweep(&cfg).unwrap();
        harness::emit(&report, &ALL, dir).unwrap();
    }
    for name in [harness::FACTORIZATION_CSV, harness::REPORT_JSON, harness::FACTORIZATION_SVG] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let report = harness::run_factorization_sweep(&cfg).unwrap();
    let text = fs::read_to_string(a.path().join(harness::REPORT_JSON)).unwrap();
    let loaded = ExperimentReport::from_json(&text).unwrap();
    assert_eq!(loaded, report);
    assert_eq!(loaded.to_json().unwrap(), text);
}

#[test]
fn csv_rows_follow_the_frozen_header() {
    let text = P6.replace("r = [1, 2]", "r = [2]").replace("side = \"both\"", "side = \"right\"").replace(
        "dt = [0.2, 0.5]\n",
        "dt = [0.1, 0.2, 0.3, 0.4]\n",
    );
    let cfg = harness::parse_config(&text).unwrap();
    let report = harness::run_factorization_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    harness::emit(&report, &[Format::Csv], dir.path()).unwrap();
    let rows = read_rows(&dir.path().join(harness::FACTORIZATION_CSV));
    assert_eq!(rows[0], FACTORIZATION_HEADER.to_vec());
    assert_eq!(rows.len(), 5);
    let dts: Vec<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(dts, ["0.1", "0.2", "0.3", "0.4"]);
}

#[test]
fn empty_reports_give_header_only_csv() {
    let cfg = harness::parse_config(P6).unwrap();
    let mut report = harness::run_factorization_sweep(&cfg).unwrap();
    report.factorization.clear();
    let dir = tempfile::tempdir().unwrap();
    harness::emit(&report, &ALL, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join(harness::FACTORIZATION_CSV)).unwrap();
    assert_eq!(text, FACTORIZATION_HEADER.join(",") + "\n");
    let svg = fs::read_to_string(dir.path().join(harness::FACTORIZATION_SVG)).unwrap();
    assert!(roxmltree::Document::parse(&svg).is_ok());

    let mut lr = harness::run_lr_sweep(&cfg).unwrap();
    lr.lieb_robinson.clear();
    harness::emit(&lr, &[Format::Csv], dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join(harness::LR_CSV)).unwrap();
    assert_eq!(text, LR_HEADER.join(",") + "\n");
}

fn polylines(svg: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let texts: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
    assert!(texts.iter().any(|t| t.contains("log10(value)")));
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| n.attribute("data-series").unwrap().to_string())
        .collect()
}

#[test]
fn svg_has_one_polyline_per_series() {
    let cfg = harness::parse_config(P6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = harness::run_factorization_sweep(&cfg).unwrap();
    harness::emit(&report, &[Format::Svg], dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join(harness::FACTORIZATION_SVG)).unwrap();
    let series = polylines(&svg);
    // per |t-s|: right error, left error, theorem RHS
    assert_eq!(series.len(), 6, "{series:?}");
    assert!(svg.contains(">R<"));

    let lr = harness::run_lr_sweep(&cfg).unwrap();
    harness::emit(&lr, &[Format::Svg], dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join(harness::LR_SVG)).unwrap();
    assert_eq!(polylines(&svg).len(), 6);
}

#[test]
fn decoupled_cut_gives_negligible_error() {
    let text = P6.replace("model = \"tfim\"", "model = \"tfim\"\ndecouple_cut = true");
    let cfg = harness::parse_config(&text).unwrap();
    let report = harness::run_factorization_sweep(&cfg).unwrap();
    for c in &report.factorization {
        assert!(c.error.unwrap() <= 1e-8, "R={} dt={}: {:?}", c.r, c.dt, c.error);
    }
    assert!(report.notes.iter().any(|n| n.contains("decouple_cut")));
}

#[test]
fn light_cone_table() {
    let cfg = harness::parse_config(P6).unwrap();
    let report = harness::run_lr_sweep(&cfg).unwrap();
    assert_eq!(report.lieb_robinson.len(), 12);
    for c in &report.lieb_robinson {
        let lhs = c.lhs.unwrap();
        assert!(lhs <= c.rhs + 1e-6, "B@{} dt={}: {lhs} > {}", c.b_site, c.dt, c.rhs);
        if c.dt == 0.0 {
            assert_eq!((lhs, c.rhs), (0.0, 0.0));
        }
    }
    let far = report.lieb_robinson.iter().find(|c| c.separation == 5 && c.dt == 0.1).unwrap();
    assert!(far.lhs.unwrap() < 1e-3 && far.lhs.unwrap() < far.rhs);
}

#[test]
fn same_site_observables_commute_at_equal_times() {
    let text = P6.replace("b_sites = [2, 3, 4, 5]", "b_sites = [0]");
    let report = harness::run_lr_sweep(&harness::parse_config(&text).unwrap()).unwrap();
    let c = report.lieb_robinson.iter().find(|c| c.dt == 0.0).unwrap();
    assert_eq!(c.lhs, Some(0.0));
    assert!(c.rhs > 0.0);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_locfact")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, P6.replace("dt = [0.2, 0.5]", "dt = [0.2]")).unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    assert_eq!(cli(&["validate", good.to_str().unwrap()]).status.code(), Some(0));
    let c = cli(&["constants", good.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0));
    let block: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    assert!(block["velocity"]["v_xi"].as_f64().unwrap() > 0.0);

    assert_eq!(cli(&["factorize", good.to_str().unwrap(), "--out", out_s]).status.code(), Some(0));
    assert!(out.join(harness::FACTORIZATION_CSV).exists());
    fs::remove_file(out.join(harness::FACTORIZATION_CSV)).unwrap();
    assert_eq!(cli(&["report", out_s, "--format", "csv"]).status.code(), Some(0));
    assert!(out.join(harness::FACTORIZATION_CSV).exists());
    assert_eq!(cli(&["lr", good.to_str().unwrap(), "--out", out_s, "--format", "csv"]).status.code(), Some(0));

    // an absurdly small ‖F‖ override makes the bounds fail
    let bad_bound = dir.path().join("violated.toml");
    fs::write(&bad_bound, P6.replace("[region]", "[decay.overrides]\nnorm_f = 1e-12\n\n[region]")).unwrap();
    assert_eq!(cli(&["factorize", bad_bound.to_str().unwrap(), "--out", out_s]).status.code(), Some(1));

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, P6.replace("left = 3", "left = 6")).unwrap();
    let r = cli(&["validate", broken.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("region"));
    assert_eq!(cli(&["factorize"]).status.code(), Some(2));
    assert_eq!(cli(&["validate", "/nonexistent/config.toml"]).status.code(), Some(2));
}
