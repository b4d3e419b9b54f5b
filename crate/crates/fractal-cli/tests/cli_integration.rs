//! End-to-end tests driving the compiled binary: exit codes, artifact
//! content, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractal-cli"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fractal-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn analyze_disc_reports_convex_exponents_and_contents() {
    let base = scratch("disc");
    let output = run(&[
        "analyze",
        "--model",
        r#"{"kind":"disc","radius":1.0}"#,
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    let basic = &json["report"]["basic"];
    assert!(basic[0]["exponent"].as_f64().unwrap().abs() < 1e-9);
    assert!((basic[1]["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((basic[0]["upper_content"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(
        (basic[1]["upper_content"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9
    );

    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert_eq!(lines.next(), Some("t,beta0,beta1,mu0,mu1,volume"));
    let first: Vec<f64> =
        lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    let (t, beta0, beta1, mu1, volume) = (first[0], first[1], first[2], first[4], first[5]);
    assert_eq!(beta0, 1.0);
    assert!((beta1 - std::f64::consts::PI).abs() < 1e-12);
    assert!((mu1 - std::f64::consts::PI * (1.0 + t)).abs() < 1e-12);
    let annulus = 2.0 * std::f64::consts::PI * t + std::f64::consts::PI * t * t;
    assert!((volume - annulus).abs() < 1e-8, "volume {volume} vs {annulus}");
}

#[test]
fn analyze_gasket_finds_the_similarity_dimension() {
    let base = scratch("gasket");
    let output = run(&[
        "analyze",
        "--model",
        r#"{"kind":"sierpinski_gasket"}"#,
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    let m1 = json["report"]["basic"][1]["exponent"].as_f64().unwrap();
    assert!((m1 - 3.0f64.ln() / 2.0f64.ln()).abs() < 0.01, "m1 = {m1}");
}

#[test]
fn analyze_outputs_are_byte_identical_across_runs() {
    let run_once = |tag: &str| {
        let base = scratch(tag);
        let output = run(&[
            "analyze",
            "--model",
            r#"{"kind":"fractal_window","ratio":0.2,"level":8}"#,
            "--out",
            base.to_str().unwrap(),
        ]);
        assert_exit(&output, 0);
        (
            std::fs::read(base.with_extension("json")).unwrap(),
            std::fs::read(base.with_extension("csv")).unwrap(),
        )
    };
    let (json_a, csv_a) = run_once("det-a");
    let (json_b, csv_b) = run_once("det-b");
    // The job echo embeds no paths, so reports from different base paths
    // must agree byte for byte.
    assert_eq!(csv_a, csv_b);
    let norm = |bytes: &[u8]| {
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        text.replace("det-a", "X").replace("det-b", "X")
    };
    assert_eq!(norm(&json_a), norm(&json_b));
}

#[test]
fn empty_model_file_is_an_input_error() {
    let path = scratch("empty.json");
    std::fs::write(&path, "").unwrap();
    let output = run(&["analyze", "--model", path.to_str().unwrap()]);
    assert_exit(&output, 2);
}

#[test]
fn malformed_model_is_an_input_error() {
    let output = run(&["analyze", "--model", r#"{"kind":"dodecahedron"}"#]);
    assert_exit(&output, 2);
}

#[test]
fn verify_identity_suites_pass() {
    let output = run(&["verify", "--suite", "steiner1d"]);
    assert_exit(&output, 0);
    assert!(String::from_utf8_lossy(&output.stdout).contains("all 105 checks passed"));

    let output = run(&["verify", "--suite", "matrices", "--dmax", "6"]);
    assert_exit(&output, 0);

    let output = run(&["verify", "--suite", "roundtrip"]);
    assert_exit(&output, 0);

    let output = run(&["verify", "--suite", "nonsense"]);
    assert_exit(&output, 2);
}

#[test]
fn zeta_table_marks_the_abscissa() {
    let base = scratch("zeta");
    let output = run(&[
        "zeta",
        "--model",
        r#"{"kind":"cantor_ternary"}"#,
        "--tmax",
        "1.0",
        "--ratio",
        "0.8",
        "--count",
        "8",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 8);

    // First row is s = 1 exactly: all three routes give the total gap
    // length 1 of the Cantor string.
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), 1.0);
    for col in [1, 3, 5] {
        assert!((first[col].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
    assert_eq!(*first.last().unwrap(), "ok");

    // Rows below the abscissa log_3 2 are marked divergent; rows above
    // are not.
    let abscissa = 2.0f64.ln() / 3.0f64.ln();
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        let s = cells[0].parse::<f64>().unwrap();
        let status = *cells.last().unwrap();
        if s > abscissa + 1e-9 {
            assert_eq!(status, "ok", "s = {s}");
        } else {
            assert_eq!(status, "divergent", "s = {s}");
        }
    }
}

#[test]
fn zeta_rejects_planar_models() {
    let output = run(&["zeta", "--model", r#"{"kind":"disc","radius":1.0}"#]);
    assert_exit(&output, 2);
}

#[test]
fn raster_writes_a_pgm_with_sidecar() {
    let base = scratch("sq");
    let output = run(&[
        "raster",
        "--model",
        r#"{"kind":"square_boundary","side":1.0}"#,
        "--h",
        "0.005",
        "--out",
        base.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_exit(&output, 0);
    let stats: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("stats are JSON");
    assert_eq!(stats["occupied"].as_u64().unwrap(), 800, "perimeter / h cells");

    let pgm_path = PathBuf::from(format!("{}.pgm", base.display()));
    let pgm = std::fs::read(&pgm_path).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    let sidecar = std::fs::read_to_string(format!("{}.json", pgm_path.display())).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(meta["h"].as_f64().unwrap(), 0.005);
}

#[test]
fn estimate_emits_scaling_reports() {
    let output = run(&[
        "estimate",
        "--model",
        r#"{"kind":"fractal_window","ratio":0.2,"level":10}"#,
    ]);
    assert_exit(&output, 0);
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let m0 = json["reports"][0]["exponent"].as_f64().unwrap();
    let expect = 4.0f64.ln() / 5.0f64.ln();
    assert!((m0 - expect).abs() < 0.02, "window m0 = {m0} vs {expect}");
}
