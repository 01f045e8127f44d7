//! End-to-end tests of the command-line interface.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asianray"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

#[test]
fn rate_fixed_reference_values() {
    let out = run(&[
        "rate",
        "--family",
        "fixed",
        "--k-over-s0",
        "1.5",
        "--tau",
        "0.25",
        "--sigma",
        "1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let o = &v["outputs"];
    assert!((o["c"].as_f64().unwrap() - 0.786554).abs() < 5e-6);
    assert!((o["beta"].as_f64().unwrap() - 1.14257).abs() < 5e-6);
    assert!((o["j_fwd"].as_f64().unwrap() - 0.16109).abs() < 5e-5);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["inputs"]["command"] == "rate");
    assert!(v["diagnostics"]["residual"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn table2_csv_matches_reference_to_five_decimals() {
    let out = run(&["table", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains('\r'), "LF line endings only");
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 25, "header + 24 data rows");
    let header: Vec<&str> = lines[0].split(',').collect();
    let idx = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        let printed_j: f64 = cells[idx("j_fwd")].parse().unwrap();
        let computed_j: f64 = cells[idx("j_computed")].parse().unwrap();
        assert!(
            (printed_j - computed_j).abs() < 5e-5,
            "row {line}: j mismatch"
        );
        let printed_xi: f64 = cells[idx("xi_c")].parse().unwrap();
        let computed_xi: f64 = cells[idx("xi_c_computed")].parse().unwrap();
        assert!((printed_xi - computed_xi.abs()).abs() < 5e-6, "row {line}");
        if cells[idx("c")] != "-" {
            let printed_c: f64 = cells[idx("c")].parse().unwrap();
            let computed_c: f64 = cells[idx("c_computed")].parse().unwrap();
            assert!((printed_c - computed_c).abs() < 5e-6, "row {line}");
        }
    }
}

#[test]
fn table1_flags_suspect_rows() {
    let out = run(&["table", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let flagged: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("suspected typo"))
        .collect();
    assert_eq!(flagged.len(), 5, "five non-trivial tau=0.75 rows are flagged");
    // The printed j at tau=0.75, K/S0=1.5 equals log(1.5), far from the
    // recomputed value.
    let row = flagged.iter().find(|l| l.starts_with("1.5,")).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    let printed: f64 = cells[4].parse().unwrap();
    let computed: f64 = cells[7].parse().unwrap();
    assert!((printed - 1.5f64.ln()).abs() < 1e-5);
    assert!((computed - 0.09856).abs() < 5e-5, "computed={computed}");
}

#[test]
fn tables_are_byte_stable() {
    let a = stdout(&run(&["table", "1", "--format", "csv"]));
    let b = stdout(&run(&["table", "1", "--format", "csv"]));
    assert_eq!(a, b);
}

#[test]
fn table3_asymptotic_column() {
    let out = run(&["table", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 16);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        let printed: f64 = cells[2].parse().unwrap();
        let computed: f64 = cells[5].parse().unwrap();
        assert!((printed - computed).abs() < 5e-5, "row {line}");
    }
    // The copy-paste row carries its note.
    assert!(text.contains("suspected copy-paste"));
}

#[test]
fn price_floating_benchmark_value() {
    let out = run(&[
        "price",
        "--family",
        "floating",
        "--kappa",
        "1",
        "--tau",
        "0.8356164383561644",
        "--sigma",
        "0.2",
        "--s0",
        "100",
        "--r",
        "0.1",
        "--t",
        "1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let approx = v["outputs"]["bachelier_approx"].as_f64().unwrap();
    assert!((approx - 2.13005).abs() < 5e-5, "approx={approx}");
}

#[test]
fn price_itm_parity_limit() {
    let out = run(&[
        "price", "--family", "fixed", "--strike", "90", "--s0", "100", "--sigma", "0.2",
        "--t", "0.25", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["outputs"]["regime"], "ITM");
    assert!((v["outputs"]["price"].as_f64().unwrap() - 10.0).abs() < 1e-10);
}

#[test]
fn region_classification() {
    let out = run(&["region", "--x", "-5", "--tau", "0.01", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["outputs"]["label"], "tau-dotm-put-region-1");
}

#[test]
fn symmetry_maps_floating_call() {
    let out = run(&[
        "symmetry", "--family", "floating", "--kappa", "1", "--r", "0.1", "--q", "0",
        "--tau", "0.5", "--t", "1", "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let o = &v["outputs"];
    assert_eq!(o["family"], "fixed");
    assert_eq!(o["side"], "put");
    assert_eq!(o["strike"], 100.0);
    assert_eq!(o["t"], 0.5);
    assert_eq!(o["r"], 0.0);
    assert_eq!(o["q"], 0.1);
    assert_eq!(o["price_scale"], 1.0);
}

#[test]
fn path_csv_has_duplicated_corner() {
    let out = run(&[
        "path", "--family", "fixed", "--k-over-s0", "1.5", "--tau", "0.5", "--n-grid",
        "16", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let corners = text
        .lines()
        .filter(|l| l.starts_with("0.5,"))
        .count();
    assert_eq!(corners, 2, "corner node appears twice:\n{text}");
}

#[test]
fn json_job_file_round_trips() {
    let dir = std::env::temp_dir();
    let out1 = dir.join("asianray_job_out1.json");
    let job = dir.join("asianray_job.json");
    let run1 = run(&[
        "vol", "--family", "fixed", "--k-over-s0", "1.2", "--sigma", "1", "--tau", "0",
        "--format", "json", "--output", out1.to_str().unwrap(),
    ]);
    assert!(run1.status.success());
    let env1: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    std::fs::write(&job, serde_json::to_string(&env1["inputs"]).unwrap()).unwrap();
    let run2 = run(&["--job", job.to_str().unwrap(), "--format", "json"]);
    assert!(run2.status.success());
    let env2: serde_json::Value = serde_json::from_str(&stdout(&run2)).unwrap();
    assert_eq!(env1["outputs"], env2["outputs"]);
}

#[test]
fn exit_code_2_on_bad_input() {
    let out = run(&["rate", "--family", "fixed", "--k-over-s0", "-1", "--sigma", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["rate", "--family", "floating"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["definitely-not-a-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_3_on_numerical_failure() {
    // A deep-OTM probe whose tail is statistically unreachable.
    let out = run(&[
        "probe", "--family", "fixed", "--k-over-s0", "3.5", "--sigma", "0.1", "--tau",
        "0.25", "--paths", "2000", "--steps", "32", "--ladder", "0.02",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn probe_emits_ladder_rows() {
    let out = run(&[
        "probe", "--family", "fixed", "--k-over-s0", "1.1", "--sigma", "0.4", "--tau",
        "0.25", "--paths", "20000", "--steps", "64", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4, "header + 3 ladder rows:\n{text}");
    assert!(text.starts_with("t,minus_t_log_price\n"));
}

#[test]
fn mc_price_respects_thread_env() {
    // Determinism across ASIANRAY_THREADS settings.
    let base = [
        "price", "--family", "fixed", "--strike", "100", "--s0", "100", "--sigma", "0.2",
        "--t", "0.04", "--tau", "0.5", "--mc", "--paths", "20000", "--steps", "64",
        "--format", "json",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_asianray"))
        .args(base)
        .env("ASIANRAY_THREADS", "1")
        .output()
        .unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_asianray"))
        .args(base)
        .env("ASIANRAY_THREADS", "2")
        .output()
        .unwrap();
    let a: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&two)).unwrap();
    assert_eq!(a["outputs"]["mc_price"], b["outputs"]["mc_price"]);
}
