//! End-to-end tests driving the compiled binary against the shipped
//! fixture files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use delay_h2_cli::io::{PatternFile, PlantFile};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delay-h2"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn chain_args() -> Vec<String> {
    vec![
        "synthesize".into(),
        "--plant".into(),
        fixtures_dir().join("chain.json").display().to_string(),
        "--pattern".into(),
        fixtures_dir().join("chain_pattern.json").display().to_string(),
    ]
}

#[test]
fn synthesize_chain_reproduces_reference_norms() {
    let args = chain_args();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&refs);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("report is valid JSON");
    let norms = &report["norms"];
    assert!((norms["centralized"].as_f64().unwrap() - 2.0853).abs() <= 1e-3);
    assert!((norms["delayed"].as_f64().unwrap() - 2.1780).abs() <= 1e-3);
    assert!((norms["decentralized"].as_f64().unwrap() - 2.1082).abs() <= 1e-3);
    assert_eq!(report["pattern"]["quadratically_invariant"], serde_json::json!(true));
}

#[test]
fn synthesize_output_is_byte_identical_across_runs() {
    let args = chain_args();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let first = run(&refs);
    let second = run(&refs);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn pure_delay_pattern_matches_delayed_norm() {
    let plant = fixtures_dir().join("chain.json").display().to_string();
    let output = run(&["synthesize", "--plant", &plant, "--pattern", "pure-delay", "--n", "2"]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["norms"]["decentralized"], report["norms"]["delayed"]);
}

#[test]
fn oracle_flag_reports_agreeing_norm() {
    let plant = fixtures_dir().join("chain.json").display().to_string();
    let pattern = fixtures_dir().join("chain_pattern.json").display().to_string();
    let output = run(&[
        "synthesize", "--plant", &plant, "--pattern", &pattern, "--oracle", "M=60",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let oracle = report["norms"]["oracle"]["norm"].as_f64().unwrap();
    let synthesis = report["norms"]["decentralized"].as_f64().unwrap();
    assert!((oracle - synthesis).abs() <= 1e-3);
}

#[test]
fn sweep_emits_ordered_csv() {
    let plant = fixtures_dir().join("sweep.json").display().to_string();
    let output = run(&["sweep", "--plant", &plant, "--family", "all", "--n-range", "1..4"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,N,norm"));
    let rows: Vec<(String, usize, f64)> = lines
        .map(|line| {
            let mut parts = line.split(',');
            (
                parts.next().unwrap().to_string(),
                parts.next().unwrap().parse().unwrap(),
                parts.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 16);
    // monotone within each family, ordered between families at each N
    let norm_of = |family: &str, n: usize| {
        rows.iter().find(|(f, m, _)| f == family && *m == n).unwrap().2
    };
    for family in ["tri", "di", "low", "pure-delay"] {
        for n in 1..4 {
            assert!(norm_of(family, n) <= norm_of(family, n + 1) + 1e-9);
        }
    }
    for n in 1..=4 {
        assert!(norm_of("tri", n) <= norm_of("di", n) + 1e-9);
        assert!(norm_of("di", n) <= norm_of("low", n) + 1e-9);
        assert!(norm_of("low", n) <= norm_of("pure-delay", n) + 1e-9);
    }
}

#[test]
fn single_point_sweep_has_one_row() {
    let plant = fixtures_dir().join("sweep.json").display().to_string();
    let output = run(&["sweep", "--plant", &plant, "--family", "di", "--n-range", "3..3"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("di,3,"));
}

#[test]
fn check_passes_on_chain_fixture() {
    let plant = fixtures_dir().join("chain.json").display().to_string();
    let pattern = fixtures_dir().join("chain_pattern.json").display().to_string();
    let output = run(&["check", "--plant", &plant, "--pattern", &pattern]);
    assert!(output.status.success(), "stdout: {}", String::from_utf8_lossy(&output.stdout));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    assert!(!text.contains("FAIL"));
}

#[test]
fn perturbed_parameter_fails_stationarity_check() {
    let plant = fixtures_dir().join("chain.json").display().to_string();
    let output =
        run(&["check", "--plant", &plant, "--pattern", "chain", "--perturb-q", "0.1"]);
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("FAIL stationarity"));
}

#[test]
fn invalid_plant_gives_validation_exit_code() {
    let dir = std::env::temp_dir().join("delay-h2-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("degenerate.json");
    let mut file: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures_dir().join("chain.json")).unwrap(),
    )
    .unwrap();
    file["D12"] = serde_json::json!(vec![vec![0.0; 3]; 6]);
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let output = run(&[
        "synthesize",
        "--plant",
        path.to_str().unwrap(),
        "--pattern",
        "chain",
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("D12'D12 not positive definite"), "stderr: {stderr}");
}

#[test]
fn fixture_files_round_trip() {
    for name in ["chain.json", "sweep.json"] {
        let path = fixtures_dir().join(name);
        let parsed = PlantFile::load(&path).unwrap().to_plant().unwrap();
        let serialized = serde_json::to_string(&PlantFile::from_plant(&parsed)).unwrap();
        let reparsed: PlantFile = serde_json::from_str(&serialized).unwrap();
        assert_eq!(reparsed.to_plant().unwrap(), parsed, "{name} did not round trip");
    }
    let path = fixtures_dir().join("chain_pattern.json");
    let parsed = PatternFile::load(&path).unwrap().to_pattern().unwrap();
    let serialized = serde_json::to_string(&PatternFile::from_pattern(&parsed)).unwrap();
    let reparsed: PatternFile = serde_json::from_str(&serialized).unwrap();
    assert_eq!(reparsed.to_pattern().unwrap(), parsed, "pattern did not round trip");
}

#[test]
fn delays_form_of_pattern_file_matches_masks_form() {
    let dir = std::env::temp_dir().join("delay-h2-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain_delays.json");
    std::fs::write(
        &path,
        r#"{"N": 2, "u_blocks": [1,1,1], "y_blocks": [1,1,1],
            "delays": [[1,2,3],[2,1,2],[3,2,1]]}"#,
    )
    .unwrap();
    let from_delays = PatternFile::load(&path).unwrap().to_pattern().unwrap();
    let from_masks = PatternFile::load(&fixtures_dir().join("chain_pattern.json"))
        .unwrap()
        .to_pattern()
        .unwrap();
    assert_eq!(from_delays, from_masks);
}

#[test]
fn emit_controller_includes_realization() {
    let plant = fixtures_dir().join("chain.json").display().to_string();
    let output = run(&[
        "synthesize",
        "--plant",
        &plant,
        "--pattern",
        "chain",
        "--emit-controller",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(report["controller"]["q_star"]["a"].is_array());
    assert_eq!(report["controller"]["v_star"].as_array().unwrap().len(), 2);
}
