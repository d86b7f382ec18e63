//! End-to-end tests of the binary: exit codes, report replayability, plan
//! round trips, and the recognize modes.

use std::path::Path;
use std::process::Command;

fn fixture(name: &str) -> String {
    format!("{}/../core/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metric-audit"));
    cmd.args(args).env_remove("METRIC_AUDIT_SEED");
    for (key, value) in env {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).to_string(),
        String::from_utf8_lossy(&output.stderr).to_string(),
    )
}

fn parse_report(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).expect("stdout is a JSON report")
}

fn strip_timestamp(stdout: &str) -> String {
    let mut value = parse_report(stdout);
    value["timestamp"] = serde_json::Value::Null;
    serde_json::to_string_pretty(&value).unwrap()
}

#[test]
fn audit_metric_fixture_exits_zero_with_metric_classification() {
    let input = fixture("points20.csv");
    let (code, stdout, _) = run(&["audit", "--input", &input, "--scorer", "euclidean"]);
    assert_eq!(code, 0);
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["classification"], "metric");
    assert_eq!(report["config"]["command"], "audit");
    assert_eq!(report["report"]["plan"]["mode"], "exhaustive");
}

#[test]
fn fail_on_violation_gates_with_exit_one() {
    let input = fixture("points20.csv");
    let (code, stdout, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "cosine",
        "--fail-on-violation",
    ]);
    assert_eq!(code, 1);
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["classification"], "semimetric");

    // without the gate the same audit exits 0
    let (code, _, _) = run(&["audit", "--input", &input, "--scorer", "cosine"]);
    assert_eq!(code, 0);
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, stderr) = run(&["audit"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--input"));

    let (code, _, _) = run(&[
        "audit",
        "--input",
        "/no/such/file.csv",
        "--scorer",
        "euclidean",
    ]);
    assert_eq!(code, 2);

    let (code, _, stderr) = run(&[
        "audit",
        "--input",
        &fixture("points20.csv"),
        "--scorer",
        "not_a_scorer",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown scorer"));
}

#[test]
fn runtime_errors_exit_three_with_the_module_error_name() {
    let input = fixture("points20.csv");
    let (code, _, stderr) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "euclidean",
        "--triplets",
        "sample:99999999",
    ]);
    assert_eq!(code, 3);
    assert!(stderr.contains("OverSampled"), "stderr: {stderr}");

    // degenerate neighborhood: a gallery of identical points
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "id,label,f0\n1,1,2.0\n2,1,2.0\n3,1,2.0\n4,2,5.0\n").unwrap();
    let (code, _, stderr) = run(&[
        "audit",
        "--input",
        flat.to_str().unwrap(),
        "--scorer",
        "neighborhood",
    ]);
    assert_eq!(code, 3);
    assert!(
        stderr.contains("DegenerateNeighborhood"),
        "stderr: {stderr}"
    );
}

#[test]
fn reports_replay_byte_for_byte_from_the_embedded_config() {
    let input = fixture("points20.csv");
    let args = [
        "audit",
        "--input",
        &input,
        "--scorer",
        "cosine",
        "--triplets",
        "sample:200",
        "--seed",
        "9",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0);

    // rebuild the command line from the embedded config and run it again
    let report = parse_report(&first);
    let config = &report["config"];
    let replay_args = [
        "audit",
        "--input",
        config["input"].as_str().unwrap(),
        "--scorer",
        config["scorer"].as_str().unwrap(),
        "--triplets",
        config["triplets"].as_str().unwrap(),
        "--seed",
        &config["seed"].as_u64().unwrap().to_string(),
        "--abs-eps",
        &config["abs_eps"].as_f64().unwrap().to_string(),
        "--rel-eps",
        &config["rel_eps"].as_f64().unwrap().to_string(),
        "--bin-width",
        &config["bin_width"].as_f64().unwrap().to_string(),
    ];
    let (code, second, _) = run(&replay_args);
    assert_eq!(code, 0);
    assert_eq!(strip_timestamp(&first), strip_timestamp(&second));
}

#[test]
fn seed_falls_back_to_the_environment_variable() {
    let input = fixture("points20.csv");
    let args = [
        "audit",
        "--input",
        &input,
        "--scorer",
        "euclidean",
        "--triplets",
        "sample:50",
    ];
    let (code, via_env, _) = run_with_env(&args, &[("METRIC_AUDIT_SEED", "1234")]);
    assert_eq!(code, 0);
    let (_, via_flag, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "euclidean",
        "--triplets",
        "sample:50",
        "--seed",
        "1234",
    ]);
    assert_eq!(strip_timestamp(&via_env), strip_timestamp(&via_flag));
    let report = parse_report(&via_env);
    assert_eq!(report["config"]["seed"], 1234);
}

#[test]
fn classify_drops_the_plot_payloads() {
    let input = fixture("points20.csv");
    let (code, stdout, _) = run(&["classify", "--input", &input, "--scorer", "cosine"]);
    assert_eq!(code, 0);
    let report = parse_report(&stdout);
    assert_eq!(report["config"]["command"], "classify");
    assert!(report["report"]["symmetry_histogram"].is_null());
    assert!(report["report"]["violation_curve"].is_null());
    assert_eq!(report["report"]["classification"], "semimetric");
}

#[test]
fn plan_emits_and_audit_replays_it() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.csv");
    let input = fixture("points20.csv");

    let (code, _, _) = run(&[
        "plan",
        "--n",
        "20",
        "--triplets",
        "sample:100",
        "--seed",
        "5",
        "--output",
        plan_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&plan_path).unwrap();
    assert!(text.starts_with("i,j,k\n"));
    assert_eq!(text.lines().count(), 101);

    let file_spec = format!("file:{}", plan_path.display());
    let (code, from_file, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "cosine",
        "--triplets",
        &file_spec,
    ]);
    assert_eq!(code, 0);
    let report = parse_report(&from_file);
    assert_eq!(report["report"]["plan"]["mode"], "imported");
    assert_eq!(report["report"]["plan"]["count"], 100);

    // the sampled plan and its file replay check the same triples
    let (_, direct, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "cosine",
        "--triplets",
        "sample:100",
        "--seed",
        "5",
    ]);
    let direct = parse_report(&direct);
    assert_eq!(
        report["report"]["axioms"]["triangle"]["violations"],
        direct["report"]["axioms"]["triangle"]["violations"]
    );
}

#[test]
fn plan_import_validates_indices() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "i,j,k\n0,1,99\n").unwrap();
    let (code, _, stderr) = run(&["plan", "--import", bad.to_str().unwrap(), "--n", "10"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("PlanError"));
}

#[test]
fn stratified_audit_runs_from_dataset_labels() {
    let input = fixture("points20.csv");
    let (code, stdout, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "euclidean",
        "--triplets",
        "stratified:60",
        "--strata",
        "all_same=0.2,two_same=0.5,all_distinct=0.3",
        "--seed",
        "11",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["plan"]["mode"], "stratified");
    assert_eq!(report["report"]["plan"]["count"], 60);
}

#[test]
fn meta_reports_the_lfw_gap() {
    let (code, stdout, _) = run(&["meta", "--dataset", "LFW"]);
    assert_eq!(code, 0);
    let report = parse_report(&stdout);
    let gap = report["report"]["gap"].as_f64().unwrap();
    assert!((gap - 7.65).abs() < 0.01);

    let (code, csv, _) = run(&["meta", "--dataset", "Caltech30", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("year,flag,max_accuracy\n"));
    assert!(csv.contains("metric"));
}

#[test]
fn matrix_audit_accepts_precomputed_scores() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("scores.csv");
    std::fs::write(&matrix, "# polarity=dissimilarity\n0,1,5\n2,0,1\n1,4,0\n").unwrap();
    let (code, stdout, _) = run(&["audit", "--matrix", matrix.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["scorer"], "precomputed");
    assert!(
        report["report"]["axioms"]["symmetry"]["violations"]
            .as_u64()
            .unwrap()
            > 0
    );

    // a matrix plus a scorer is ambiguous
    let (code, _, _) = run(&[
        "audit",
        "--matrix",
        matrix.to_str().unwrap(),
        "--scorer",
        "euclidean",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn audit_sidecars_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let histogram = dir.path().join("hist.csv");
    let violations = dir.path().join("violations.csv");
    let input = fixture("points20.csv");
    let (code, stdout, _) = run(&[
        "audit",
        "--input",
        &input,
        "--scorer",
        "cosine",
        "--curve-csv",
        curve.to_str().unwrap(),
        "--histogram-csv",
        histogram.to_str().unwrap(),
        "--violations-csv",
        violations.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let curve_text = std::fs::read_to_string(&curve).unwrap();
    assert!(curve_text.starts_with("triplets_checked,cumulative_violations\n"));
    let histogram_text = std::fs::read_to_string(&histogram).unwrap();
    assert!(histogram_text.starts_with("lo,count\n"));

    // the sidecar holds the full violation stream, beyond the 100-record cap
    let report = parse_report(&stdout);
    let total: u64 = ["non_negativity", "identity", "symmetry", "triangle"]
        .iter()
        .map(|axiom| {
            report["report"]["axioms"][axiom]["violations"]
                .as_u64()
                .unwrap()
        })
        .sum();
    let violations_text = std::fs::read_to_string(&violations).unwrap();
    assert_eq!(violations_text.lines().count() as u64, total + 1);
}

#[test]
fn recognize_identify_and_search_agree() {
    let dir = tempfile::tempdir().unwrap();
    let gallery = dir.path().join("gallery.csv");
    std::fs::write(
        &gallery,
        "id,label,f0,f1\n1,1,0.0,0.0\n2,1,0.5,0.0\n3,2,5.0,5.0\n4,3,-4.0,2.0\n",
    )
    .unwrap();
    let probe = dir.path().join("probe.csv");
    std::fs::write(&probe, "id,label,f0,f1\n9,0,4.5,5.5\n").unwrap();

    let (code, stdout, _) = run(&[
        "recognize",
        "--mode",
        "identify",
        "--gallery",
        gallery.to_str().unwrap(),
        "--probe",
        probe.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["results"][0]["labels"][0], 2);

    let (code, stdout, _) = run(&[
        "recognize",
        "--mode",
        "search",
        "--k",
        "3",
        "--gallery",
        gallery.to_str().unwrap(),
        "--probe",
        probe.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["results"][0]["labels"][0], 2);
    assert_eq!(
        report["report"]["results"][0]["labels"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn recognize_pair_and_verify_modes() {
    let dir = tempfile::tempdir().unwrap();
    let gallery = dir.path().join("gallery.csv");
    std::fs::write(&gallery, "id,label,f0,f1\n1,1,1.0,0.0\n2,2,0.0,9.0\n").unwrap();
    let pair_match = dir.path().join("pair.csv");
    std::fs::write(&pair_match, "id,label,f0,f1\n8,0,2.0,0.0\n9,0,4.0,0.0\n").unwrap();

    let (code, stdout, _) = run(&[
        "recognize",
        "--mode",
        "pair",
        "--gallery",
        gallery.to_str().unwrap(),
        "--probe",
        pair_match.to_str().unwrap(),
        "--scorer",
        "cosine",
        "--threshold",
        "0.9",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["results"][0]["labels"][0], 1);
    assert!((report["report"]["results"][0]["score"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let (code, stdout, _) = run(&[
        "recognize",
        "--mode",
        "verify",
        "--gallery",
        gallery.to_str().unwrap(),
        "--probe",
        pair_match.to_str().unwrap(),
        "--claimed-class",
        "1",
        "--threshold",
        "1.5",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let report = parse_report(&stdout);
    // probe (2,0) is 1.0 from (1,0): accepted; probe (4,0) is 3.0 away: rejected
    assert_eq!(report["report"]["results"][0]["labels"][0], 1);
    assert_eq!(report["report"]["results"][1]["labels"][0], 0);
}

#[test]
fn mahalanobis_spec_with_w_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let w_path = dir.path().join("w.csv");
    std::fs::write(
        &w_path,
        "2,1,0,0,0\n1,2,0,0,0\n0,0,1,0,0\n0,0,0,1,0\n0,0,0,0,1\n",
    )
    .unwrap();
    let input = fixture("points20.csv");
    let spec = format!(
        "{{\"scorer\":\"mahalanobis\",\"W_csv\":\"{}\",\"sqrt\":true}}",
        w_path.display()
    );
    let (code, stdout, _) = run(&["audit", "--input", &input, "--scorer", &spec]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let report = parse_report(&stdout);
    assert_eq!(report["report"]["classification"], "metric");
}

#[test]
fn fixture_files_exist_for_readme_examples() {
    for name in ["points20.csv", "lfw.csv", "caltech15.csv", "caltech30.csv"] {
        assert!(Path::new(&fixture(name)).exists(), "{name} missing");
    }
}
