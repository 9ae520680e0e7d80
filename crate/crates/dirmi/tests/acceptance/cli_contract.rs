//! End-to-end contract tests for the `dirmi` binary: exact output text,
//! config-file precedence, and the process exit-code taxonomy
//! (0 success, 1 verification failure, 2 input error, 3 domain error,
//! 4 degenerate estimation).

use std::path::Path;
use std::process::{Command, Output};

use dirmi::data::write_simplex_csv;
use dirmi::dirichlet::DirichletParams;

fn dirmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirmi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn dirmi_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirmi"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

#[test]
fn score_uniform_binary_prints_exact_report() {
    let output = dirmi(&["score", "--alpha", "1,1"]);
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(
        stdout(&output),
        "predictive_entropy = 0.69314718056\n\
         epistemic = 0.19314718056\n\
         aleatoric = 0.5\n\
         mjent = 0.5\n\
         baba = 0.38629436112\n"
    );
}

#[test]
fn score_rejects_nonpositive_alpha_with_domain_exit() {
    let output = dirmi(&["score", "--alpha", "-1,2"]);
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("alpha"), "stderr: {}", stderr(&output));
    assert!(stdout(&output).is_empty());
}

#[test]
fn score_rejects_malformed_alpha_with_input_exit() {
    let output = dirmi(&["score", "--alpha", "1,abc"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn usage_errors_and_help() {
    let output = dirmi(&["no-such-command"]);
    assert_eq!(output.status.code(), Some(2));
    let output = dirmi(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("score"));
    let output = dirmi(&["score", "--alpha"]); // missing value
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "# defaults\nalpha = 1,1\n").unwrap();
    let config = config.to_str().unwrap();

    // value comes from the file
    let from_file = dirmi(&["--config", config, "score"]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert!(stdout(&from_file).starts_with("predictive_entropy = 0.69314718056\n"));

    // explicit flag wins over the file
    let overridden = dirmi(&["--config", config, "score", "--alpha", "2,2"]);
    assert_eq!(overridden.status.code(), Some(0));
    assert_ne!(stdout(&overridden), stdout(&from_file));
    assert!(stdout(&overridden).contains("aleatoric = 0.583333333333\n"));
}

#[test]
fn unknown_config_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "alpha = 1,1\nfrobnicate = 7\n").unwrap();
    let output = dirmi(&["--config", config.to_str().unwrap(), "score"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("frobnicate"), "stderr: {}", stderr(&output));
}

#[test]
fn missing_config_file_is_an_input_error() {
    let output = dirmi(&["--config", "/nonexistent/nope.conf", "score", "--alpha", "1,1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn estimate_recovers_concentrations_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("draws.csv");
    let truth = [2.0, 3.0];
    let params = DirichletParams::new(truth.to_vec()).unwrap();
    let batch = params.sample(100_000, 5).unwrap();
    write_simplex_csv(&batch, &csv).unwrap();

    let output = dirmi(&[
        "estimate",
        "--samples",
        csv.to_str().unwrap(),
        "--statistic",
        "mean-of-logs",
        "--refine",
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    let alpha_line = text
        .lines()
        .find(|l| l.starts_with("alpha = "))
        .expect("alpha line");
    let fitted: Vec<f64> = alpha_line["alpha = ".len()..]
        .split(',')
        .map(|v| v.trim().parse().unwrap())
        .collect();
    assert_eq!(fitted.len(), 2);
    for (&got, &want) in fitted.iter().zip(&truth) {
        let rel = (got - want).abs() / want;
        assert!(rel <= 0.05, "fitted {got} vs {want} (rel {rel:.4})");
    }
    assert!(text.contains("converged = true"), "{text}");
    assert!(text.contains("statistic = mean-of-logs"), "{text}");
}

#[test]
fn estimate_reports_zero_for_degenerate_class() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("degenerate.csv");
    let mut rows = String::new();
    for i in 0..200 {
        let p = 0.3 + 0.4 * (i as f64 / 199.0);
        rows.push_str(&format!("{p},0,{}\n", 1.0 - p));
    }
    std::fs::write(&csv, rows).unwrap();

    let output = dirmi(&["estimate", "--samples", csv.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    let alpha_line = text.lines().find(|l| l.starts_with("alpha = ")).unwrap();
    let fitted: Vec<&str> = alpha_line["alpha = ".len()..].split(',').collect();
    assert_eq!(fitted[1].trim(), "0", "middle class must pin to exactly zero: {text}");
}

#[test]
fn estimate_rejects_rows_off_the_simplex() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "0.5,0.3\n0.4,0.4\n").unwrap();
    let output = dirmi(&["estimate", "--samples", csv.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("sum"), "stderr: {}", stderr(&output));
}

#[test]
fn estimate_degenerate_everywhere_has_its_own_exit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("uniformish.csv");
    std::fs::write(&csv, "0.5,0.5\n0.4,0.6\n0.6,0.4\n0.5,0.5\n").unwrap();
    let output = dirmi(&[
        "estimate",
        "--samples",
        csv.to_str().unwrap(),
        "--degenerate-epsilon",
        "0.9",
    ]);
    assert_eq!(output.status.code(), Some(4), "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("degenerate"));
}

#[test]
fn verify_default_style_grid_passes_all_checks() {
    let output = dirmi(&[
        "verify",
        "--classes",
        "2,3",
        "--alpha-grid",
        "0.5,2",
        "--mc-samples",
        "20000",
        "--seed",
        "7",
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("verify: 5/5 checks passed"), "{text}");
    assert_eq!(text.matches("PASS").count(), 5, "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn al_run_emits_exact_row_arithmetic_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.csv");

    let output = dirmi_in(
        dir.path(),
        &[
            "al-run",
            "--strategies",
            "random,bald-analytic",
            "--seeds",
            "3",
            "--k",
            "10",
            "--k-tot",
            "60",
            "--pool",
            "150",
            "--test",
            "80",
            "--m",
            "5",
            "--epochs",
            "10",
            "--hidden",
            "8",
            "--out",
            curves.to_str().unwrap(),
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));

    let text = std::fs::read_to_string(&curves).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,seed,iteration,labeled_count,test_accuracy,wall_time_s"
    );
    let rows: Vec<&str> = lines.collect();
    // 2 strategies x 3 seeds x (1 initial + 5 acquisitions)
    assert_eq!(rows.len(), 36);
    assert_eq!(rows.iter().filter(|r| r.starts_with("random,")).count(), 18);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",0")).count(), 36, "timing disabled by default");
    let last_fields: Vec<&str> = rows.last().unwrap().split(',').collect();
    assert_eq!(last_fields[2], "5", "final iteration index");
    assert_eq!(last_fields[3], "60", "budget spent exactly");

    // summary lines on stdout
    let summary = stdout(&output);
    assert!(summary.contains("final_mean_accuracy random = "), "{summary}");
    assert!(summary.contains("final_mean_accuracy bald-analytic = "), "{summary}");

    // the aggregator digests the same file
    let agg = dirmi(&["plot-data", "--curves", curves.to_str().unwrap()]);
    assert_eq!(agg.status.code(), Some(0), "{}", stderr(&agg));
    let agg_text = stdout(&agg);
    let mut agg_lines = agg_text.lines();
    assert_eq!(
        agg_lines.next().unwrap(),
        "strategy,labeled_count,mean_accuracy,std_accuracy,runs"
    );
    let agg_rows: Vec<&str> = agg_lines.collect();
    // 2 strategies x 6 labeled counts, each averaging 3 runs
    assert_eq!(agg_rows.len(), 12);
    assert!(agg_rows.iter().all(|r| r.ends_with(",3")), "{agg_text}");
}

#[test]
fn al_run_validates_budget_divisibility() {
    let output = dirmi(&[
        "al-run", "--k", "7", "--k-tot", "60", "--pool", "100", "--test", "50",
    ]);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr(&output));
    assert!(
        stderr(&output).contains("not a multiple"),
        "stderr: {}",
        stderr(&output)
    );
    assert!(stdout(&output).is_empty(), "nothing should print before validation");
}

#[test]
fn plot_data_requires_a_curves_file() {
    let output = dirmi(&["plot-data"]);
    assert_eq!(output.status.code(), Some(2));
    let output = dirmi(&["plot-data", "--curves", "/nonexistent/missing.csv"]);
    assert_eq!(output.status.code(), Some(2));
}
