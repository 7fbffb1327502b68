use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn egsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egsat"))
        .args(args)
        .env("EGSAT_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

#[test]
fn check_reports_clean_model_on_stdout() {
    let out = egsat(&["check", &fixture("bqp.egsat")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "No issues found.\n");
    assert!(stderr(&out).is_empty());
}

#[test]
fn check_reports_errors_on_stderr_with_status_one() {
    let out = egsat(&["check", &fixture("leaf-emotional.egsat")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert!(err.contains("E002"), "stderr: {err}");
    assert!(err.contains("leaf-emotional.egsat:3:3"), "stderr: {err}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = egsat(&["check", "no-such-file.egsat"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-file.egsat"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = egsat(&["check", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fmt_is_idempotent() {
    let path = fixture("fig7a.egsat");
    let once = egsat(&["fmt", &path]);
    assert_eq!(once.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let formatted = dir.path().join("formatted.egsat");
    std::fs::write(&formatted, stdout(&once)).unwrap();
    let twice = egsat(&["fmt", formatted.to_str().unwrap()]);
    assert_eq!(stdout(&once), stdout(&twice));
}

#[test]
fn fmt_write_rewrites_the_file_in_place() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.egsat");
    std::fs::write(&path, "model \"M\" { emotional \"a\" { how { functional \"b\" } } }").unwrap();
    let out = egsat(&["fmt", path.to_str().unwrap(), "--write"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("how and {"));
    assert!(text.ends_with("}\n"));
}

#[test]
fn trace_how_lists_descendants() {
    let out = egsat(&["trace", &fixture("fig7a.egsat"), "--how", "E-completion"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("F-doc"));
    assert!(text.contains("F-cred"));
    assert!(text.contains("F-feedback"));
}

#[test]
fn trace_unknown_goal_fails_with_e009() {
    let out = egsat(&["trace", &fixture("fig7a.egsat"), "--why", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("E009"));
}

#[test]
fn trace_requires_exactly_one_direction() {
    let out = egsat(&["trace", &fixture("fig7a.egsat")]);
    assert_eq!(out.status.code(), Some(2));
    let out = egsat(&["trace", &fixture("fig7a.egsat"), "--how", "a", "--why", "b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wilcoxon_normal_matches_published_p_value() {
    let out = egsat(&["stats", "wilcoxon", "--csv", &fixture("table4-time.csv"), "--method", "normal"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("T = 0"), "stdout: {text}");
    assert!(text.contains("z = -3.0594"), "stdout: {text}");
    assert!(text.contains("p = 0.00221"), "stdout: {text}");
}

#[test]
fn wilcoxon_exact_shows_the_approximation_gap() {
    let out = egsat(&["stats", "wilcoxon", "--csv", &fixture("table4-time.csv"), "--method", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("p = 0.00048"));
}

#[test]
fn freq_groups_raw_records() {
    let out = egsat(&["stats", "freq", "--csv", &fixture("table2-records.csv")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Sense of learning at my own pace"));
    assert_eq!(text.matches("| 4 |").count(), 4, "stdout: {text}");
}

#[test]
fn malformed_csv_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    let out = egsat(&["stats", "wilcoxon", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("S005"));
}

#[test]
fn consolidate_applies_directives() {
    let out = egsat(&[
        "consolidate",
        &fixture("bqp.egsat"),
        "--directives",
        &fixture("fig7b.directives"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Making Learning Progress Visible"));
    assert!(!text.contains("id:F-doc"));
    assert!(!text.contains("id:F-ack"));
}

#[test]
fn render_writes_dot_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.dot");
    let out = egsat(&[
        "render",
        &fixture("fig7a.egsat"),
        "--format",
        "dot",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("parallelogram"));
}

#[test]
fn render_json_round_trips_through_check() {
    let out = egsat(&["render", &fixture("bqp.egsat"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("{\"name\":"));
}

#[test]
fn elicit_writes_a_checkable_skeleton() {
    use std::io::Write;
    use std::process::Stdio;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("elicited.egsat");
    let mut child = Command::new(env!("CARGO_BIN_EXE_egsat"))
        .args(["elicit", "--out", path.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"Demo\nSense of fun\nPhysicalPleasure\nPlay a game, Watch a clip\nQuick to load\ny\nn\ny\n\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let check = egsat(&["check", path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "stderr: {}", stderr(&check));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("Play a game"));
    assert!(!text.contains("Watch a clip"));
    assert!(text.contains("Quick to load"));
}
