use std::process::{Command, Output};

use qot_core::protocol::Transcript;

fn qot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qot")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn run_reports_half_knowledge_rate() {
    let out = qot(&["run", "--lambda", "+1", "--trials", "100000", "--loss", "0", "--seed", "42"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rate = field(&text, "bob_knows_rate");
    assert!((rate - 0.5).abs() < 5.0 * (0.25f64 / 1e5).sqrt(), "{rate}");
    assert_eq!(field(&text, "accuracy_if_knows"), 1.0);
    assert_eq!(field(&text, "mean_rounds"), 1.0);
}

#[test]
fn single_session_transcript_follows_grammar() {
    let out = qot(&["run", "--trials", "1", "--loss", "0", "--dump-transcript"]);
    assert!(out.status.success());
    let transcript: Transcript = stdout(&out).parse().unwrap();
    assert_eq!(transcript.entries.len(), 4);
    assert!(transcript.follows_grammar());
    // the summary goes to stderr when the transcript owns stdout
    assert!(String::from_utf8_lossy(&out.stderr).contains("bob_knows_rate"));
}

#[test]
fn lossy_transcripts_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    let out = qot(&[
        "run", "--trials", "5", "--loss", "0.5", "--lambda", "0", "--dump-transcript", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let sessions: Vec<&str> = text.split("# session ").skip(1).collect();
    assert_eq!(sessions.len(), 5);
    for s in sessions {
        let t: Transcript = s.split_once('\n').unwrap().1.parse().unwrap();
        assert!(t.follows_grammar(), "{s}");
    }
    assert!(stdout(&out).contains("lambda                -1"));
}

#[test]
fn pathological_loss_aborts_with_code_3() {
    let out = qot(&["run", "--loss", "0.99", "--max-rounds", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4 attempts"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--loss", "1.0"][..],
        &["run", "--lambda", "2"],
        &["run", "--trials", "0"],
        &["run", "--strategy", "fixed", "--alpha", "0"],
        &["attack", "--strategy", "storage", "--alpha", "1"],
        &["sweep", "--grid-step", "0"],
        &["teleport"],
    ] {
        assert_eq!(qot(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qot(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_exits_4() {
    let out = qot(&["sweep", "--trials", "10", "--output", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_passes_by_default() {
    let out = qot(&["verify", "--trials", "50000"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("summary: 12/12 checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn injected_fault_fails_the_oracle_check() {
    let out = qot(&["verify", "--trials", "1000", "--inject-fault", "flip-first-particle"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("oracle-vs-analytic") && l.contains("FAIL")), "{text}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle-vs-analytic"));
}

#[test]
fn coarse_sweep_has_three_by_three_cells() {
    let out = qot(&["sweep", "--grid-step", "1.5707963268", "--trials", "100"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta,lambda,analytic,brute_force,monte_carlo,std_error,trials"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let analytic: f64 = row[3].parse().unwrap();
        assert!([0.75, 0.5, 0.25].iter().any(|v| (analytic - v).abs() < 1e-9), "{analytic}");
        if row[0] == row[1] {
            assert_eq!(row[3], "0.7500000000");
        }
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("argmax_on_diagonal true"));
}

#[test]
fn default_sweep_diagonal_is_three_quarters() {
    let out = qot(&["sweep", "--trials", "50", "--lambda", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 17 * 17);
    let diagonal: Vec<_> = rows.iter().filter(|r| r[0] == r[1]).collect();
    assert_eq!(diagonal.len(), 17);
    assert!(diagonal.iter().all(|r| r[3] == "0.7500000000" && r[2] == "-1"));
}

#[test]
fn same_seed_same_bytes() {
    let a = qot(&["sweep", "--grid-step", "0.25pi", "--trials", "500", "--seed", "9"]);
    let b = qot(&["sweep", "--grid-step", "0.25pi", "--trials", "500", "--seed", "9"]);
    let c = qot(&["sweep", "--grid-step", "0.25pi", "--trials", "500", "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn attack_and_ck_compare_report() {
    let out = qot(&["attack", "--strategy", "fixed", "--alpha", "0", "--beta", "pi", "--trials", "20000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "analytic"), 0.25);
    assert!(text.contains("agreement    yes"));

    let out = qot(&["ck-compare", "--trials", "20000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "single_particle_exact") - 0.8535533906).abs() < 1e-10);
    assert_eq!(field(&text, "two_particle_ceiling"), 0.75);
}
