use std::path::Path;
use std::process::{Command, Output};

use diaggate_cli::dataset::{Dataset, Value};

fn diaggate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diaggate"))
        .args(args)
        .env_remove("DIAGGATE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_dataset(out: &Output) -> Dataset {
    String::from_utf8(out.stdout.clone()).unwrap().parse().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn float(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("{v:?} is not numeric"))
}

fn column<'a>(d: &'a Dataset, name: &str) -> Vec<&'a Value> {
    let c = d.column(name).unwrap_or_else(|| panic!("no column {name}"));
    d.rows.iter().map(|r| &r[c]).collect()
}

fn write_matrix(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sample_writes_records_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cloud.jsonl");
    let path = out.to_str().unwrap();
    let args = ["sample", "--kind", "unimodular", "--n", "4", "--samples", "50", "--seed", "9", "--out", path, "--bins", "10"];
    let run = diaggate(&args);
    assert!(run.status.success(), "{}", stderr(&run));

    let data = Dataset::read(&out).unwrap();
    assert_eq!(data.rows.len(), 200);
    assert_eq!(data.manifest.seed, Some(9));
    assert_eq!(data.manifest.subcommand, "sample");
    // s²/N over one matrix sums to N.
    let values: Vec<f64> = column(&data, "value").into_iter().map(float).collect();
    for chunk in values.chunks(4) {
        assert!((chunk.iter().sum::<f64>() - 4.0).abs() < 1e-10);
    }
    assert!(column(&data, "re").iter().all(|v| matches!(v, Value::Float(_))));

    let hist = Dataset::read(&dir.path().join("cloud.hist.jsonl")).unwrap();
    assert_eq!(hist.rows.len(), 10);
    let total: f64 = column(&hist, "count").into_iter().map(float).sum();
    assert_eq!(total, 200.0);

    let rerun = diaggate(&args);
    assert!(rerun.status.success());
    assert_eq!(Dataset::read(&out).unwrap().payload(), data.payload());
}

#[test]
fn sample_kinds_produce_normalized_spectra() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["hilbert_schmidt_state", "diagonal_gate", "haar_pure_state"] {
        let out = dir.path().join(format!("{kind}.csv"));
        let run = diaggate(&["sample", "--kind", kind, "--n", "3", "--samples", "20", "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{kind}: {}", stderr(&run));
        assert!(std::fs::read_to_string(&out).unwrap().starts_with("# manifest"));
        let data = Dataset::read(&out).unwrap();
        let per_sample = data.rows.len() / 20;
        let values: Vec<f64> = column(&data, "value").into_iter().map(float).collect();
        for chunk in values.chunks(per_sample) {
            assert!((chunk.iter().sum::<f64>() - 1.0).abs() < 1e-10, "{kind}");
        }
        assert!(column(&data, "re").iter().all(|v| **v == Value::Null));
    }
}

#[test]
fn csv_and_jsonl_carry_the_same_rows() {
    let dir = tempfile::tempdir().unwrap();
    let read = |fmt: &str| {
        let out = dir.path().join(format!("m.{fmt}"));
        let run = diaggate(&["moments", "--n", "3", "--n-max", "4", "--samples", "500", "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", stderr(&run));
        Dataset::read(&out).unwrap()
    };
    let (a, b) = (read("csv"), read("jsonl"));
    assert_eq!(a.columns, b.columns);
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.summary, b.summary);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.jsonl");
    let out = out.to_str().unwrap();
    let cases: [&[&str]; 6] = [
        &["sample", "--kind", "unimodular", "--n", "3", "--samples", "0", "--out", out],
        &["sample", "--kind", "gaussian", "--n", "3", "--samples", "5", "--out", out],
        &["moments", "--n", "3", "--n-max", "13"],
        &["entropy", "--n", "2", "--samples", "0"],
        &["verify", "--suite", "everything"],
        &["entropy", "--n", "2", "--q", "-1"],
    ];
    for args in cases {
        let run = diaggate(args);
        assert_eq!(run.status.code(), Some(2), "{args:?}: {}", stderr(&run));
    }
    let run = diaggate(&["sample", "--kind", "unimodular", "--n", "3", "--samples", "0", "--out", out]);
    assert!(stderr(&run).contains("sample count"), "{}", stderr(&run));
}

#[test]
fn unwritable_path_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.jsonl");
    let run = diaggate(&["sample", "--kind", "ginibre", "--n", "2", "--samples", "3", "--out", bad.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains(bad.to_str().unwrap()), "{}", stderr(&run));
}

#[test]
fn moments_table_at_n3() {
    let run = diaggate(&["moments", "--n", "3", "--n-max", "5", "--samples", "2000", "--seed", "3"]);
    assert!(run.status.success(), "{}", stderr(&run));
    let d = stdout_dataset(&run);
    assert_eq!(d.rows.len(), 5);
    assert_eq!(column(&d, "exact")[1], &Value::Text("5/9".into()));
    assert!((float(column(&d, "scaled")[1]) - 5.0 / 3.0).abs() < 1e-15);
    let seq: Vec<f64> = column(&d, "scaled")
        .into_iter()
        .enumerate()
        .map(|(i, v)| float(v) * 3f64.powi(i as i32))
        .collect();
    for (got, want) in seq.iter().zip([1.0, 5.0, 29.0, 181.0, 1181.0]) {
        assert!((got - want).abs() < 1e-9, "{seq:?}");
    }
    let hs = column(&d, "hs_analytic");
    assert!(matches!(hs[1], Value::Float(_)) && matches!(hs[2], Value::Float(_)));
    assert!(hs[0] == &Value::Null && hs[3] == &Value::Null);
}

#[test]
fn entropy_at_n2_is_deterministic() {
    let args = ["entropy", "--n", "2", "--samples", "20000", "--seed", "17"];
    let first = diaggate(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let d = stdout_dataset(&first);
    let row = &d.rows[0];
    assert!((float(&row[d.column("ue_analytic").unwrap()]) - (4f64.ln() - 1.0)).abs() < 1e-12);
    assert!((float(&row[d.column("hs_analytic").unwrap()]) - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(row[d.column("consistent").unwrap()], Value::Bool(true));

    let second = stdout_dataset(&diaggate(&args));
    assert_eq!(second.payload(), d.payload());
    let strip = |text: &[u8]| -> String {
        String::from_utf8_lossy(text).lines().skip(1).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&first.stdout), strip(&diaggate(&args).stdout));
}

#[test]
fn entropy_renyi_order_has_no_closed_form() {
    let run = diaggate(&["entropy", "--n", "3", "--samples", "2000", "--q", "2"]);
    assert!(run.status.success(), "{}", stderr(&run));
    let d = stdout_dataset(&run);
    assert_eq!(d.rows[0][d.column("ue_analytic").unwrap()], Value::Null);
    assert!(float(&d.rows[0][d.column("mc").unwrap()]) > 0.0);
}

#[test]
fn seed_comes_from_the_environment() {
    let run = Command::new(env!("CARGO_BIN_EXE_diaggate"))
        .args(["entropy", "--n", "2", "--samples", "100"])
        .env("DIAGGATE_SEED", "4242")
        .output()
        .unwrap();
    assert!(run.status.success());
    assert_eq!(stdout_dataset(&run).manifest.seed, Some(4242));
}

#[test]
fn contradiag_of_a_projector() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "p.txt", "2\n1 0\n0 0\n");
    let run = diaggate(&["contradiag", "--input", &input]);
    assert!(run.status.success(), "{}", stderr(&run));
    let d = stdout_dataset(&run);
    assert!((float(d.summary_value("f").unwrap()) - 0.5).abs() < 1e-12);
    assert_eq!(d.summary_value("pass"), Some(&Value::Bool(true)));
    for r in d.rows.iter().filter(|r| r[0] == Value::Text("A".into())) {
        assert!((float(&r[3]) - 0.5).abs() < 1e-12 && float(&r[4]).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn contradiag_of_a_multiple_of_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matrix(dir.path(), "c.txt", "3\n2.5 0 0\n0 2.5 0\n0 0 2.5\n");
    let d = stdout_dataset(&diaggate(&["contradiag", "--input", &input]));
    assert!(float(d.summary_value("f").unwrap()).abs() < 1e-12);
}

#[test]
fn contradiag_random_hermitian_with_enphased_hadamard() {
    let dir = tempfile::tempdir().unwrap();
    let n = 8;
    let mut text = format!("{n}\n");
    for r in 0..n {
        let row: Vec<String> = (0..n)
            .map(|c| {
                let (lo, hi) = (r.min(c) as f64, r.max(c) as f64);
                let re = (1.3 * lo + 0.7 * hi).sin();
                let im = if r == c { 0.0 } else { (0.4 * lo - 1.1 * hi).cos() * if r < c { 1.0 } else { -1.0 } };
                format!("{re:.17e}{im:+.17e}j")
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let input = write_matrix(dir.path(), "h.txt", &text);
    for hadamard in ["fourier", "enphased"] {
        let run = diaggate(&["contradiag", "--input", &input, "--hadamard", hadamard, "--seed", "5"]);
        assert!(run.status.success(), "{hadamard}: {}", stderr(&run));
        let d = stdout_dataset(&run);
        assert_eq!(d.summary_value("pass"), Some(&Value::Bool(true)));
        assert!(float(d.summary_value("diagonal_spread").unwrap()) < 1e-8);
    }
}

#[test]
fn contradiag_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let skew = write_matrix(dir.path(), "s.txt", "2\n1 1+1j\n1+1j 0\n");
    let run = diaggate(&["contradiag", "--input", &skew]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("(0,1)"), "{}", stderr(&run));

    let garbled = write_matrix(dir.path(), "g.txt", "2\n1 0\n0 abc\n");
    let run = diaggate(&["contradiag", "--input", &garbled]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("row 1, col 1"), "{}", stderr(&run));

    let run = diaggate(&["contradiag", "--input", dir.path().join("none.txt").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for suite in ["combinatorics", "schmidt", "epower"] {
        let run = diaggate(&["verify", "--suite", suite, "--seed", "1"]);
        assert!(run.status.success(), "{suite}: {}", stderr(&run));
        let d = stdout_dataset(&run);
        assert!(!d.rows.is_empty());
        assert_eq!(d.summary_value("all_pass"), Some(&Value::Bool(true)));
        assert!(column(&d, "margin").into_iter().all(|m| float(m) >= 0.0));
    }
}
