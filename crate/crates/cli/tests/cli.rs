use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pivot-median"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn pivot-median")
}

fn write(dir: &Path, name: &str, lines: &[&str]) -> String {
    let path = dir.join(name);
    fs::write(&path, lines.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compute_full_mode_prints_median_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.txt", &["ab", "ab", "b"]);
    let out = run(&["compute", "--input", &input, "--cost", "unit"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let (median, json) = stdout.split_once('\n').unwrap();
    assert_eq!(median, "ab");
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(format!("{:.4}", v["mad"].as_f64().unwrap()), "0.3333");
    assert_eq!(v["median"], "ab");
    assert!(v["pivot_pct"].is_null());
}

#[test]
fn compute_alpha_zero_reports_duplicated_median() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", &["0123", "0124", "7123", "0023"]);
    let out_path = dir.path().join("out.txt");
    let out = run(&[
        "compute", "--input", &input, "--cost", "freeman", "--alpha", "0",
        "--output", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(out_path).unwrap();
    let json = text.split_once('\n').unwrap().1;
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert!(v["pivot_pct"].as_f64().unwrap() > 100.0);
    assert_eq!(v["pivot_count"], 5);
}

#[test]
fn compute_with_json_cost_model() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.txt", &["01", "01", "1"]);
    let model = dir.path().join("cost.json");
    fs::write(&model, r#"{"alphabet_size":2,"indel":1,"substitution":[[0,1],[1,0]]}"#).unwrap();
    let out = run(&["compute", "--input", &input, "--cost", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("01\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = run(&["compute", "--input", missing.to_str().unwrap(), "--cost", "unit"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = write(dir.path(), "bad.txt", &["08"]);
    let out = run(&["compute", "--input", &bad, "--cost", "freeman"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let blank = write(dir.path(), "blank.txt", &["01", ""]);
    assert_eq!(run(&["compute", "--input", &blank]).status.code(), Some(1));
    assert_eq!(run(&["compute", "--input", &blank, "--allow-empty"]).status.code(), Some(0));

    let good = write(dir.path(), "good.txt", &["01"]);
    assert_eq!(run(&["sweep", "--input", &good, "--alpha-step", "0"]).status.code(), Some(1));
    assert_eq!(run(&["compute", "--input", &good, "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(run(&["compute", "--input", &good, "--strategy", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["compute"]).status.code(), Some(1));

    let out_path = dir.path().join("g.txt");
    let out = run(&["gen", "--noise", "1.5", "--output", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "one.txt", &["0123"]);
    let out = run(&["sweep", "--input", &input, "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dataset,alpha,pivot_count,pivot_pct,distance_evals,mad,median_length,wall_ms");
    assert_eq!(lines.len(), 1 + 58);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(5) == Some("0.0000")));
    assert!(lines[58].starts_with("one,ref,,,"));

    let out = run(&["sweep", "--input", &input, "--alpha-start", "0.1", "--alpha-end", "0.1", "--quiet"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 2);
}

#[test]
fn gen_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.txt", "b.txt"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        let out = run(&[
            "gen", "--clusters", "3", "--size", "120", "--len", "50", "--alphabet", "8",
            "--noise", "0.1", "--seed", "7", "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(a.lines().count(), 360);
    assert_eq!(a, fs::read_to_string(&paths[1]).unwrap());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.txt.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rng_seed"], 7);
    assert_eq!(meta["mutation_rate"], 0.1);
}

#[test]
fn help_documents_flags() {
    let expected: &[(&str, &[&str])] = &[
        ("compute", &["--input", "--cost", "--alpha", "--output", "--dedupe-median", "--unweighted-pivots", "--count-mad", "--allow-empty", "--threads"]),
        ("sweep", &["--input", "--cost", "--alpha-start", "--alpha-end", "--alpha-step", "--output", "--dedupe-median", "--unweighted-pivots", "--count-mad", "--allow-empty", "--threads"]),
        ("gen", &["--clusters", "--size", "--len", "--alphabet", "--noise", "--seed", "--output"]),
    ];
    for (sub, flags) in expected {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in *flags {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
}

#[test]
fn count_mad_adds_one_evaluation_per_string() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", &["0123", "0124", "7123"]);
    let evals = |extra: &[&str]| {
        let mut args = vec!["compute", "--input", input.as_str(), "--alpha", "0.3"];
        args.extend_from_slice(extra);
        let out = run(&args);
        let stdout = String::from_utf8(out.stdout).unwrap();
        let v: serde_json::Value = serde_json::from_str(stdout.split_once('\n').unwrap().1).unwrap();
        v["distance_evals"].as_u64().unwrap()
    };
    assert_eq!(evals(&["--count-mad"]), evals(&[]) + 3);
}
