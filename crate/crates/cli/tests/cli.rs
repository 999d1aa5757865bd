use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn walkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkernel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn graph_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    names.sort();
    names
}

/// Splits a Gram file into its JSON header and matrix rows.
fn read_gram(path: &Path) -> (Value, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (head, body) = text.split_once("\n---\n").expect("header separator");
    let header: Value = serde_json::from_str(head).unwrap();
    let rows = body
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn generate_set1_and_regenerate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = walkernel(&["generate", "--set", "set1", "--k", "1,2,3,4", "--count", "10", "--seed", "5", "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let files = graph_files(&a);
    assert_eq!(files.len(), 40);

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["graphs"].as_array().unwrap().len(), 40);
    assert!(manifest["graphs"][0]["seed"].is_u64());

    let b = dir.path().join("b");
    let o = walkernel(&["generate", "--manifest", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    for f in &files {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn generate_set2_fill_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = walkernel(&["generate", "--set", "set2", "--n", "32", "--count", "10", "--format", "edgelist", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let files = graph_files(dir.path());
    assert_eq!(files.len(), 100);
    let first = std::fs::read_to_string(dir.path().join(&files[0])).unwrap();
    assert!(first.starts_with("#n=32"));
}

#[test]
fn gram_of_set1_graphs_is_psd_and_method_independent() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    assert!(walkernel(&["generate", "--k", "3", "--count", "10", "--out", data.to_str().unwrap()]).status.success());
    let manifest = data.join("manifest.json");

    let mut grams = Vec::new();
    for method in ["fixed_point", "direct", "sylvester", "cg", "spectral"] {
        let out = dir.path().join(format!("{method}.gram"));
        let o = walkernel(&[
            "gram",
            "--manifest",
            manifest.to_str().unwrap(),
            "--method",
            method,
            "--require-psd",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{method}: {o:?}");
        assert!(stdout(&o).contains("10x10 Gram matrix: PSD"));
        let (header, rows) = read_gram(&out);
        assert_eq!(header["method"], method);
        assert_eq!(header["size"], 10);
        assert_eq!(header["lambda"], 0.001);
        assert_eq!(header["psd"]["is_psd"], true);
        assert_eq!(header["ids"][0], "set1_n8_00");
        grams.push(rows);
    }
    for g in &grams[1..] {
        for (r0, r) in grams[0].iter().zip(g) {
            for (a, b) in r0.iter().zip(r) {
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-300), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn single_graph_gives_one_by_one_gram() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("tri.txt");
    std::fs::write(&g, "#n=3\n0 1\n1 2\n0 2\n").unwrap();
    let out = dir.path().join("tri.gram");
    let o = walkernel(&["gram", g.to_str().unwrap(), "--kernel", "geometric", "--lambda", "0.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let (header, rows) = read_gram(&out);
    assert_eq!(header["kernel"], "geometric");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].len(), 1);
    // K3 normalized adjacency has eigenvalues 1, -1/2, -1/2 and the all-ones product vector
    // lies in the eigenvalue-1 eigenspace of A ⊗ A
    assert!((rows[0][0] - 9.0 * 0.5f64.exp()).abs() < 1e-10);
}

#[test]
fn bench_writes_complete_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = walkernel(&[
        "bench",
        "--k",
        "2,3",
        "--count",
        "3",
        "--reps",
        "2",
        "--method",
        "direct,cg,fixed_point,fixed_point_explicit",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,n,fill,rep,seconds,checksum"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 2 * 2);
    for method in ["direct", "cg", "fixed_point", "fixed_point_explicit"] {
        for n in ["4", "8"] {
            let cell: Vec<_> = rows.iter().filter(|r| r[0] == method && r[1] == n).collect();
            assert_eq!(cell.len(), 2, "{method} {n}");
            assert!(cell.iter().all(|r| r[4].parse::<f64>().unwrap() >= 0.0));
        }
    }
    let summary = std::fs::read_to_string(dir.path().join("t.summary.txt")).unwrap();
    assert!(summary.contains("log-log slope"));
    assert!(summary.contains("explicit product vs vec-trick"));
}

#[test]
fn bench_marks_slow_cells_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = walkernel(&[
        "bench", "--k", "5,6", "--count", "2", "--reps", "1", "--method", "direct", "--timeout-secs", "0.000001", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows, vec!["direct,32,,excluded,,", "direct,64,,excluded,,"]);
}

#[test]
fn verify_named_suites() {
    let o = walkernel(&["verify", "lemma2", "diffusion-deficiency", "assignment-npsd", "--seed", "3"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("PASS lemma2"));
    assert!(text.contains("PASS diffusion-deficiency"));
    assert!(text.contains("PASS assignment-npsd"));
    assert!(text.contains("instance 0:"));
    assert!(text.contains("seed 3"));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = walkernel(&["verify", "semiring-axioms", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc[0]["suite"], "semiring-axioms");
    assert_eq!(doc[0]["passed"], true);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(walkernel(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(walkernel(&["gram"]).status.code(), Some(2));
    assert_eq!(walkernel(&["gram", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(walkernel(&["bench", "--method", "lu"]).status.code(), Some(2));
    assert_eq!(walkernel(&["bench", "--reps", "0", "--k", "2"]).status.code(), Some(2));
    assert_eq!(walkernel(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(walkernel(&["gram", "x.json", "--lambda", "-1"]).status.code(), Some(2));
}

#[test]
fn kernel_failures_name_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k4.txt");
    std::fs::write(&g, "#n=4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    let o = walkernel(&["gram", g.to_str().unwrap(), "--lambda", "2", "--method", "direct"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("(k4, k4)"), "{err}");
    assert!(err.contains("lambda"), "{err}");
}

#[test]
fn thread_cap_from_environment() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_walkernel"))
            .args(["verify", "walk-count"])
            .env("WALKERNEL_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}
