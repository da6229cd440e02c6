use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn finicheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finicheck")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_spec(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("t.spec");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn gcd2_passes() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=20", "--op", "gcd2", "--silent"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("Executing gcd2(ℤ,ℤ) with all 441 inputs.\n"), "{out}");
    assert!(out.contains("441 checked, 0 inadmissible"));
}

#[test]
fn gcdp_has_one_inadmissible_input() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=20", "--op", "gcdp"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("440 checked, 1 inadmissible"));
    assert!(out.contains("gcdp(0,0): inadmissible\n"));
    assert!(out.contains("gcdp(20,20) = 20\n"));
}

#[test]
fn verification_conditions_are_valid() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=5", "--op", "gcdp", "--vcg", "--check-vc", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("_gcdp_0_CorrOp0 (gcdp) Is the result correct?"));
    assert!(out.contains("10 of 10 verification conditions valid."));
}

#[test]
fn listing_conditions_needs_no_constants() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--vcg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("_gcdp_0_CorrOp0 (gcdp) Is the result correct?\n  theorem _gcdp_0_CorrOp0(m:nat, n:nat)\n"), "{out}");
    assert_eq!(out.matches("(gcdp) ").count(), 10);

    let o = finicheck(&[gcd.to_str().unwrap(), "--check-vc", "all"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gcd.spec:2:5: constant `N` has no value"), "{}", stderr(&o));
}

#[test]
fn weakened_measure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("gcd.spec")).unwrap().replace("decreases a+b;", "decreases a;");
    let spec = write_spec(&dir, &text);
    let json = dir.path().join("vcs.json");
    let o = finicheck(&[&spec, "--const", "N=5", "--check-vc", "all", "--vcg-json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("_MeasDec0: INVALID"), "{out}");
    assert!(out.contains("0 checked, 1 inadmissible, 35 failed)"), "{out}");
    assert!(out.contains("counterexample: ERROR in execution of _gcdp_"));
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let dec = records.as_array().unwrap().iter().find(|r| r["category"] == "MeasureDecreased").unwrap();
    assert_eq!(dec["status"], "invalid");
}

#[test]
fn single_condition_by_id() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=4", "--check-vc", "_gcdp_1_InvInit0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 of 1 verification conditions valid."));
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=4", "--check-vc", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_theorem_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "val N:ℕ; type nat = ℕ[N];\ntheorem bad(m:nat) ⇔ m < N;\n");
    let o = finicheck(&[&spec, "--const", "N=3", "--silent"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("ERROR in execution of bad(3): formula is false at 2:1\n  where m=3\n"), "{out}");
    assert!(out.contains("FAILURE: 1 of 4 inputs failed"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let o = finicheck(&["/nonexistent/missing.spec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: /nonexistent/missing.spec"));

    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "val N:ℕ;\npred p(x:ℕ[N]) ⇔ x <;\n");
    let o = finicheck(&[&spec, "--const", "N=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t.spec:2:"), "{}", stderr(&o));

    let gcd = corpus("gcd.spec");
    let g = gcd.to_str().unwrap();
    let o = finicheck(&[g]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gcd.spec:2:5: constant `N` has no value"));

    assert_eq!(finicheck(&[g, "--const", "N=3", "--const", "K=1"]).status.code(), Some(2));
    assert_eq!(finicheck(&[g, "--const", "N=3", "--op", "nope"]).status.code(), Some(2));
    assert_eq!(finicheck(&[g, "--const", "N=3", "--trace", "x.dot"]).status.code(), Some(2));
    assert_eq!(finicheck(&[g, "--const", "N3"]).status.code(), Some(2));
    assert_eq!(finicheck(&[g, "--const", "N=3", "--op", "gcdp", "--tree", "x.dot"]).status.code(), Some(2));
}

#[test]
fn trace_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let sort = corpus("bubblesort.spec");
    let o = finicheck(&[
        sort.to_str().unwrap(),
        "--const", "N=4", "--const", "M=3",
        "--op", "bubbleSort", "--silent",
        "--trace", out.to_str().unwrap(), "--input", "1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g["title"], "bubbleSort([-2,-3,-3,-3])");
    let calls = g["nodes"].as_array().unwrap().iter().filter(|n| n["kind"] == "call").count();
    assert_eq!(calls, 6);
}

#[test]
fn trace_defaults_to_first_admissible_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.dot");
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=3", "--op", "gcdp", "--silent", "--trace", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&out).unwrap();
    assert!(dot.starts_with("digraph trace {"));
    assert!(dot.contains("label=\"gcdp(1,0)\""), "{dot}");
}

#[test]
fn tree_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tree.dot");
    let forall_exists = corpus("forall_exists.spec");
    let o = finicheck(&[forall_exists.to_str().unwrap(), "--op", "forallPexistsQFormula", "--tree", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&out).unwrap();
    assert_eq!(dot.matches(" [label=").count(), 30);

    let o = finicheck(&[
        forall_exists.to_str().unwrap(),
        "--op", "forallPexistsQFormula",
        "--tree", out.to_str().unwrap(), "--no-prune", "--max-layer-nodes", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().contains(" more\""));
}

#[test]
fn report_json_and_idempotence() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let gcd = corpus("gcd.spec");
    let args = [gcd.to_str().unwrap(), "--const", "N=6", "--report-json", json.to_str().unwrap()];
    let first = finicheck(&args);
    let second = finicheck(&args);
    assert_eq!(first.status.code(), Some(0));
    let strip = |s: String| -> String {
        s.lines()
            .map(|l| match (l.find('('), l.find(" ms,")) {
                (Some(a), Some(b)) if a < b && l.starts_with("Execution") => format!("{}{}", &l[..a], &l[b..]),
                _ => l.to_string(),
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(stdout(&first)), strip(stdout(&second)));
    let reports: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let names: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["operation"].as_str().unwrap()).collect();
    assert_eq!(names, vec!["divides", "gcd", "gcd0", "gcd1", "gcd2", "gcdp"]);
}

#[test]
fn ascii_output() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=3", "--op", "gcdp", "--vcg", "--ascii"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.is_ascii(), "{out}");
    assert!(out.contains("forall a:nat, b:nat."));
}

#[test]
fn nondet_mode_runs() {
    let gcd = corpus("gcd.spec");
    let o = finicheck(&[gcd.to_str().unwrap(), "--const", "N=4", "--op", "gcd", "--nondet", "--silent", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("24 checked, 1 inadmissible"));
}
