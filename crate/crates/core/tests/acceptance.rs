//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! with status 1 if any criterion fails.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::{closed_formula, command, expr, oracle, spec, OracleValue};
use finicheck_core::check::{run_operation, CheckConfig, InputOutcome, RunReport};
use finicheck_core::eval::{eval_expr, Env, EvalMode, Value};
use finicheck_core::sema::{resolve, ConstBinding, TypedSpec};
use finicheck_core::syntax::{
    parse_command, parse_expr, parse_spec, print_command, print_expr, print_expr_bare, print_spec, without_spans, Spec,
};
use finicheck_core::vcg::{check_vcs, generate_vcs, VcCategory, VcRecord, VcStatus, VerificationCondition};
use finicheck_core::viz::{
    build_eval_tree, build_trace, emit_json, read_json, reconstruct, record_expr, record_formula_run, record_run,
    EvalTree, TraceGraph, DEFAULT_LAYER_CAP,
};
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const GCD: &str = include_str!("../../../corpus/gcd.spec");
const BUBBLE: &str = include_str!("../../../corpus/bubblesort.spec");
const FORALL_EXISTS: &str = include_str!("../../../corpus/forall_exists.spec");
const PROCEDURES: &str = include_str!("../../../corpus/procedures.spec");
const SORTING: &str = include_str!("../../../corpus/sorting.spec");
const CORPUS: [&str; 5] = [GCD, BUBBLE, FORALL_EXISTS, PROCEDURES, SORTING];

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Bindings<'a> = &'a [(&'a str, i64)];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bindings(consts: &[(&str, i64)]) -> Vec<ConstBinding> {
    consts.iter().map(|(n, v)| ConstBinding::new(*n, *v)).collect()
}

fn typed(src: &str, consts: &[(&str, i64)]) -> Result<TypedSpec, String> {
    let s = parse_spec(src).map_err(|e| e.to_string())?;
    resolve(&s, &bindings(consts)).map_err(|e| e.to_string())
}

fn run(ts: &TypedSpec, op: &str, silent: bool) -> Result<RunReport, String> {
    let mut cfg = CheckConfig::new(op);
    cfg.silent = silent;
    run_operation(ts, &cfg).map_err(|e| e.to_string())
}

fn check_all(src: &str, name: &str, consts: &[(&str, i64)]) -> Result<(Vec<VerificationCondition>, Vec<RunReport>), String> {
    let s = parse_spec(src).map_err(|e| e.to_string())?;
    let mut vcs = generate_vcs(&s, name).map_err(|e| e.to_string())?;
    let reports = check_vcs(&mut vcs, &s, &bindings(consts), &CheckConfig::new("")).map_err(|e| e.to_string())?;
    Ok((vcs, reports))
}

fn gcd_counts() -> Outcome {
    let start = Instant::now();
    let ts = typed(GCD, &[("N", 20)])?;
    let g2 = run(&ts, "gcd2", true)?;
    ensure(
        (g2.total_inputs, g2.checked, g2.inadmissible, g2.failures.len()) == (441, 441, 0, 0),
        || format!("gcd2: total {} checked {} inadmissible {}", g2.total_inputs, g2.checked, g2.inadmissible),
    )?;
    let gp = run(&ts, "gcdp", false)?;
    ensure(
        (gp.checked, gp.inadmissible, gp.failures.len()) == (440, 1, 0),
        || format!("gcdp: checked {} inadmissible {}", gp.checked, gp.inadmissible),
    )?;
    let inadmissible: Vec<_> = gp
        .lines
        .iter()
        .filter(|l| l.outcome == InputOutcome::Inadmissible)
        .map(|l| l.input.clone())
        .collect();
    let zero = vec![("m".to_string(), Value::Int(0)), ("n".to_string(), Value::Int(0))];
    ensure(inadmissible == vec![zero], || format!("inadmissible inputs {inadmissible:?}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("gcd2 441/441/0, gcdp 440 checked, (0,0) inadmissible, {} ms", took.as_millis()))
}

const LISTING: &str = "let a = m in (let b = n in
    (letpar old_a = a, old_b = b in
    (∀a:nat, b:nat. (((((a ≠ 0) ∨ (b ≠ 0)) ∧
                     (gcd(a, b) = gcd(old_a, old_b))) ∧
                     (¬((a > 0) ∧ (b > 0)))) ⇒
      (let result = if a = 0 then b else a in
        (result = gcd(m, n)))))))";

fn gcdp_conditions() -> Outcome {
    let s = parse_spec(GCD).map_err(|e| e.to_string())?;
    let vcs = generate_vcs(&s, "gcdp").map_err(|e| e.to_string())?;
    for cat in VcCategory::ALL {
        ensure(vcs.iter().any(|v| v.category == cat), || format!("no {cat:?} condition"))?;
    }
    let loops = vcs.iter().filter(|v| v.category.is_loop()).count();
    ensure(loops >= 5, || format!("{loops} loop conditions"))?;
    let corr = vcs
        .iter()
        .find(|v| v.category == VcCategory::ResultCorrect)
        .ok_or("no correctness condition")?;
    let expected = without_spans(&parse_expr(LISTING).map_err(|e| e.to_string())?);
    ensure(without_spans(corr.formula()) == expected, || {
        format!("correctness condition differs: {}", print_expr_bare(corr.formula()))
    })?;
    Ok(format!("{} conditions, {loops} loop-related, all six categories", vcs.len()))
}

fn gcdp_validity() -> Outcome {
    let mut total = 0;
    for n in [5, 10, 20] {
        let (vcs, reports) = check_all(GCD, "gcdp", &[("N", n)])?;
        for (vc, r) in vcs.iter().zip(&reports) {
            ensure(vc.status == VcStatus::Valid, || {
                format!("{} invalid at N={n}: {:?}", vc.id, r.failures.first())
            })?;
        }
        total += vcs.len();
    }
    let dropped = GCD.replace("invariant gcd(a,b) = gcd(old_a,old_b);", "");
    let (vcs, reports) = check_all(&dropped, "gcdp", &[("N", 5)])?;
    let broken = vcs
        .iter()
        .zip(&reports)
        .find(|(v, r)| v.status == VcStatus::Invalid && !r.failures.is_empty())
        .ok_or("dropping the invariant leaves every condition valid")?;
    let weaker = GCD.replace("decreases a+b;", "decreases a;");
    let (vcs, reports) = check_all(&weaker, "gcdp", &[("N", 5)])?;
    let dec = vcs
        .iter()
        .zip(&reports)
        .find(|(v, r)| v.status == VcStatus::Invalid && !r.failures.is_empty())
        .ok_or("weakening the measure leaves every condition valid")?;
    Ok(format!(
        "{total} checks valid at N=5,10,20; mutants break {} and {}",
        broken.0.id, dec.0.id
    ))
}

fn bubble_second_input() -> Outcome {
    let ts = typed(BUBBLE, &[("N", 4), ("M", 3)])?;
    let op = ts.op("bubbleSort").ok_or("no bubbleSort")?;
    let want = Value::array([-2, -3, -3, -3].map(Value::Int).to_vec());
    let second = op.nth_input(1);
    ensure(second == vec![want.clone()], || format!("second input {second:?}"))?;
    let mut cfg = CheckConfig::new("bubbleSort");
    cfg.silent = false;
    cfg.fail_fast = true;
    let r = run_operation(&ts, &cfg).map_err(|e| e.to_string())?;
    let line = r.lines.get(1).ok_or("fewer than two inputs")?;
    ensure(line.input == vec![("a".to_string(), want)], || format!("second line {:?}", line.input))?;
    Ok("second input is [-2,-3,-3,-3]".into())
}

fn forall_exists_tree() -> Outcome {
    let ts = typed(FORALL_EXISTS, &[])?;
    let run = record_formula_run(&ts, "forallPexistsQFormula", DEFAULT_LAYER_CAP).map_err(|e| e.to_string())?;
    let t = build_eval_tree(&run, true, DEFAULT_LAYER_CAP);
    let all = t
        .root
        .find(&|n| n.label == "∀")
        .ok_or("no ∀ node")?;
    ensure(all.children.len() == 5, || format!("∀ has {} children", all.children.len()))?;
    for (x, imp) in all.children.iter().enumerate() {
        ensure(imp.label == "⇒" && imp.value == Some(true), || format!("x={x}: {} {:?}", imp.label, imp.value))?;
        if x < 4 {
            let ex = imp.children.get(1).ok_or_else(|| format!("x={x}: no ∃"))?;
            ensure(ex.label == "∃" && ex.children.len() == 1, || {
                format!("x={x}: ∃ has {} children", ex.children.len())
            })?;
            let y = ex.children[0].args.get(1).map(|a| a.1.clone());
            ensure(y == Some(Value::Int(x as i64 + 1)), || format!("x={x}: witness {y:?}"))?;
        } else {
            ensure(imp.children.len() == 1 && imp.children[0].value == Some(false), || {
                format!("x=4: ⇒ keeps {} children", imp.children.len())
            })?;
        }
    }
    Ok("∀ has 5 children; one witness each for x=0..3; x=4 keeps the antecedent".into())
}

fn oracle_suite() -> Outcome {
    let empty = resolve(&Spec::default(), &[]).map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&closed_formula(), |f| {
            let want = match oracle(&f, &mut HashMap::new()) {
                Ok(OracleValue::Bool(b)) => Some(b),
                Ok(OracleValue::Int(_)) => return Err(TestCaseError::fail("integer formula")),
                Err(_) => None,
            };
            let det: Vec<_> = eval_expr(&empty, &f, &Env::new(), EvalMode::Det)
                .map_err(|e| TestCaseError::fail(e.to_string()))?
                .collect();
            let got = det.first().and_then(|r| r.as_ref().ok()).cloned();
            if det.len() != 1 || got != want.map(Value::Bool) {
                return Err(TestCaseError::fail(format!("evaluator {det:?}, oracle {want:?}")));
            }
            let first = eval_expr(&empty, &f, &Env::new(), EvalMode::Nondet)
                .map_err(|e| TestCaseError::fail(e.to_string()))?
                .next()
                .and_then(|r| r.ok());
            if first != got {
                return Err(TestCaseError::fail(format!("nondet first {first:?}, det {got:?}")));
            }
            let run = record_expr(&empty, &f).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for prune in [true, false] {
                let r = reconstruct(&build_eval_tree(&run, prune, usize::MAX).root);
                if r != want {
                    return Err(TestCaseError::fail(format!("tree (prune {prune}) gives {r:?}")));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("10000 formulas agree with the oracle".into())
}

fn wp_soundness() -> Outcome {
    let cases: [(&str, &[&str], &[Bindings]); 3] = [
        (GCD, &["gcdp"], &[&[("N", 4)], &[("N", 8)]]),
        (
            PROCEDURES,
            &["sumTo", "mul", "quotient", "absDiff", "search", "maxElem", "reverse", "isSorted"],
            &[&[("N", 3), ("M", 1)], &[("N", 4), ("M", 2)]],
        ),
        (SORTING, &["cswap", "bubbleSort"], &[&[("N", 2), ("M", 2)], &[("N", 3), ("M", 1)]]),
    ];
    let mut procedures = 0;
    let mut sound = 0;
    for (src, procs, runs) in cases {
        procedures += procs.len();
        for p in procs {
            let mut all_valid = true;
            for consts in runs {
                let (vcs, _) = check_all(src, p, consts)?;
                if vcs.iter().all(|v| v.status == VcStatus::Valid) {
                    let r = run(&typed(src, consts)?, p, true)?;
                    ensure(r.failures.is_empty(), || {
                        format!("{p} at {consts:?}: conditions valid but direct check fails on {:?}", r.failures[0].input)
                    })?;
                } else {
                    all_valid = false;
                }
            }
            sound += usize::from(all_valid);
        }
    }
    ensure(sound >= 10, || format!("only {sound} of {procedures} procedures have all conditions valid"))?;
    Ok(format!("{sound} of {procedures} procedures have valid conditions at two bindings and pass the direct check"))
}

fn round_trips() -> Outcome {
    for src in CORPUS {
        let s = without_spans(&parse_spec(src).map_err(|e| e.to_string())?);
        let text = print_spec(&s);
        let back = without_spans(&parse_spec(&text).map_err(|e| e.to_string())?);
        ensure(back == s, || format!("corpus file does not round-trip:\n{text}"))?;
        ensure(print_spec(&back) == text, || "printing is not stable".into())?;
    }
    let config = |cases| Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new(config(10_000))
        .run(&expr(), |e| {
            let e = without_spans(&e);
            let back = parse_expr(&print_expr(&e)).map_err(|err| TestCaseError::fail(err.to_string()))?;
            if without_spans(&back) != e {
                return Err(TestCaseError::fail(print_expr(&e)));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    TestRunner::new(config(2_000))
        .run(&command(), |c| {
            let c = without_spans(&c);
            let back = parse_command(&print_command(&c)).map_err(|err| TestCaseError::fail(err.to_string()))?;
            if without_spans(&back) != c {
                return Err(TestCaseError::fail(print_command(&c)));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    TestRunner::new(config(2_000))
        .run(&spec(), |s| {
            let s = without_spans(&s);
            let back = parse_spec(&print_spec(&s)).map_err(|err| TestCaseError::fail(err.to_string()))?;
            if without_spans(&back) != s {
                return Err(TestCaseError::fail(print_spec(&s)));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let ts = typed(FORALL_EXISTS, &[])?;
    let run_ = record_formula_run(&ts, "forallPexistsQFormula", DEFAULT_LAYER_CAP).map_err(|e| e.to_string())?;
    let tree = build_eval_tree(&run_, true, DEFAULT_LAYER_CAP);
    let back: EvalTree = read_json(&emit_json(&tree)).map_err(|e| e.to_string())?;
    ensure(back == tree, || "evaluation tree JSON differs".into())?;

    let ts = typed(GCD, &[("N", 10)])?;
    let trace = build_trace(&record_run(&ts, "gcdp", &[Value::Int(6), Value::Int(4)]).map_err(|e| e.to_string())?);
    let back: TraceGraph = read_json(&emit_json(&trace)).map_err(|e| e.to_string())?;
    ensure(back == trace, || "trace JSON differs".into())?;

    let report = run(&ts, "gcdp", false)?;
    let back: RunReport = serde_json::from_str(&report.to_json()).map_err(|e| e.to_string())?;
    ensure(back == report, || "report JSON differs".into())?;

    let (vcs, _) = check_all(GCD, "gcdp", &[("N", 3)])?;
    let records: Vec<VcRecord> = vcs.iter().map(VcRecord::from).collect();
    let json = serde_json::to_string(&records).map_err(|e| e.to_string())?;
    let back: Vec<VcRecord> = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    ensure(back == records, || "condition JSON differs".into())?;
    Ok("corpus, 14000 generated trees and JSON exports round-trip".into())
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("gcd counts at N=20", gcd_counts),
        ("gcdp conditions", gcdp_conditions),
        ("gcdp condition validity and mutants", gcdp_validity),
        ("bubble sort input order", bubble_second_input),
        ("pruned ∀∃ tree", forall_exists_tree),
        ("evaluator oracle", oracle_suite),
        ("wp soundness", wp_soundness),
        ("round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} ({secs:.1} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
