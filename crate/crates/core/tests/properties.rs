mod common;

use std::collections::HashMap;

use common::{closed_formula, command, expr, oracle, spec, OracleValue};
use finicheck_core::eval::{eval_expr, EvalMode, Env, Value};
use finicheck_core::sema::{resolve, TypedSpec};
use finicheck_core::syntax::{
    parse_command, parse_expr, parse_spec, print_command, print_expr, print_expr_bare, print_spec, without_spans, Spec,
};
use finicheck_core::viz::{build_eval_tree, reconstruct, record_expr};
use proptest::prelude::*;

fn empty() -> TypedSpec {
    resolve(&Spec::default(), &[]).unwrap()
}

fn expected(e: &finicheck_core::syntax::Expr) -> Option<bool> {
    match oracle(e, &mut HashMap::new()) {
        Ok(OracleValue::Bool(b)) => Some(b),
        Ok(OracleValue::Int(_)) => unreachable!("formulas are Boolean"),
        Err(_) => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn expressions_round_trip(e in expr()) {
        let e = without_spans(&e);
        prop_assert_eq!(without_spans(&parse_expr(&print_expr_bare(&e)).unwrap()), e.clone());
        prop_assert_eq!(without_spans(&parse_expr(&print_expr(&e)).unwrap()), e);
    }

    #[test]
    fn evaluator_matches_oracle(f in closed_formula()) {
        let ts = empty();
        let want = expected(&f);
        let det: Vec<_> = eval_expr(&ts, &f, &Env::new(), EvalMode::Det).unwrap().collect();
        prop_assert_eq!(det.len(), 1);
        match (&det[0], want) {
            (Ok(v), Some(b)) => prop_assert_eq!(v, &Value::Bool(b)),
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "evaluator {:?}, oracle {:?}", got, want),
        }
        let first = eval_expr(&ts, &f, &Env::new(), EvalMode::Nondet).unwrap().next().unwrap();
        prop_assert_eq!(first.ok(), det[0].clone().ok());

        let run = record_expr(&ts, &f).unwrap();
        for prune in [true, false] {
            let tree = build_eval_tree(&run, prune, usize::MAX);
            prop_assert_eq!(reconstruct(&tree.root), want);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn commands_round_trip(c in command()) {
        let c = without_spans(&c);
        let text = print_command(&c);
        let back = parse_command(&text).map_err(|e| TestCaseError::fail(format!("{e} in\n{text}")))?;
        prop_assert!(without_spans(&back) == c, "{}\nreprinted as\n{}", text, print_command(&back));
    }

    #[test]
    fn specs_round_trip(s in spec()) {
        let s = without_spans(&s);
        let text = print_spec(&s);
        let back = parse_spec(&text).map_err(|e| TestCaseError::fail(format!("{e} in\n{text}")))?;
        prop_assert!(without_spans(&back) == s, "{}\nreprinted as\n{}", text, print_spec(&back));
    }
}
