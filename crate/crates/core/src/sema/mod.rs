//! Constant binding, type denotation, type checking and compilation.

pub mod ir;
mod resolve;
pub mod types;

pub use ir::{OpId, OpKind, Operation, Slot, SlotInfo, SlotKind};
pub use resolve::{resolve, ConstBinding, FreeVar, TypedSpec};
pub use types::{carrier_size, enumerate, Carrier, CarrierOverflow, Ty, TypeDen};

use crate::syntax::Span;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SemaError {
    #[error("constant `{name}` has no value")]
    UnboundConstant { span: Span, name: String },
    #[error("no constant named `{name}` is declared")]
    UnknownConstant { name: String },
    #[error("constant `{name}` is given more than one value")]
    ConstantAlreadyDefined { name: String },
    #[error("{message}")]
    Type { span: Span, message: String },
    #[error("empty interval [{lo},{hi}]")]
    EmptyInterval { span: Span, lo: i64, hi: i64 },
    #[error("carrier of {what} is too large to enumerate")]
    Overflow { span: Span, what: String },
    #[error("`{name}` is already declared")]
    Duplicate { span: Span, name: String },
    #[error("`{name}` is not declared")]
    Undeclared { span: Span, name: String },
}

impl SemaError {
    pub fn span(&self) -> Option<Span> {
        match self {
            SemaError::UnknownConstant { .. } | SemaError::ConstantAlreadyDefined { .. } => None,
            SemaError::UnboundConstant { span, .. }
            | SemaError::Type { span, .. }
            | SemaError::EmptyInterval { span, .. }
            | SemaError::Overflow { span, .. }
            | SemaError::Duplicate { span, .. }
            | SemaError::Undeclared { span, .. } => Some(*span),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_spec;

    fn resolve_src(src: &str, consts: &[(&str, i64)]) -> Result<TypedSpec, SemaError> {
        let spec = parse_spec(src).expect("parses");
        let b: Vec<_> = consts.iter().map(|(n, v)| ConstBinding::new(*n, *v)).collect();
        resolve(&spec, &b)
    }

    #[test]
    fn nat_sugar() {
        let ts = resolve_src("val N: ℕ; type nat = ℕ[N];", &[("N", 20)]).unwrap();
        assert_eq!(ts.type_den("nat"), Some(&TypeDen::Int { lo: 0, hi: 20 }));
    }

    #[test]
    fn array_types() {
        let ts = resolve_src(
            "val N: ℕ; val M: ℕ; type elem = ℤ[-M,M]; type array = Array[N,elem];",
            &[("N", 4), ("M", 3)],
        )
        .unwrap();
        let elem = TypeDen::Int { lo: -3, hi: 3 };
        assert_eq!(ts.type_den("elem"), Some(&elem));
        assert_eq!(
            ts.type_den("array"),
            Some(&TypeDen::Array {
                len: 4,
                elem: Box::new(elem)
            })
        );
    }

    #[test]
    fn unbound_constant() {
        let err = resolve_src("val K: ℕ; type t = ℕ[K];", &[]).unwrap_err();
        assert!(matches!(err, SemaError::UnboundConstant { ref name, .. } if name == "K"));
    }

    #[test]
    fn binding_errors() {
        assert!(matches!(
            resolve_src("val N = 3;", &[("N", 4)]),
            Err(SemaError::ConstantAlreadyDefined { .. })
        ));
        assert!(matches!(
            resolve_src("val N = 3;", &[("Q", 4)]),
            Err(SemaError::UnknownConstant { .. })
        ));
        assert!(matches!(
            resolve_src("val N: ℕ;", &[("N", -1)]),
            Err(SemaError::Type { .. })
        ));
    }

    #[test]
    fn empty_interval() {
        let err = resolve_src("type t = ℤ[3,1];", &[]).unwrap_err();
        assert!(matches!(err, SemaError::EmptyInterval { lo: 3, hi: 1, .. }));
    }

    #[test]
    fn unbounded_type_outside_val() {
        let err = resolve_src("pred p(x: ℕ) ⇔ x = x;", &[]).unwrap_err();
        assert!(matches!(err, SemaError::Type { .. }));
    }

    #[test]
    fn type_errors() {
        let bad = [
            "pred p(x: ℤ[0,3]) ⇔ x + true = 1;",
            "pred p(x: ℤ[0,3]) ⇔ x;",
            "fun f(x: ℤ[0,3]): Bool = x;",
            "pred p(x: ℤ[0,3]) ⇔ q(x);",
            "pred q(x: ℤ[0,3]) ⇔ true; pred p(x: ℤ[0,3]) ⇔ q(x, x);",
            "pred p(x: ℤ[0,3]) ⇔ x.1 = 1;",
        ];
        for src in bad {
            assert!(resolve_src(src, &[]).is_err(), "{src}");
        }
    }

    #[test]
    fn duplicate_names() {
        assert!(matches!(
            resolve_src("val N = 1; type N = Bool;", &[]),
            Err(SemaError::Duplicate { .. })
        ));
        assert!(matches!(
            resolve_src("pred p(x: Bool, x: Bool) ⇔ x;", &[]),
            Err(SemaError::Duplicate { .. })
        ));
        let shadow = "proc p(x: ℤ[0,3]): ℤ[0,3] { var y: ℤ[0,3] ≔ 0; if x = 0 then { var y: ℤ[0,3] ≔ 1; } return y; }";
        assert!(matches!(resolve_src(shadow, &[]), Err(SemaError::Duplicate { .. })));
    }

    #[test]
    fn parameters_are_read_only() {
        let src = "proc p(x: ℤ[0,3]): ℤ[0,3] { x ≔ 1; return x; }";
        assert!(matches!(resolve_src(src, &[]), Err(SemaError::Type { .. })));
    }

    #[test]
    fn procedure_calls_only_at_top_level() {
        let ok = "proc q(x: ℤ[0,3]): ℤ[0,3] { return x; } \
                  proc p(x: ℤ[0,3]): ℤ[0,3] { var y: ℤ[0,3] ≔ q(x); y ≔ q(y); q(y); return q(y); }";
        assert!(resolve_src(ok, &[]).is_ok());
        let nested = "proc q(x: ℤ[0,3]): ℤ[0,3] { return x; } \
                      proc p(x: ℤ[0,3]): ℤ[0,3] { var y: ℤ[0,3] ≔ q(x) + 1; return y; }";
        assert!(resolve_src(nested, &[]).is_err());
        let in_spec = "proc q(x: ℤ[0,3]): ℤ[0,3] { return x; } pred p(x: ℤ[0,3]) ⇔ q(x) = x;";
        assert!(resolve_src(in_spec, &[]).is_err());
    }

    #[test]
    fn names_declared_before_use() {
        assert!(resolve_src("pred p() ⇔ q(); pred q() ⇔ true;", &[]).is_err());
    }

    #[test]
    fn determinism_flag() {
        let ts = resolve_src(
            "fun f(x: ℤ[0,3]): ℤ[0,3] = choose y: ℤ[0,3] with y ≥ x; \
             fun g(x: ℤ[0,3]): ℤ[0,3] = f(x); fun h(x: ℤ[0,3]): ℤ[0,3] = x;",
            &[],
        )
        .unwrap();
        assert!(!ts.op("f").unwrap().deterministic);
        assert!(!ts.op("g").unwrap().deterministic);
        assert!(ts.op("h").unwrap().deterministic);
    }

    #[test]
    fn carrier_overflow_reported() {
        let err = resolve_src("theorem t(a: Array[100, ℤ[0,9]]) ⇔ true;", &[]).unwrap_err();
        assert!(matches!(err, SemaError::Overflow { .. }));
    }

    #[test]
    fn old_prefix_reserved_for_program_variables() {
        let src = "proc p(old_x: ℤ[0,3]): ℤ[0,3] { return old_x; }";
        assert!(resolve_src(src, &[]).is_err());
        assert!(resolve_src("pred q(x: ℤ[0,3]) ⇔ let old_x = x in old_x = x;", &[]).is_ok());
    }
}
