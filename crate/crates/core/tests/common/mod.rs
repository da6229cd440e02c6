//! Generators shared by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::HashMap;

use finicheck_core::syntax::ast::*;
use proptest::prelude::*;

const KEYWORDS: &[&str] = &[
    "val", "type", "pred", "fun", "theorem", "proc", "requires", "ensures", "invariant", "decreases", "var", "while",
    "do", "for", "if", "then", "else", "return", "assert", "choose", "with", "let", "letpar", "in", "true", "false",
    "forall", "exists", "not", "and", "or", "implies", "iff", "isin", "emptyset",
];

pub fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,4}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str()))
}

fn id() -> impl Strategy<Value = Ident> {
    ident().prop_map(Ident::new)
}

fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn small_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..1000).prop_map(Expr::int),
        any::<bool>().prop_map(Expr::boolean),
        ident().prop_map(|v| Expr::var(&v)),
    ]
}

/// Type expressions whose bound expressions come from `e`.
fn type_with(e: BoxedStrategy<Expr>) -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![
        ident().prop_map(|n| TypeExpr::named(&n)),
        Just(TypeExpr::new(TypeExprKind::Bool)),
        e.clone().prop_map(|x| TypeExpr::new(TypeExprKind::NatUpTo(boxed(x)))),
        (e.clone(), e.clone()).prop_map(|(a, b)| TypeExpr::new(TypeExprKind::Range(boxed(a), boxed(b)))),
    ];
    leaf.prop_recursive(2, 6, 3, move |inner| {
        prop_oneof![
            (e.clone(), inner.clone()).prop_map(|(n, t)| TypeExpr::new(TypeExprKind::Array(boxed(n), Box::new(t)))),
            inner.clone().prop_map(|t| TypeExpr::new(TypeExprKind::Set(Box::new(t)))),
            prop::collection::vec(inner, 2..4).prop_map(|ts| TypeExpr::new(TypeExprKind::Tuple(ts))),
        ]
    })
}

pub fn type_expr() -> impl Strategy<Value = TypeExpr> {
    type_with(small_expr().boxed())
}

fn binder() -> impl Strategy<Value = Binder> {
    (id(), type_expr()).prop_map(|(name, ty)| Binder { name, ty })
}

const BINOPS: &[BinOp] = &[
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Eq,
    BinOp::Neq,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::Member,
    BinOp::And,
    BinOp::Or,
    BinOp::Implies,
    BinOp::Iff,
];

/// Arbitrary (not necessarily well-typed) expressions.
pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        4 => small_expr(),
        1 => type_expr().prop_map(|t| Expr::new(ExprKind::EmptySet(t))),
    ];
    leaf.prop_recursive(4, 40, 4, |e| {
        let binding = (id(), e.clone()).prop_map(|(name, value)| Binding { name, value });
        prop_oneof![
            (prop::sample::select(vec![UnOp::Not, UnOp::Neg]), e.clone())
                .prop_map(|(op, x)| Expr::new(ExprKind::Unary(op, boxed(x)))),
            (prop::sample::select(BINOPS), e.clone(), e.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (
                prop::sample::select(vec![Quantifier::Forall, Quantifier::Exists]),
                prop::collection::vec(binder(), 1..3),
                e.clone()
            )
                .prop_map(|(quantifier, binders, body)| Expr::new(ExprKind::Quant {
                    quantifier,
                    binders,
                    body: boxed(body)
                })),
            (binder(), e.clone()).prop_map(|(binder, c)| Expr::new(ExprKind::Choose { binder, cond: boxed(c) })),
            (any::<bool>(), prop::collection::vec(binding, 1..3), e.clone()).prop_map(|(parallel, bindings, body)| {
                Expr::new(ExprKind::Let {
                    parallel,
                    bindings,
                    body: boxed(body),
                })
            }),
            (e.clone(), e.clone(), e.clone()).prop_map(|(c, t, f)| Expr::new(ExprKind::If {
                cond: boxed(c),
                then: boxed(t),
                els: boxed(f)
            })),
            (id(), prop::collection::vec(e.clone(), 0..3))
                .prop_map(|(name, args)| Expr::new(ExprKind::Call { name, args })),
            (e.clone(), e.clone()).prop_map(|(b, i)| Expr::new(ExprKind::Index {
                base: boxed(b),
                index: boxed(i)
            })),
            (ident(), 1usize..4).prop_map(|(b, index)| Expr::new(ExprKind::Proj {
                base: boxed(Expr::var(&b)),
                index
            })),
            (e.clone(), e.clone(), e.clone()).prop_map(|(b, i, v)| Expr::new(ExprKind::With {
                base: boxed(b),
                index: boxed(i),
                value: boxed(v)
            })),
            prop::collection::vec(e.clone(), 1..4).prop_map(|xs| Expr::new(ExprKind::SetLit(xs))),
            prop::collection::vec(e.clone(), 2..4).prop_map(|xs| Expr::new(ExprKind::TupleLit(xs))),
            (small_expr(), type_expr(), e).prop_map(|(n, t, v)| Expr::new(ExprKind::ArrayInit {
                ty: TypeExpr::new(TypeExprKind::Array(boxed(n), Box::new(t))),
                value: boxed(v)
            })),
        ]
    })
}

fn annotations() -> impl Strategy<Value = LoopAnnotations> {
    (prop::collection::vec(expr(), 0..3), prop::option::of(expr()))
        .prop_map(|(invariants, decreases)| LoopAnnotations { invariants, decreases })
}

fn lvalue() -> impl Strategy<Value = LValue> {
    (id(), prop::collection::vec(small_expr(), 0..3)).prop_map(|(name, indices)| LValue { name, indices })
}

fn simple_command() -> impl Strategy<Value = Command> {
    prop_oneof![
        (id(), type_expr(), expr()).prop_map(|(name, ty, init)| Command::new(CommandKind::Var { name, ty, init })),
        (lvalue(), expr()).prop_map(|(target, value)| Command::new(CommandKind::Assign { target, value })),
        expr().prop_map(|e| Command::new(CommandKind::Assert(e))),
        (id(), prop::collection::vec(small_expr(), 0..3))
            .prop_map(|(name, args)| Command::new(CommandKind::Call { name, args })),
    ]
}

pub fn command() -> impl Strategy<Value = Command> {
    simple_command().prop_recursive(3, 16, 3, |c| {
        prop_oneof![
            (expr(), c.clone(), prop::option::of(c.clone())).prop_map(|(cond, t, e)| Command::new(CommandKind::If {
                cond,
                then: Box::new(t),
                els: e.map(Box::new)
            })),
            (expr(), annotations(), c.clone()).prop_map(|(cond, ann, body)| Command::new(CommandKind::While {
                cond,
                ann,
                body: Box::new(body)
            })),
            (
                simple_command().prop_filter("for init", |c| matches!(
                    c.kind,
                    CommandKind::Var { .. } | CommandKind::Assign { .. }
                )),
                expr(),
                (lvalue(), expr()).prop_map(|(target, value)| Command::new(CommandKind::Assign { target, value })),
                annotations(),
                c.clone()
            )
                .prop_map(|(init, cond, update, ann, body)| Command::new(CommandKind::For {
                    init: Box::new(init),
                    cond,
                    update: Box::new(update),
                    ann,
                    body: Box::new(body)
                })),
            prop::collection::vec(c, 0..4)
                .prop_filter("one-element blocks are not produced", |v| v.len() != 1)
                .prop_map(|v| Command::new(CommandKind::Seq(v))),
        ]
    })
}

fn params() -> impl Strategy<Value = Vec<Param>> {
    prop::collection::vec((id(), type_expr()).prop_map(|(name, ty)| Param { name, ty }), 0..3)
}

fn exprs(n: usize) -> impl Strategy<Value = Vec<Expr>> {
    prop::collection::vec(expr(), 0..n)
}

pub fn decl() -> impl Strategy<Value = Decl> {
    let kind = prop_oneof![
        (
            id(),
            prop::option::of(prop_oneof![
                Just(TypeExpr::new(TypeExprKind::Nat)),
                Just(TypeExpr::new(TypeExprKind::Int)),
                type_expr()
            ]),
            prop::option::of(expr())
        )
            .prop_filter("val needs a type or a value", |(_, ty, value)| ty.is_some() || value.is_some())
            .prop_map(|(name, ty, value)| DeclKind::Val { name, ty, value }),
        (id(), type_expr()).prop_map(|(name, ty)| DeclKind::Type { name, ty }),
        (id(), params(), exprs(3), expr()).prop_map(|(name, params, requires, body)| DeclKind::Pred {
            name,
            params,
            requires,
            body
        }),
        (id(), params(), type_expr(), exprs(3), expr()).prop_map(|(name, params, result, requires, body)| {
            DeclKind::Fun {
                name,
                params,
                result,
                requires,
                body,
            }
        }),
        (id(), params(), exprs(3), expr()).prop_map(|(name, params, requires, body)| DeclKind::Theorem {
            name,
            params,
            requires,
            body
        }),
        (
            id(),
            params(),
            type_expr(),
            exprs(3),
            exprs(3),
            prop::collection::vec(command(), 0..4),
            expr()
        )
            .prop_map(|(name, params, result, requires, ensures, body, ret)| DeclKind::Proc {
                name,
                params,
                result,
                requires,
                ensures,
                body,
                ret
            }),
    ];
    kind.prop_map(|kind| Decl {
        kind,
        span: Default::default(),
    })
}

pub fn spec() -> impl Strategy<Value = Spec> {
    prop::collection::vec(decl(), 0..4).prop_map(|decls| Spec { decls })
}

// ------------------------------------------------------------------ oracle

/// Variable names of generated closed formulas.
const NAMES: &[&str] = &["x", "y", "z"];

/// A carrier `ℤ[lo,hi]` with at most 50 elements.
fn carrier() -> impl Strategy<Value = (i64, i64)> {
    (-10i64..10, 0i64..50).prop_map(|(lo, w)| (lo, lo + w))
}

fn range(lo: i64, hi: i64) -> TypeExpr {
    TypeExpr::new(TypeExprKind::Range(boxed(int_lit(lo)), boxed(int_lit(hi))))
}

fn int_lit(n: i64) -> Expr {
    if n < 0 {
        Expr::new(ExprKind::Unary(UnOp::Neg, boxed(Expr::int(-n))))
    } else {
        Expr::int(n)
    }
}

fn bind(name: &str, lo: i64, hi: i64) -> Binder {
    Binder {
        name: Ident::new(name),
        ty: range(lo, hi),
    }
}

fn var() -> impl Strategy<Value = Expr> {
    prop::sample::select(NAMES).prop_map(Expr::var)
}

/// Integer terms over `x`, `y`, `z`. Only `term_depth` levels of nesting.
fn term(formula: BoxedStrategy<Expr>) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![(0i64..20).prop_map(int_lit), var()];
    leaf.prop_recursive(2, 6, 2, move |t| {
        prop_oneof![
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]),
                t.clone(),
                t.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            t.clone().prop_map(|x| Expr::new(ExprKind::Unary(UnOp::Neg, boxed(x)))),
            (formula.clone(), t.clone(), t.clone()).prop_map(|(c, a, b)| Expr::new(ExprKind::If {
                cond: boxed(c),
                then: boxed(a),
                els: boxed(b)
            })),
            (prop::sample::select(NAMES), carrier(), formula.clone()).prop_map(|(n, (lo, hi), c)| Expr::new(
                ExprKind::Choose {
                    binder: bind(n, lo, hi),
                    cond: boxed(c)
                }
            )),
        ]
    })
    .boxed()
}

fn atom() -> impl Strategy<Value = Expr> {
    let t = prop_oneof![(0i64..20).prop_map(int_lit), var()];
    prop_oneof![
        1 => any::<bool>().prop_map(Expr::boolean),
        4 => (
            prop::sample::select(vec![BinOp::Eq, BinOp::Neq, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]),
            t.clone(),
            t
        )
            .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
    ]
}

/// Boolean formulas over `x`, `y`, `z` (possibly free).
pub fn open_formula() -> impl Strategy<Value = Expr> {
    atom().prop_recursive(4, 24, 2, |f| {
        let t = term(f.clone().boxed());
        prop_oneof![
            f.clone().prop_map(Expr::negation),
            (
                prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Iff]),
                f.clone(),
                f.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (
                prop::sample::select(vec![Quantifier::Forall, Quantifier::Exists]),
                prop::sample::select(NAMES),
                carrier(),
                f.clone()
            )
                .prop_map(|(quantifier, n, (lo, hi), body)| Expr::new(ExprKind::Quant {
                    quantifier,
                    binders: vec![bind(n, lo, hi)],
                    body: boxed(body)
                })),
            (
                prop::sample::select(vec![BinOp::Eq, BinOp::Lt, BinOp::Ge]),
                t.clone(),
                t.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (prop::sample::select(NAMES), t, f.clone()).prop_map(|(n, v, body)| Expr::let_in(
                false,
                vec![(n.to_string(), v)],
                body
            )),
            (f.clone(), f.clone(), f).prop_map(|(c, a, b)| Expr::new(ExprKind::If {
                cond: boxed(c),
                then: boxed(a),
                els: boxed(b)
            })),
        ]
    })
}

/// Closed formulas: free variables are bound by outer `let`s.
pub fn closed_formula() -> impl Strategy<Value = Expr> {
    (open_formula(), prop::collection::vec(-5i64..15, 3)).prop_map(|(f, vals)| {
        let bindings = NAMES
            .iter()
            .zip(vals)
            .map(|(n, v)| (n.to_string(), int_lit(v)))
            .collect();
        Expr::let_in(true, bindings, f)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleValue {
    Int(i64),
    Bool(bool),
}

/// `choose` without a satisfying value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoChoice;

/// Direct recursive evaluation of the generated fragment: quantifiers and
/// `choose` enumerate their carrier in ascending order.
pub fn oracle(e: &Expr, env: &mut HashMap<String, i64>) -> Result<OracleValue, NoChoice> {
    use OracleValue::*;
    let int = |e: &Expr, env: &mut HashMap<String, i64>| -> Result<i64, NoChoice> {
        match oracle(e, env)? {
            Int(n) => Ok(n),
            Bool(_) => panic!("ill-typed term {e:?}"),
        }
    };
    let boolean = |e: &Expr, env: &mut HashMap<String, i64>| -> Result<bool, NoChoice> {
        match oracle(e, env)? {
            Bool(b) => Ok(b),
            Int(_) => panic!("ill-typed formula {e:?}"),
        }
    };
    Ok(match &e.kind {
        ExprKind::Int(n) => Int(*n),
        ExprKind::Bool(b) => Bool(*b),
        ExprKind::Var(v) => Int(env[v]),
        ExprKind::Unary(UnOp::Neg, x) => Int(-int(x, env)?),
        ExprKind::Unary(UnOp::Not, x) => Bool(!boolean(x, env)?),
        ExprKind::Binary(op, l, r) => match op {
            BinOp::And => Bool(boolean(l, env)? && boolean(r, env)?),
            BinOp::Or => Bool(boolean(l, env)? || boolean(r, env)?),
            BinOp::Implies => Bool(!boolean(l, env)? || boolean(r, env)?),
            BinOp::Iff => Bool(boolean(l, env)? == boolean(r, env)?),
            _ => {
                let (a, b) = (int(l, env)?, int(r, env)?);
                match op {
                    BinOp::Add => Int(a + b),
                    BinOp::Sub => Int(a - b),
                    BinOp::Mul => Int(a * b),
                    BinOp::Eq => Bool(a == b),
                    BinOp::Neq => Bool(a != b),
                    BinOp::Lt => Bool(a < b),
                    BinOp::Le => Bool(a <= b),
                    BinOp::Gt => Bool(a > b),
                    BinOp::Ge => Bool(a >= b),
                    _ => unreachable!("not generated"),
                }
            }
        },
        ExprKind::Quant {
            quantifier,
            binders,
            body,
        } => {
            let (name, lo, hi) = carrier_of(&binders[0]);
            let saved = env.get(&name).copied();
            let mut result = *quantifier == Quantifier::Forall;
            for v in lo..=hi {
                env.insert(name.clone(), v);
                let b = boolean(body, env);
                let b = match b {
                    Ok(b) => b,
                    Err(e) => {
                        restore(env, &name, saved);
                        return Err(e);
                    }
                };
                if b != result {
                    result = b;
                    break;
                }
            }
            restore(env, &name, saved);
            Bool(result)
        }
        ExprKind::Choose { binder, cond } => {
            let (name, lo, hi) = carrier_of(binder);
            let saved = env.get(&name).copied();
            let mut found = None;
            for v in lo..=hi {
                env.insert(name.clone(), v);
                match boolean(cond, env) {
                    Ok(true) => {
                        found = Some(v);
                        break;
                    }
                    Ok(false) => {}
                    Err(e) => {
                        restore(env, &name, saved);
                        return Err(e);
                    }
                }
            }
            restore(env, &name, saved);
            Int(found.ok_or(NoChoice)?)
        }
        ExprKind::Let { bindings, body, .. } => {
            let mut vals = Vec::new();
            for b in bindings {
                vals.push((b.name.name.clone(), int(&b.value, env)?));
            }
            let saved: Vec<(String, Option<i64>)> =
                vals.iter().map(|(n, _)| (n.clone(), env.get(n).copied())).collect();
            for (n, v) in vals {
                env.insert(n, v);
            }
            let r = oracle(body, env);
            for (n, s) in saved.into_iter().rev() {
                restore(env, &n, s);
            }
            r?
        }
        ExprKind::If { cond, then, els } => {
            if boolean(cond, env)? {
                oracle(then, env)?
            } else {
                oracle(els, env)?
            }
        }
        _ => unreachable!("not generated: {e:?}"),
    })
}

fn restore(env: &mut HashMap<String, i64>, name: &str, saved: Option<i64>) {
    match saved {
        Some(v) => env.insert(name.to_string(), v),
        None => env.remove(name),
    };
}

fn lit_value(e: &Expr) -> i64 {
    match &e.kind {
        ExprKind::Int(n) => *n,
        ExprKind::Unary(UnOp::Neg, x) => -lit_value(x),
        _ => unreachable!("generated bounds are literals"),
    }
}

fn carrier_of(b: &Binder) -> (String, i64, i64) {
    match &b.ty.kind {
        TypeExprKind::Range(lo, hi) => (b.name.name.clone(), lit_value(lo), lit_value(hi)),
        _ => unreachable!("generated binders range over intervals"),
    }
}
