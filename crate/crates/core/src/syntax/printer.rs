//! Fully parenthesized Unicode printer.
//!
//! Operands that are not atomic are wrapped in parentheses; bodies of
//! binders are always parenthesized. The output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    wrap(e, &mut out);
    out
}

/// Prints without outer parentheses, as in declaration bodies.
pub fn print_expr_bare(e: &Expr) -> String {
    let mut out = String::new();
    bare(e, &mut out);
    out
}

pub fn print_type(t: &TypeExpr) -> String {
    let mut out = String::new();
    ty(t, &mut out);
    out
}

pub fn print_command(c: &Command) -> String {
    let mut out = String::new();
    command(c, 0, &mut out);
    out
}

pub fn print_decl(d: &Decl) -> String {
    let mut out = String::new();
    decl(d, &mut out);
    out
}

pub fn print_spec(s: &Spec) -> String {
    let mut out = String::new();
    for d in &s.decls {
        decl(d, &mut out);
        out.push('\n');
    }
    out
}

fn is_atomic(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int(n) => *n >= 0,
        ExprKind::Bool(_)
        | ExprKind::Var(_)
        | ExprKind::Call { .. }
        | ExprKind::Index { .. }
        | ExprKind::Proj { .. }
        | ExprKind::SetLit(_)
        | ExprKind::EmptySet(_)
        | ExprKind::TupleLit(_)
        | ExprKind::ArrayInit { .. } => true,
        _ => false,
    }
}

fn wrap(e: &Expr, out: &mut String) {
    if is_atomic(e) {
        bare(e, out);
    } else {
        out.push('(');
        bare(e, out);
        out.push(')');
    }
}

fn list(items: &[Expr], out: &mut String) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        bare(a, out);
    }
}

fn bare(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Int(n) => {
            if *n < 0 {
                // Negative literals only arise from generated trees; print
                // them as negation so the text stays lexable.
                write!(out, "-{}", n.unsigned_abs()).unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Unary(op, x) => {
            out.push_str(match op {
                UnOp::Not => "¬",
                UnOp::Neg => "-",
            });
            wrap(x, out);
        }
        ExprKind::Binary(op, l, r) => {
            wrap(l, out);
            write!(out, " {} ", op.symbol()).unwrap();
            wrap(r, out);
        }
        ExprKind::Quant {
            quantifier,
            binders,
            body,
        } => {
            out.push_str(quantifier.symbol());
            for (i, b) in binders.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{}:", b.name.name).unwrap();
                ty(&b.ty, out);
            }
            out.push_str(". (");
            bare(body, out);
            out.push(')');
        }
        ExprKind::Choose { binder, cond } => {
            write!(out, "choose {}:", binder.name.name).unwrap();
            ty(&binder.ty, out);
            out.push_str(" with (");
            bare(cond, out);
            out.push(')');
        }
        ExprKind::Let {
            parallel,
            bindings,
            body,
        } => {
            out.push_str(if *parallel { "letpar " } else { "let " });
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{} = ", b.name.name).unwrap();
                bare(&b.value, out);
            }
            out.push_str(" in (");
            bare(body, out);
            out.push(')');
        }
        ExprKind::If { cond, then, els } => {
            out.push_str("if ");
            bare(cond, out);
            out.push_str(" then ");
            bare(then, out);
            out.push_str(" else ");
            bare(els, out);
        }
        ExprKind::Call { name, args } => {
            out.push_str(&name.name);
            out.push('(');
            list(args, out);
            out.push(')');
        }
        ExprKind::Index { base, index } => {
            wrap(base, out);
            out.push('[');
            bare(index, out);
            out.push(']');
        }
        ExprKind::Proj { base, index } => {
            wrap(base, out);
            write!(out, ".{index}").unwrap();
        }
        ExprKind::With { base, index, value } => {
            wrap(base, out);
            out.push_str(" with [");
            bare(index, out);
            out.push_str("] = ");
            wrap(value, out);
        }
        ExprKind::SetLit(items) => {
            out.push('{');
            list(items, out);
            out.push('}');
        }
        ExprKind::EmptySet(t) => {
            out.push_str("∅[");
            ty(t, out);
            out.push(']');
        }
        ExprKind::TupleLit(items) => {
            out.push('⟨');
            list(items, out);
            out.push('⟩');
        }
        ExprKind::ArrayInit { ty: t, value } => {
            ty(t, out);
            out.push('(');
            bare(value, out);
            out.push(')');
        }
    }
}

fn ty(t: &TypeExpr, out: &mut String) {
    match &t.kind {
        TypeExprKind::Named(n) => out.push_str(n),
        TypeExprKind::Bool => out.push_str("Bool"),
        TypeExprKind::Nat => out.push('ℕ'),
        TypeExprKind::Int => out.push('ℤ'),
        TypeExprKind::NatUpTo(hi) => {
            out.push_str("ℕ[");
            bare(hi, out);
            out.push(']');
        }
        TypeExprKind::Range(lo, hi) => {
            out.push_str("ℤ[");
            bare(lo, out);
            out.push_str(", ");
            bare(hi, out);
            out.push(']');
        }
        TypeExprKind::Array(n, elem) => {
            out.push_str("Array[");
            bare(n, out);
            out.push_str(", ");
            ty(elem, out);
            out.push(']');
        }
        TypeExprKind::Set(elem) => {
            out.push_str("Set[");
            ty(elem, out);
            out.push(']');
        }
        TypeExprKind::Tuple(items) => {
            out.push_str("Tuple[");
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                ty(it, out);
            }
            out.push(']');
        }
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn annotations(ann: &LoopAnnotations, level: usize, out: &mut String) {
    for inv in &ann.invariants {
        out.push('\n');
        indent(level + 1, out);
        out.push_str("invariant ");
        bare(inv, out);
        out.push(';');
    }
    if let Some(d) = &ann.decreases {
        out.push('\n');
        indent(level + 1, out);
        out.push_str("decreases ");
        bare(d, out);
        out.push(';');
    }
}

/// Body of a loop or branch: a block goes on its own line, anything else
/// follows inline.
fn nested(c: &Command, level: usize, out: &mut String) {
    if let CommandKind::Seq(_) = c.kind {
        out.push('\n');
        indent(level, out);
    } else {
        out.push(' ');
    }
    command(c, level, out);
}

/// Whether an `else` printed after `c` would attach to an `if` inside it.
fn ends_in_open_if(c: &Command) -> bool {
    match &c.kind {
        CommandKind::If { els: None, .. } => true,
        CommandKind::If { els: Some(e), .. } => ends_in_open_if(e),
        CommandKind::While { body, .. } | CommandKind::For { body, .. } => ends_in_open_if(body),
        _ => false,
    }
}

/// Prints `c` without a trailing semicolon.
fn command(c: &Command, level: usize, out: &mut String) {
    match &c.kind {
        CommandKind::Var { name, ty: t, init } => {
            write!(out, "var {}:", name.name).unwrap();
            ty(t, out);
            out.push_str(" ≔ ");
            bare(init, out);
        }
        CommandKind::Assign { target, value } => {
            out.push_str(&target.name.name);
            for i in &target.indices {
                out.push('[');
                bare(i, out);
                out.push(']');
            }
            out.push_str(" ≔ ");
            bare(value, out);
        }
        CommandKind::If { cond, then, els } => {
            out.push_str("if ");
            bare(cond, out);
            out.push_str(" then");
            let dangling = els.is_some() && ends_in_open_if(then);
            if dangling {
                out.push_str(" { ");
                command(then, level, out);
                out.push_str(" }");
            } else {
                nested(then, level, out);
            }
            if let Some(e) = els {
                out.push_str(" else");
                nested(e, level, out);
            }
        }
        CommandKind::While { cond, ann, body } => {
            out.push_str("while ");
            bare(cond, out);
            out.push_str(" do");
            annotations(ann, level, out);
            nested(body, level, out);
        }
        CommandKind::For {
            init,
            cond,
            update,
            ann,
            body,
        } => {
            out.push_str("for ");
            command(init, level, out);
            out.push_str("; ");
            bare(cond, out);
            out.push_str("; ");
            command(update, level, out);
            out.push_str(" do");
            annotations(ann, level, out);
            nested(body, level, out);
        }
        CommandKind::Seq(items) => {
            out.push('{');
            for item in items {
                out.push('\n');
                indent(level + 1, out);
                command(item, level + 1, out);
                out.push(';');
            }
            out.push('\n');
            indent(level, out);
            out.push('}');
        }
        CommandKind::Assert(e) => {
            out.push_str("assert ");
            bare(e, out);
        }
        CommandKind::Call { name, args } => {
            out.push_str(&name.name);
            out.push('(');
            list(args, out);
            out.push(')');
        }
    }
}

fn params(ps: &[Param], out: &mut String) {
    out.push('(');
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{}:", p.name.name).unwrap();
        ty(&p.ty, out);
    }
    out.push(')');
}

fn clauses(kw: &str, es: &[Expr], out: &mut String) {
    for e in es {
        write!(out, "\n  {kw} ").unwrap();
        bare(e, out);
        out.push(';');
    }
}

fn decl(d: &Decl, out: &mut String) {
    match &d.kind {
        DeclKind::Val {
            name,
            ty: t,
            value,
        } => {
            write!(out, "val {}", name.name).unwrap();
            if let Some(t) = t {
                out.push_str(": ");
                ty(t, out);
            }
            if let Some(v) = value {
                out.push_str(" = ");
                bare(v, out);
            }
            out.push(';');
        }
        DeclKind::Type { name, ty: t } => {
            write!(out, "type {} = ", name.name).unwrap();
            ty(t, out);
            out.push(';');
        }
        DeclKind::Pred {
            name,
            params: ps,
            requires,
            body,
        }
        | DeclKind::Theorem {
            name,
            params: ps,
            requires,
            body,
        } => {
            let kw = if matches!(d.kind, DeclKind::Pred { .. }) {
                "pred"
            } else {
                "theorem"
            };
            write!(out, "{kw} {}", name.name).unwrap();
            params(ps, out);
            clauses("requires", requires, out);
            out.push_str("\n  ⇔ ");
            bare(body, out);
            out.push(';');
        }
        DeclKind::Fun {
            name,
            params: ps,
            result,
            requires,
            body,
        } => {
            write!(out, "fun {}", name.name).unwrap();
            params(ps, out);
            out.push_str(": ");
            ty(result, out);
            clauses("requires", requires, out);
            out.push_str("\n  = ");
            bare(body, out);
            out.push(';');
        }
        DeclKind::Proc {
            name,
            params: ps,
            result,
            requires,
            ensures,
            body,
            ret,
        } => {
            write!(out, "proc {}", name.name).unwrap();
            params(ps, out);
            out.push_str(": ");
            ty(result, out);
            clauses("requires", requires, out);
            clauses("ensures", ensures, out);
            out.push_str("\n{");
            for c in body {
                out.push_str("\n  ");
                command(c, 1, out);
                out.push(';');
            }
            out.push_str("\n  return ");
            bare(ret, out);
            out.push_str(";\n}");
        }
    }
}
