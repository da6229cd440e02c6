//! Weakest preconditions over the command syntax. Loops are abstracted by
//! their invariants; calls of procedures inside assignments are abstracted
//! by the callee's postcondition.

use std::collections::HashMap;

use super::VcgError;
use crate::syntax::ast::*;
use crate::syntax::Span;

type Result<T> = std::result::Result<T, VcgError>;

/// Declared types of the program variables of one procedure, and the
/// declarations of the operations it may call.
pub(crate) struct Scope<'a> {
    pub vars: HashMap<String, TypeExpr>,
    /// Program variables in declaration order.
    pub order: Vec<String>,
    pub ops: HashMap<&'a str, &'a Decl>,
    fresh: std::cell::Cell<usize>,
}

impl<'a> Scope<'a> {
    pub fn new(spec: &'a Spec, vars: &[(String, TypeExpr)]) -> Self {
        let ops = spec
            .decls
            .iter()
            .filter(|d| !matches!(d.kind, DeclKind::Val { .. } | DeclKind::Type { .. }))
            .map(|d| (d.kind.name().name.as_str(), d))
            .collect();
        Scope {
            vars: vars.iter().cloned().collect(),
            order: vars.iter().map(|(n, _)| n.clone()).collect(),
            ops,
            fresh: std::cell::Cell::new(0),
        }
    }

    /// Adds the variables declared in `cmds`, in source order.
    pub fn declare_all(&mut self, cmds: &[Command]) {
        for c in cmds {
            if let CommandKind::Var { name, ty, .. } = &c.kind {
                self.vars.insert(name.name.clone(), ty.clone());
                self.order.push(name.name.clone());
            }
            let kids: Vec<Command> = c.children().into_iter().cloned().collect();
            self.declare_all(&kids);
        }
    }

    pub fn fresh(&self, base: &str) -> String {
        let n = self.fresh.get();
        self.fresh.set(n + 1);
        format!("_{base}{n}")
    }

    fn procedure(&self, name: &str) -> Option<&'a Decl> {
        self.ops
            .get(name)
            .copied()
            .filter(|d| matches!(d.kind, DeclKind::Proc { .. }))
    }

    /// `(modified variable, declared type)` pairs of a loop body.
    pub fn modified(&self, body: &Command) -> Result<Vec<(String, TypeExpr)>> {
        loop_modified_variables(&[body], &self.order)
            .into_iter()
            .map(|v| {
                let ty = self.vars.get(&v).cloned().ok_or(VcgError::UnsupportedConstruct {
                    span: body.span,
                    what: format!("assignment to `{v}`"),
                })?;
                Ok((v, ty))
            })
            .collect()
    }

    pub fn wp_all(&self, cmds: &[Command], post: Expr) -> Result<Expr> {
        cmds.iter().rev().try_fold(post, |q, c| self.wp(c, q))
    }

    pub fn wp(&self, c: &Command, q: Expr) -> Result<Expr> {
        match &c.kind {
            CommandKind::Var { name, init, .. } => self.bind(&name.name, init, q, |v| v),
            CommandKind::Assign { target, value } => {
                let base = Expr::var(&target.name.name);
                let idx = target.indices.clone();
                self.bind(&target.name.name, value, q, move |v| update(&base, &idx, v))
            }
            CommandKind::If { cond, then, els } => {
                let t = self.wp(then, q.clone())?;
                let e = match els {
                    Some(e) => self.wp(e, q)?,
                    None => q,
                };
                Ok(Expr::and(
                    Expr::implies(cond.clone(), t),
                    Expr::implies(Expr::negation(cond.clone()), e),
                ))
            }
            CommandKind::While { cond, ann, body } => {
                let exit = Expr::implies(
                    assume(&ann.invariants, Some(Expr::negation(cond.clone()))),
                    q,
                );
                Ok(self.loop_head(body, exit)?)
            }
            CommandKind::For { .. } => self.wp(&desugar(c), q),
            CommandKind::Seq(cs) => self.wp_all(cs, q),
            CommandKind::Assert(e) => Ok(Expr::and(e.clone(), q)),
            CommandKind::Call { .. } => Ok(q),
        }
    }

    /// `letpar old_v = v, … in ∀V. body`, omitting empty binders.
    pub fn loop_head(&self, body: &Command, inner: Expr) -> Result<Expr> {
        let vars = self.modified(body)?;
        Ok(snapshots(&vars, forall(&vars, inner)))
    }

    /// `let result = r in q`.
    pub fn bind_result(&self, r: &Expr, q: Expr) -> Result<Expr> {
        self.bind("result", r, q, |v| v)
    }

    /// `let x = f(value) in q`; a procedure call is replaced by a fresh value
    /// constrained by the callee's postcondition.
    fn bind(&self, x: &str, value: &Expr, q: Expr, f: impl FnOnce(Expr) -> Expr) -> Result<Expr> {
        if let ExprKind::Call { name, args } = &value.kind {
            if let Some(DeclKind::Proc {
                params,
                result,
                ensures,
                ..
            }) = self.procedure(&name.name).map(|d| &d.kind)
            {
                let r = self.fresh("r");
                let body = Expr::let_in(false, vec![(x.to_string(), f(Expr::var(&r)))], q);
                let body = if ensures.is_empty() {
                    body
                } else {
                    let mut bs = instantiate(params, args);
                    bs.push(("result".to_string(), Expr::var(&r)));
                    Expr::implies(Expr::let_in(true, bs, Expr::conjunction(ensures.clone())), body)
                };
                return Ok(Expr::forall(vec![(r, result.clone())], body));
            }
        }
        Ok(Expr::let_in(false, vec![(x.to_string(), f(value.clone()))], q))
    }
}

/// Parameter bindings of a call.
pub(crate) fn instantiate(params: &[Param], args: &[Expr]) -> Vec<(String, Expr)> {
    params
        .iter()
        .zip(args)
        .map(|(p, a)| (p.name.name.clone(), a.clone()))
        .collect()
}

/// `a with [i] = (a[i] with [j] = … v)` for `a[i][j]… ≔ v`.
fn update(base: &Expr, idx: &[Expr], v: Expr) -> Expr {
    let Some((i, rest)) = idx.split_first() else {
        return v;
    };
    let inner = Expr::new(ExprKind::Index {
        base: Box::new(base.clone()),
        index: Box::new(i.clone()),
    });
    Expr::new(ExprKind::With {
        base: Box::new(base.clone()),
        index: Box::new(i.clone()),
        value: Box::new(update(&inner, rest, v)),
    })
}

pub(crate) fn snapshots(vars: &[(String, TypeExpr)], body: Expr) -> Expr {
    if vars.is_empty() {
        return body;
    }
    let bs = vars
        .iter()
        .map(|(v, _)| (format!("old_{v}"), Expr::var(v)))
        .collect();
    Expr::let_in(true, bs, body)
}

pub(crate) fn forall(vars: &[(String, TypeExpr)], body: Expr) -> Expr {
    if vars.is_empty() {
        body
    } else {
        Expr::forall(vars.to_vec(), body)
    }
}

/// Conjunction of the invariants, extended by `extra`.
pub(crate) fn assume(invariants: &[Expr], extra: Option<Expr>) -> Expr {
    Expr::conjunction(invariants.iter().cloned().chain(extra))
}

/// `for init; c; u do b` as `{ init; while c do { b; u } }`.
pub(crate) fn desugar(c: &Command) -> Command {
    let CommandKind::For {
        init,
        cond,
        update,
        ann,
        body,
    } = &c.kind
    else {
        return c.clone();
    };
    let inner = Command {
        kind: CommandKind::Seq(vec![(**body).clone(), (**update).clone()]),
        span: body.span.join(update.span),
    };
    let w = Command {
        kind: CommandKind::While {
            cond: cond.clone(),
            ann: ann.clone(),
            body: Box::new(inner),
        },
        span: c.span,
    };
    Command {
        kind: CommandKind::Seq(vec![(**init).clone(), w]),
        span: c.span,
    }
}

/// Spans of the code a wp derivation through `cmds` reads: simple commands,
/// branch conditions, and for loops only the condition and invariants.
pub(crate) fn traversed(cmds: &[Command], out: &mut Vec<Span>) {
    for c in cmds {
        match &c.kind {
            CommandKind::Var { .. }
            | CommandKind::Assign { .. }
            | CommandKind::Assert(_)
            | CommandKind::Call { .. } => out.push(c.span),
            CommandKind::If { cond, then, els } => {
                out.push(cond.span);
                traversed(std::slice::from_ref(then), out);
                if let Some(e) = els {
                    traversed(std::slice::from_ref(e), out);
                }
            }
            CommandKind::While { cond, ann, .. } => {
                out.push(cond.span);
                out.extend(ann.invariants.iter().map(|i| i.span));
            }
            CommandKind::For { .. } => traversed(&[desugar(c)], out),
            CommandKind::Seq(cs) => traversed(cs, out),
        }
    }
}
