//! Abstract syntax of specifications. Every node carries the [`Span`] of the
//! source text it was parsed from; generated nodes use `Span::default()`.

use std::collections::BTreeSet;

use super::span::Span;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Spec {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Val {
        name: Ident,
        ty: Option<TypeExpr>,
        value: Option<Expr>,
    },
    Type {
        name: Ident,
        ty: TypeExpr,
    },
    Pred {
        name: Ident,
        params: Vec<Param>,
        requires: Vec<Expr>,
        body: Expr,
    },
    Fun {
        name: Ident,
        params: Vec<Param>,
        result: TypeExpr,
        requires: Vec<Expr>,
        body: Expr,
    },
    Theorem {
        name: Ident,
        params: Vec<Param>,
        requires: Vec<Expr>,
        body: Expr,
    },
    Proc {
        name: Ident,
        params: Vec<Param>,
        result: TypeExpr,
        requires: Vec<Expr>,
        ensures: Vec<Expr>,
        body: Vec<Command>,
        ret: Expr,
    },
}

impl DeclKind {
    pub fn name(&self) -> &Ident {
        match self {
            DeclKind::Val { name, .. }
            | DeclKind::Type { name, .. }
            | DeclKind::Pred { name, .. }
            | DeclKind::Fun { name, .. }
            | DeclKind::Theorem { name, .. }
            | DeclKind::Proc { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: TypeExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExprKind {
    Named(String),
    Bool,
    /// Unbounded `ℕ`; only legal as the type of a `val`.
    Nat,
    /// Unbounded `ℤ`; only legal as the type of a `val`.
    Int,
    /// `ℕ[hi]`, sugar for `ℤ[0,hi]`.
    NatUpTo(Box<Expr>),
    /// `ℤ[lo,hi]`.
    Range(Box<Expr>, Box<Expr>),
    Array(Box<Expr>, Box<TypeExpr>),
    Set(Box<TypeExpr>),
    Tuple(Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn new(kind: TypeExprKind) -> Self {
        TypeExpr {
            kind,
            span: Span::default(),
        }
    }

    pub fn named(name: &str) -> Self {
        TypeExpr::new(TypeExprKind::Named(name.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Member,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "⋅",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "=",
            BinOp::Neq => "≠",
            BinOp::Lt => "<",
            BinOp::Le => "≤",
            BinOp::Gt => ">",
            BinOp::Ge => "≥",
            BinOp::Member => "∈",
            BinOp::And => "∧",
            BinOp::Or => "∨",
            BinOp::Implies => "⇒",
            BinOp::Iff => "⇔",
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantifier::Forall => "∀",
            Quantifier::Exists => "∃",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: Ident,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Quant {
        quantifier: Quantifier,
        binders: Vec<Binder>,
        body: Box<Expr>,
    },
    Choose {
        binder: Binder,
        cond: Box<Expr>,
    },
    Let {
        parallel: bool,
        bindings: Vec<Binding>,
        body: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Call {
        name: Ident,
        args: Vec<Expr>,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    /// Tuple component, 1-based as written (`t.1`).
    Proj {
        base: Box<Expr>,
        index: usize,
    },
    /// Functional array update `a with [i] = v`.
    With {
        base: Box<Expr>,
        index: Box<Expr>,
        value: Box<Expr>,
    },
    SetLit(Vec<Expr>),
    EmptySet(TypeExpr),
    TupleLit(Vec<Expr>),
    /// `Array[n,T](v)`: array of the given type with every element `v`.
    ArrayInit {
        ty: TypeExpr,
        value: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn int(n: i64) -> Self {
        Expr::new(ExprKind::Int(n))
    }

    pub fn boolean(b: bool) -> Self {
        Expr::new(ExprKind::Bool(b))
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(name.to_string()))
    }

    pub fn negation(e: Expr) -> Self {
        Expr::new(ExprKind::Unary(UnOp::Not, Box::new(e)))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    pub fn and(l: Expr, r: Expr) -> Self {
        Expr::binary(BinOp::And, l, r)
    }

    pub fn implies(l: Expr, r: Expr) -> Self {
        Expr::binary(BinOp::Implies, l, r)
    }

    /// Left-nested conjunction; `true` for an empty list.
    pub fn conjunction(items: impl IntoIterator<Item = Expr>) -> Self {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or_else(|| Expr::boolean(true))
    }

    pub fn let_in(parallel: bool, bindings: Vec<(String, Expr)>, body: Expr) -> Self {
        Expr::new(ExprKind::Let {
            parallel,
            bindings: bindings
                .into_iter()
                .map(|(n, v)| Binding {
                    name: Ident::new(n),
                    value: v,
                })
                .collect(),
            body: Box::new(body),
        })
    }

    pub fn forall(binders: Vec<(String, TypeExpr)>, body: Expr) -> Self {
        Expr::new(ExprKind::Quant {
            quantifier: Quantifier::Forall,
            binders: binders
                .into_iter()
                .map(|(n, ty)| Binder {
                    name: Ident::new(n),
                    ty,
                })
                .collect(),
            body: Box::new(body),
        })
    }

    pub fn is_true(&self) -> bool {
        matches!(self.kind, ExprKind::Bool(true))
    }

    /// Direct subexpressions, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) | ExprKind::EmptySet(_) => {
                vec![]
            }
            ExprKind::Unary(_, e) => vec![e],
            ExprKind::Binary(_, l, r) => vec![l, r],
            ExprKind::Quant { body, .. } => vec![body],
            ExprKind::Choose { cond, .. } => vec![cond],
            ExprKind::Let { bindings, body, .. } => {
                let mut v: Vec<&Expr> = bindings.iter().map(|b| &b.value).collect();
                v.push(body);
                v
            }
            ExprKind::If { cond, then, els } => vec![cond, then, els],
            ExprKind::Call { args, .. } => args.iter().collect(),
            ExprKind::Index { base, index } => vec![base, index],
            ExprKind::Proj { base, .. } => vec![base],
            ExprKind::With { base, index, value } => vec![base, index, value],
            ExprKind::SetLit(items) | ExprKind::TupleLit(items) => items.iter().collect(),
            ExprKind::ArrayInit { value, .. } => vec![value],
        }
    }

    /// Names of all operations applied anywhere inside this expression.
    pub fn called_operations(&self, out: &mut BTreeSet<String>) {
        if let ExprKind::Call { name, .. } = &self.kind {
            out.insert(name.name.clone());
        }
        for c in self.children() {
            c.called_operations(out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LValue {
    pub name: Ident,
    pub indices: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LoopAnnotations {
    pub invariants: Vec<Expr>,
    pub decreases: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub kind: CommandKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Var {
        name: Ident,
        ty: TypeExpr,
        init: Expr,
    },
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        cond: Expr,
        then: Box<Command>,
        els: Option<Box<Command>>,
    },
    While {
        cond: Expr,
        ann: LoopAnnotations,
        body: Box<Command>,
    },
    For {
        init: Box<Command>,
        cond: Expr,
        update: Box<Command>,
        ann: LoopAnnotations,
        body: Box<Command>,
    },
    /// A brace-delimited block. The parser never produces one-element
    /// sequences; `{c}` is represented as `c` itself.
    Seq(Vec<Command>),
    Assert(Expr),
    Call {
        name: Ident,
        args: Vec<Expr>,
    },
}

impl Command {
    pub fn new(kind: CommandKind) -> Self {
        Command {
            kind,
            span: Span::default(),
        }
    }

    pub fn children(&self) -> Vec<&Command> {
        match &self.kind {
            CommandKind::If { then, els, .. } => {
                let mut v = vec![&**then];
                if let Some(e) = els {
                    v.push(e);
                }
                v
            }
            CommandKind::While { body, .. } => vec![body],
            CommandKind::For {
                init, update, body, ..
            } => vec![init, body, update],
            CommandKind::Seq(cs) => cs.iter().collect(),
            _ => vec![],
        }
    }

    /// Variables declared anywhere inside this command.
    pub fn declared_variables(&self, out: &mut BTreeSet<String>) {
        if let CommandKind::Var { name, .. } = &self.kind {
            out.insert(name.name.clone());
        }
        for c in self.children() {
            c.declared_variables(out);
        }
    }

    /// Variables assigned anywhere inside this command (including
    /// declarations' initializations).
    pub fn assigned_variables(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            CommandKind::Assign { target, .. } => {
                out.insert(target.name.name.clone());
            }
            CommandKind::Var { name, .. } => {
                out.insert(name.name.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.assigned_variables(out);
        }
    }
}

/// Variables a loop may change that exist before the loop starts: every
/// variable assigned in `body` that is not declared inside it, listed in the
/// order given by `declared_order`.
pub fn loop_modified_variables(body: &[&Command], declared_order: &[String]) -> Vec<String> {
    let mut assigned = BTreeSet::new();
    let mut local = BTreeSet::new();
    for c in body {
        c.assigned_variables(&mut assigned);
        c.declared_variables(&mut local);
    }
    declared_order
        .iter()
        .filter(|v| assigned.contains(*v) && !local.contains(*v))
        .cloned()
        .collect()
}

/// Replaces every span in a tree by `Span::default()`, so that trees parsed
/// from different texts compare by structure alone.
pub trait ClearSpans {
    fn clear_spans(&mut self);
}

impl ClearSpans for Ident {
    fn clear_spans(&mut self) {
        self.span = Span::default();
    }
}

impl ClearSpans for TypeExpr {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            TypeExprKind::NatUpTo(e) => e.clear_spans(),
            TypeExprKind::Range(a, b) => {
                a.clear_spans();
                b.clear_spans();
            }
            TypeExprKind::Array(n, t) => {
                n.clear_spans();
                t.clear_spans();
            }
            TypeExprKind::Set(t) => t.clear_spans(),
            TypeExprKind::Tuple(ts) => ts.iter_mut().for_each(|t| t.clear_spans()),
            TypeExprKind::Named(_) | TypeExprKind::Bool | TypeExprKind::Nat | TypeExprKind::Int => {
            }
        }
    }
}

impl ClearSpans for Expr {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
            ExprKind::Unary(_, e) => e.clear_spans(),
            ExprKind::Binary(_, l, r) => {
                l.clear_spans();
                r.clear_spans();
            }
            ExprKind::Quant { binders, body, .. } => {
                for b in binders {
                    b.name.clear_spans();
                    b.ty.clear_spans();
                }
                body.clear_spans();
            }
            ExprKind::Choose { binder, cond } => {
                binder.name.clear_spans();
                binder.ty.clear_spans();
                cond.clear_spans();
            }
            ExprKind::Let { bindings, body, .. } => {
                for b in bindings {
                    b.name.clear_spans();
                    b.value.clear_spans();
                }
                body.clear_spans();
            }
            ExprKind::If { cond, then, els } => {
                cond.clear_spans();
                then.clear_spans();
                els.clear_spans();
            }
            ExprKind::Call { name, args } => {
                name.clear_spans();
                args.iter_mut().for_each(|a| a.clear_spans());
            }
            ExprKind::Index { base, index } => {
                base.clear_spans();
                index.clear_spans();
            }
            ExprKind::Proj { base, .. } => base.clear_spans(),
            ExprKind::With { base, index, value } => {
                base.clear_spans();
                index.clear_spans();
                value.clear_spans();
            }
            ExprKind::SetLit(items) | ExprKind::TupleLit(items) => {
                items.iter_mut().for_each(|e| e.clear_spans())
            }
            ExprKind::EmptySet(t) => t.clear_spans(),
            ExprKind::ArrayInit { ty, value } => {
                ty.clear_spans();
                value.clear_spans();
            }
        }
    }
}

impl ClearSpans for LoopAnnotations {
    fn clear_spans(&mut self) {
        self.invariants.iter_mut().for_each(|e| e.clear_spans());
        if let Some(d) = &mut self.decreases {
            d.clear_spans();
        }
    }
}

impl ClearSpans for Command {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            CommandKind::Var { name, ty, init } => {
                name.clear_spans();
                ty.clear_spans();
                init.clear_spans();
            }
            CommandKind::Assign { target, value } => {
                target.name.clear_spans();
                target.indices.iter_mut().for_each(|e| e.clear_spans());
                value.clear_spans();
            }
            CommandKind::If { cond, then, els } => {
                cond.clear_spans();
                then.clear_spans();
                if let Some(e) = els {
                    e.clear_spans();
                }
            }
            CommandKind::While { cond, ann, body } => {
                cond.clear_spans();
                ann.clear_spans();
                body.clear_spans();
            }
            CommandKind::For {
                init,
                cond,
                update,
                ann,
                body,
            } => {
                init.clear_spans();
                cond.clear_spans();
                update.clear_spans();
                ann.clear_spans();
                body.clear_spans();
            }
            CommandKind::Seq(cs) => cs.iter_mut().for_each(|c| c.clear_spans()),
            CommandKind::Assert(e) => e.clear_spans(),
            CommandKind::Call { name, args } => {
                name.clear_spans();
                args.iter_mut().for_each(|a| a.clear_spans());
            }
        }
    }
}

impl ClearSpans for Param {
    fn clear_spans(&mut self) {
        self.name.clear_spans();
        self.ty.clear_spans();
    }
}

impl ClearSpans for Decl {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        fn all(es: &mut [Expr]) {
            es.iter_mut().for_each(|e| e.clear_spans());
        }
        fn params(ps: &mut [Param]) {
            ps.iter_mut().for_each(|p| p.clear_spans());
        }
        match &mut self.kind {
            DeclKind::Val { name, ty, value } => {
                name.clear_spans();
                if let Some(t) = ty {
                    t.clear_spans();
                }
                if let Some(v) = value {
                    v.clear_spans();
                }
            }
            DeclKind::Type { name, ty } => {
                name.clear_spans();
                ty.clear_spans();
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
                name.clear_spans();
                params(ps);
                all(requires);
                body.clear_spans();
            }
            DeclKind::Fun {
                name,
                params: ps,
                result,
                requires,
                body,
            } => {
                name.clear_spans();
                params(ps);
                result.clear_spans();
                all(requires);
                body.clear_spans();
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
                name.clear_spans();
                params(ps);
                result.clear_spans();
                all(requires);
                all(ensures);
                body.iter_mut().for_each(|c| c.clear_spans());
                ret.clear_spans();
            }
        }
    }
}

impl ClearSpans for Spec {
    fn clear_spans(&mut self) {
        self.decls.iter_mut().for_each(|d| d.clear_spans());
    }
}

/// Clone of `node` with all spans cleared.
pub fn without_spans<T: ClearSpans + Clone>(node: &T) -> T {
    let mut n = node.clone();
    n.clear_spans();
    n
}
