//! Verification conditions of procedures.
//!
//! Each condition is an ordinary theorem over the procedure's parameters,
//! guarded by its precondition, so it can be checked like any other
//! theorem. Conditions are derived with a weakest-precondition calculus in
//! which loops are replaced by their invariants.

mod wp;

use serde::{Deserialize, Serialize};

use crate::check::{run_operation, CheckConfig, CheckError, RunReport};
use crate::sema::{resolve, ConstBinding, SemaError};
use crate::syntax::ast::*;
use crate::syntax::{parse_spec, print_decl, print_expr_bare, Span, SyntaxError};
use wp::{assume, desugar, forall, instantiate, traversed, Scope};

#[derive(Debug, thiserror::Error)]
pub enum VcgError {
    #[error("unsupported construct: {what}")]
    UnsupportedConstruct { span: Span, what: String },
    #[error("`{0}` is not a procedure")]
    NotAProcedure(String),
    #[error("generated conditions do not parse: {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Sema(#[from] SemaError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

type Result<T> = std::result::Result<T, VcgError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VcCategory {
    ResultCorrect,
    InvariantInit,
    MeasureNonNegative,
    InvariantPreserved,
    MeasureDecreased,
    OpPrecondition,
}

impl VcCategory {
    pub const ALL: [VcCategory; 6] = [
        VcCategory::ResultCorrect,
        VcCategory::InvariantInit,
        VcCategory::MeasureNonNegative,
        VcCategory::InvariantPreserved,
        VcCategory::MeasureDecreased,
        VcCategory::OpPrecondition,
    ];

    /// Name part of condition ids.
    pub fn tag(self) -> &'static str {
        match self {
            VcCategory::ResultCorrect => "CorrOp",
            VcCategory::InvariantInit => "InvInit",
            VcCategory::MeasureNonNegative => "MeasNN",
            VcCategory::InvariantPreserved => "InvPres",
            VcCategory::MeasureDecreased => "MeasDec",
            VcCategory::OpPrecondition => "PreOp",
        }
    }

    pub fn question(self) -> &'static str {
        match self {
            VcCategory::ResultCorrect => "Is the result correct?",
            VcCategory::InvariantInit => "Does the loop invariant initially hold?",
            VcCategory::MeasureNonNegative => "Is the loop measure non-negative?",
            VcCategory::InvariantPreserved => "Is the loop invariant preserved?",
            VcCategory::MeasureDecreased => "Is the loop measure decreased?",
            VcCategory::OpPrecondition => "Is the operation precondition satisfied?",
        }
    }

    pub fn is_loop(self) -> bool {
        matches!(
            self,
            VcCategory::InvariantInit
                | VcCategory::MeasureNonNegative
                | VcCategory::InvariantPreserved
                | VcCategory::MeasureDecreased
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VcStatus {
    #[default]
    Unchecked,
    Valid,
    Invalid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationCondition {
    /// `_<proc>_<seq>_<Tag><idx>`
    pub id: String,
    pub category: VcCategory,
    pub procedure: String,
    pub theorem: Decl,
    /// The clause being proved.
    pub goal_span: Span,
    /// Code read by the derivation.
    pub contributing_spans: Vec<Span>,
    pub status: VcStatus,
}

impl VerificationCondition {
    pub fn formula(&self) -> &Expr {
        match &self.theorem.kind {
            DeclKind::Theorem { body, .. } => body,
            _ => unreachable!("conditions are theorems"),
        }
    }

    pub fn text(&self) -> String {
        print_decl(&self.theorem)
    }

    pub fn question(&self) -> &'static str {
        self.category.question()
    }
}

/// Serialized form of a condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VcRecord {
    pub id: String,
    pub category: VcCategory,
    pub question: String,
    pub procedure: String,
    pub formula: String,
    pub theorem: String,
    pub goal_span: Span,
    pub contributing_spans: Vec<Span>,
    pub status: VcStatus,
}

impl From<&VerificationCondition> for VcRecord {
    fn from(vc: &VerificationCondition) -> Self {
        VcRecord {
            id: vc.id.clone(),
            category: vc.category,
            question: vc.question().to_string(),
            procedure: vc.procedure.clone(),
            formula: print_expr_bare(vc.formula()),
            theorem: vc.text(),
            goal_span: vc.goal_span,
            contributing_spans: vc.contributing_spans.clone(),
            status: vc.status,
        }
    }
}

pub fn vcs_to_json(vcs: &[VerificationCondition]) -> String {
    let records: Vec<VcRecord> = vcs.iter().map(VcRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("records serialize")
}

#[derive(Clone, Debug, PartialEq)]
pub struct WpResult {
    pub formula: Expr,
    pub side_conditions: Vec<VerificationCondition>,
    pub contributing_spans: Vec<Span>,
}

/// Weakest precondition of `c` with respect to `post`. `vars` are the
/// variables in scope before `c`, with their types; side conditions are
/// theorems over them.
pub fn wp(spec: &Spec, vars: &[(String, TypeExpr)], c: &Command, post: &Expr) -> Result<WpResult> {
    let mut scope = Scope::new(spec, vars);
    scope.declare_all(std::slice::from_ref(c));
    let formula = scope.wp(c, post.clone())?;
    let params = vars
        .iter()
        .map(|(n, t)| Param {
            name: Ident::new(n),
            ty: t.clone(),
        })
        .collect();
    let mut g = Gen::new(scope, "wp", params, Vec::new());
    g.walk(std::slice::from_ref(c), &Ctx::default())?;
    let mut contributing_spans = Vec::new();
    traversed(std::slice::from_ref(c), &mut contributing_spans);
    Ok(WpResult {
        formula,
        side_conditions: g.finish(),
        contributing_spans,
    })
}

/// Conditions of the procedure `name`, correctness condition first.
pub fn generate_vcs(spec: &Spec, name: &str) -> Result<Vec<VerificationCondition>> {
    let decl = spec
        .decls
        .iter()
        .find(|d| d.kind.name().name == name)
        .ok_or_else(|| VcgError::NotAProcedure(name.to_string()))?;
    let DeclKind::Proc {
        params,
        requires,
        ensures,
        body,
        ret,
        ..
    } = &decl.kind
    else {
        return Err(VcgError::NotAProcedure(name.to_string()));
    };
    let vars: Vec<(String, TypeExpr)> = params.iter().map(|p| (p.name.name.clone(), p.ty.clone())).collect();
    let mut scope = Scope::new(spec, &vars);
    scope.declare_all(body);

    let goal = Expr::conjunction(ensures.iter().cloned());
    let post = scope.bind_result(ret, goal)?;
    let formula = scope.wp_all(body, post)?;
    let mut spans = Vec::new();
    traversed(body, &mut spans);
    spans.push(ret.span);
    let goal_span = ensures.iter().map(|e| e.span).reduce(Span::join).unwrap_or(ret.span);

    let mut g = Gen::new(scope, name, params.clone(), requires.clone());
    g.emit(VcCategory::ResultCorrect, formula, goal_span, spans);
    g.walk(body, &Ctx::default())?;
    let end = Ctx::default().then(Step::Code(body.clone()), body_spans(body));
    g.calls(ret, &end)?;
    let end = end.then(Step::Return(ret.clone()), vec![ret.span]);
    for (k, e) in ensures.iter().enumerate() {
        g.calls(e, &end.then(Step::Assume(assume(&ensures[..k], None)), vec![]))?;
    }
    Ok(g.finish())
}

/// Conditions of every procedure of `spec`, in declaration order.
pub fn generate_all(spec: &Spec) -> Result<Vec<VerificationCondition>> {
    let mut out = Vec::new();
    for d in &spec.decls {
        if let DeclKind::Proc { name, .. } = &d.kind {
            out.extend(generate_vcs(spec, &name.name)?);
        }
    }
    Ok(out)
}

/// Checks each condition as a theorem of `spec` under `bindings`, updating
/// its status. The conditions are printed and parsed back first, so what is
/// checked is exactly their text. `cfg.operation` is ignored.
pub fn check_vcs(
    vcs: &mut [VerificationCondition],
    spec: &Spec,
    bindings: &[ConstBinding],
    cfg: &CheckConfig,
) -> Result<Vec<RunReport>> {
    let text: Vec<String> = vcs.iter().map(|v| v.text()).collect();
    let parsed = parse_spec(&text.join("\n"))?;
    let mut full = spec.clone();
    full.decls.extend(parsed.decls);
    let ts = resolve(&full, bindings)?;
    let mut reports = Vec::with_capacity(vcs.len());
    for vc in vcs.iter_mut() {
        let mut c = cfg.clone();
        c.operation = vc.id.clone();
        let r = run_operation(&ts, &c)?;
        vc.status = if r.passed() {
            VcStatus::Valid
        } else {
            VcStatus::Invalid
        };
        reports.push(r);
    }
    Ok(reports)
}

fn body_spans(cmds: &[Command]) -> Vec<Span> {
    let mut v = Vec::new();
    traversed(cmds, &mut v);
    v
}

/// One layer of the path from the start of a procedure to a program point.
#[derive(Clone, Debug)]
enum Step {
    /// Code executed before the point.
    Code(Vec<Command>),
    Assume(Expr),
    Let(bool, Vec<(String, Expr)>),
    Forall(Vec<(String, TypeExpr)>),
    Return(Expr),
}

/// Turns a goal at a program point into a condition on the initial state.
#[derive(Clone, Debug, Default)]
struct Ctx {
    steps: Vec<Step>,
    spans: Vec<Span>,
}

impl Ctx {
    fn then(&self, step: Step, spans: Vec<Span>) -> Ctx {
        let mut c = self.clone();
        let trivial = match &step {
            Step::Code(cs) => cs.is_empty(),
            Step::Assume(e) => e.is_true(),
            Step::Let(_, bs) => bs.is_empty(),
            Step::Forall(vs) => vs.is_empty(),
            Step::Return(_) => false,
        };
        if !trivial {
            c.steps.push(step);
        }
        c.spans.extend(spans);
        c
    }

    fn close(&self, scope: &Scope, goal: Expr) -> Result<Expr> {
        self.steps.iter().rev().try_fold(goal, |g, s| {
            Ok(match s {
                Step::Code(cs) => scope.wp_all(cs, g)?,
                Step::Assume(a) => Expr::implies(a.clone(), g),
                Step::Let(par, bs) => Expr::let_in(*par, bs.clone(), g),
                Step::Forall(vs) => forall(vs, g),
                Step::Return(r) => scope.bind_result(r, g)?,
            })
        })
    }
}

struct Pending {
    category: VcCategory,
    formula: Expr,
    goal_span: Span,
    spans: Vec<Span>,
}

struct Gen<'a> {
    scope: Scope<'a>,
    proc: String,
    params: Vec<Param>,
    requires: Vec<Expr>,
    out: Vec<Pending>,
}

impl<'a> Gen<'a> {
    fn new(scope: Scope<'a>, proc: &str, params: Vec<Param>, requires: Vec<Expr>) -> Self {
        Gen {
            scope,
            proc: proc.to_string(),
            params,
            requires,
            out: Vec::new(),
        }
    }

    fn emit(&mut self, category: VcCategory, formula: Expr, goal_span: Span, mut spans: Vec<Span>) {
        spans.sort();
        spans.dedup();
        self.out.push(Pending {
            category,
            formula,
            goal_span,
            spans,
        });
    }

    fn finish(self) -> Vec<VerificationCondition> {
        let mut counts = std::collections::HashMap::new();
        self.out
            .into_iter()
            .enumerate()
            .map(|(seq, p)| {
                let idx = counts.entry(p.category).or_insert(0usize);
                let id = format!("_{}_{}_{}{}", self.proc, seq, p.category.tag(), idx);
                *idx += 1;
                let theorem = Decl {
                    kind: DeclKind::Theorem {
                        name: Ident::new(&id),
                        params: self.params.clone(),
                        requires: self.requires.clone(),
                        body: p.formula,
                    },
                    span: Span::default(),
                };
                VerificationCondition {
                    id,
                    category: p.category,
                    procedure: self.proc.clone(),
                    theorem,
                    goal_span: p.goal_span,
                    contributing_spans: p.spans,
                    status: VcStatus::Unchecked,
                }
            })
            .collect()
    }

    fn walk(&mut self, cmds: &[Command], ctx: &Ctx) -> Result<()> {
        for (i, c) in cmds.iter().enumerate() {
            let here = ctx.then(Step::Code(cmds[..i].to_vec()), body_spans(&cmds[..i]));
            match &c.kind {
                CommandKind::Var { init, .. } => self.calls(init, &here)?,
                CommandKind::Assign { target, value } => {
                    for i in &target.indices {
                        self.calls(i, &here)?;
                    }
                    self.calls(value, &here)?;
                }
                CommandKind::If { cond, then, els } => {
                    self.calls(cond, &here)?;
                    let t = here.then(Step::Assume(cond.clone()), vec![cond.span]);
                    self.walk(std::slice::from_ref(then), &t)?;
                    if let Some(e) = els {
                        let f = here.then(Step::Assume(Expr::negation(cond.clone())), vec![cond.span]);
                        self.walk(std::slice::from_ref(e), &f)?;
                    }
                }
                CommandKind::While { cond, ann, body } => self.loop_vcs(cond, ann, body, &here)?,
                CommandKind::For { .. } => self.walk(&[desugar(c)], &here)?,
                CommandKind::Seq(cs) => self.walk(cs, &here)?,
                CommandKind::Assert(e) => self.calls(e, &here)?,
                CommandKind::Call { name, args } => {
                    let call = Expr {
                        kind: ExprKind::Call {
                            name: name.clone(),
                            args: args.clone(),
                        },
                        span: c.span,
                    };
                    self.calls(&call, &here)?;
                }
            }
        }
        Ok(())
    }

    fn loop_vcs(&mut self, cond: &Expr, ann: &LoopAnnotations, body: &Command, here: &Ctx) -> Result<()> {
        let vars = self.scope.modified(body)?;
        let olds: Vec<(String, Expr)> = vars
            .iter()
            .map(|(v, _)| (format!("old_{v}"), Expr::var(v)))
            .collect();
        let invs = &ann.invariants;
        let inv_spans: Vec<Span> = invs.iter().map(|i| i.span).collect();
        let entry = here.then(Step::Let(true, olds), vec![]);
        let generic = entry.then(Step::Forall(vars.clone()), vec![]);

        for (k, inv) in invs.iter().enumerate() {
            let before = generic.then(Step::Assume(assume(&invs[..k], None)), inv_spans[..k].to_vec());
            self.calls(inv, &before)?;
            let f = entry.close(&self.scope, inv.clone())?;
            let mut spans = entry.spans.clone();
            spans.push(inv.span);
            self.emit(VcCategory::InvariantInit, f, inv.span, spans);
        }
        let holds = generic.then(Step::Assume(assume(invs, None)), inv_spans.clone());
        if let Some(d) = &ann.decreases {
            self.calls(d, &holds)?;
            let nn = Expr::binary(BinOp::Ge, d.clone(), Expr::int(0));
            let f = holds.close(&self.scope, nn)?;
            let mut spans = holds.spans.clone();
            spans.push(d.span);
            self.emit(VcCategory::MeasureNonNegative, f, d.span, spans);
        }
        self.calls(cond, &holds)?;

        let under = generic.then(
            Step::Assume(assume(invs, Some(cond.clone()))),
            [inv_spans.clone(), vec![cond.span]].concat(),
        );
        let mut inner_spans = under.spans.clone();
        traversed(std::slice::from_ref(body), &mut inner_spans);
        for inv in invs {
            let f = under.close(&self.scope, self.scope.wp(body, inv.clone())?)?;
            self.emit(VcCategory::InvariantPreserved, f, inv.span, inner_spans.clone());
        }
        if let Some(d) = &ann.decreases {
            let m = self.scope.fresh("m");
            let goal = Expr::binary(BinOp::Lt, d.clone(), Expr::var(&m));
            let at = under.then(Step::Let(false, vec![(m, d.clone())]), vec![d.span]);
            let f = at.close(&self.scope, self.scope.wp(body, goal)?)?;
            let mut spans = inner_spans.clone();
            spans.push(d.span);
            self.emit(VcCategory::MeasureDecreased, f, d.span, spans);
        }
        self.walk(std::slice::from_ref(body), &under)
    }

    /// Precondition conditions for every call inside `e`, each under the
    /// assumptions that guard its evaluation.
    fn calls(&mut self, e: &Expr, ctx: &Ctx) -> Result<()> {
        let assume_in = |a: Expr| ctx.then(Step::Assume(a), vec![]);
        match &e.kind {
            ExprKind::Call { name, args } => {
                for a in args {
                    self.calls(a, ctx)?;
                }
                let callee = self.scope.ops.get(name.name.as_str()).map(|d| &d.kind);
                let (params, requires) = match callee {
                    Some(
                        DeclKind::Pred { params, requires, .. }
                        | DeclKind::Fun { params, requires, .. }
                        | DeclKind::Theorem { params, requires, .. }
                        | DeclKind::Proc { params, requires, .. },
                    ) => (params, requires),
                    _ => return Ok(()),
                };
                if requires.iter().all(Expr::is_true) {
                    return Ok(());
                }
                let pre = Expr::conjunction(requires.iter().cloned());
                let bs = instantiate(params, args);
                let goal = if bs.is_empty() { pre } else { Expr::let_in(true, bs, pre) };
                let f = ctx.close(&self.scope, goal)?;
                self.emit(VcCategory::OpPrecondition, f, e.span, ctx.spans.clone());
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or | BinOp::Implies), l, r) => {
                self.calls(l, ctx)?;
                let guard = match op {
                    BinOp::Or => Expr::negation((**l).clone()),
                    _ => (**l).clone(),
                };
                self.calls(r, &assume_in(guard))?;
            }
            ExprKind::If { cond, then, els } => {
                self.calls(cond, ctx)?;
                self.calls(then, &assume_in((**cond).clone()))?;
                self.calls(els, &assume_in(Expr::negation((**cond).clone())))?;
            }
            ExprKind::Quant { binders, body, .. } => {
                let vs = binders.iter().map(|b| (b.name.name.clone(), b.ty.clone())).collect();
                self.calls(body, &ctx.then(Step::Forall(vs), vec![]))?;
            }
            ExprKind::Choose { binder, cond } => {
                let vs = vec![(binder.name.name.clone(), binder.ty.clone())];
                self.calls(cond, &ctx.then(Step::Forall(vs), vec![]))?;
            }
            ExprKind::Let {
                parallel,
                bindings,
                body,
            } => {
                let bs: Vec<(String, Expr)> = bindings
                    .iter()
                    .map(|b| (b.name.name.clone(), b.value.clone()))
                    .collect();
                for (i, b) in bindings.iter().enumerate() {
                    let at = if *parallel {
                        ctx.clone()
                    } else {
                        ctx.then(Step::Let(false, bs[..i].to_vec()), vec![])
                    };
                    self.calls(&b.value, &at)?;
                }
                self.calls(body, &ctx.then(Step::Let(*parallel, bs), vec![]))?;
            }
            _ => {
                for c in e.children() {
                    self.calls(c, ctx)?;
                }
            }
        }
        Ok(())
    }
}
