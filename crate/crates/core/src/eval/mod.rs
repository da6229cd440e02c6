//! Evaluation of formulas and execution of procedure bodies.
//!
//! A nondeterministic computation is explored by replay: every run of the
//! machine follows a prescribed sequence of choice indices (one per `choose`
//! reached), and the prescriptions are enumerated depth-first. Deterministic
//! mode always takes the first satisfying value, so its single outcome is
//! the first outcome of nondeterministic mode.

mod error;
pub(crate) mod machine;
mod value;

use std::sync::Arc;

pub use error::RuntimeError;
pub use machine::Machine;
pub use value::{format_bindings, Bindings, Value};

use machine::{Frame, Halt, R};
use serde::{Deserialize, Serialize};

use crate::sema::ir::{IrCmd, IrExpr, NodeLabel, SlotInfo};
use crate::sema::{FreeVar, SemaError, Ty, TypeDen, TypedSpec};
use crate::syntax::ast::{Binder, Command, Expr, ExprKind};
use crate::syntax::Span;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// One outcome: every `choose` takes its first satisfying value.
    #[default]
    Det,
    /// All outcomes, lazily.
    Nondet,
}

/// Which events the machine records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Record {
    #[default]
    Off,
    /// State changes and calls of a procedure run.
    Trace,
    /// Sub-formula evaluations.
    Tree,
}

/// Evaluation event, consumed by the visualization builders.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    /// Program state after an assignment or declaration.
    State(Bindings),
    CallBegin { operation: String, args: Bindings },
    CallEnd { result: Option<Value> },
    FormulaBegin {
        label: NodeLabel,
        text: String,
        bindings: Bindings,
    },
    /// Arguments of the predicate call whose node was just begun.
    PredArgs(Bindings),
    FormulaEnd(bool),
}

#[derive(Clone, Debug)]
struct EnvEntry {
    name: String,
    value: Value,
    den: Option<TypeDen>,
}

/// Variable bindings, optionally nested in an enclosing environment.
#[derive(Clone, Debug, Default)]
pub struct Env {
    entries: Vec<EnvEntry>,
    parent: Option<Arc<Env>>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn child(parent: Arc<Env>) -> Self {
        Env {
            entries: Vec::new(),
            parent: Some(parent),
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) -> &mut Self {
        self.entries.push(EnvEntry {
            name: name.into(),
            value,
            den: None,
        });
        self
    }

    /// Binds a variable with a declared type, making it assignable.
    pub fn bind_typed(&mut self, name: impl Into<String>, den: TypeDen, value: Value) -> &mut Self {
        self.entries.push(EnvEntry {
            name: name.into(),
            value,
            den: Some(den),
        });
        self
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        match self.entries.iter().rev().find(|e| e.name == name) {
            Some(e) => Some(&e.value),
            None => self.parent.as_ref()?.lookup(name),
        }
    }

    /// Visible bindings, outermost first; inner bindings hide outer ones.
    fn flatten(&self) -> Vec<EnvEntry> {
        let mut out = self.parent.as_ref().map(|p| p.flatten()).unwrap_or_default();
        for e in &self.entries {
            match out.iter_mut().find(|o| o.name == e.name) {
                Some(o) => *o = e.clone(),
                None => out.push(e.clone()),
            }
        }
        out
    }

    pub fn bindings(&self) -> Bindings {
        self.flatten().into_iter().map(|e| (e.name, e.value)).collect()
    }

    fn free_vars(&self) -> Result<(Vec<FreeVar>, Vec<EnvEntry>), SemaError> {
        let entries = self.flatten();
        let mut vars = Vec::new();
        for e in &entries {
            let ty = match &e.den {
                Some(d) => d.ty(),
                None => ty_of(&e.value).ok_or_else(|| SemaError::Type {
                    span: Span::default(),
                    message: format!("cannot infer the type of `{}`", e.name),
                })?,
            };
            vars.push(FreeVar {
                name: e.name.clone(),
                ty,
                den: e.den.clone(),
            });
        }
        Ok((vars, entries))
    }
}

fn ty_of(v: &Value) -> Option<Ty> {
    Some(match v {
        Value::Int(_) => Ty::Int,
        Value::Bool(_) => Ty::Bool,
        Value::Array(items) => Ty::Array(items.len(), Box::new(ty_of(items.first()?)?)),
        Value::Set(items) => Ty::Set(Box::new(ty_of(items.first()?)?)),
        Value::Tuple(items) => Ty::Tuple(items.iter().map(ty_of).collect::<Option<_>>()?),
    })
}

type Run<'s, T> = Box<dyn FnMut(&mut Machine<'s>) -> R<T> + 's>;

/// Lazy stream of the outcomes of a computation. In Det mode it yields one
/// element; in Nondet mode one element per choice path. An error ends the
/// stream.
pub struct OutcomeStream<'s, T> {
    machine: Machine<'s>,
    run: Run<'s, T>,
    next: Option<Vec<u32>>,
}

impl<'s, T> OutcomeStream<'s, T> {
    fn new(machine: Machine<'s>, run: Run<'s, T>) -> Self {
        OutcomeStream {
            machine,
            run,
            next: Some(Vec::new()),
        }
    }
}

impl<T> Iterator for OutcomeStream<'_, T> {
    type Item = Result<T, RuntimeError>;

    fn next(&mut self) -> Option<Self::Item> {
        let r = self.machine.step_paths(&mut *self.run, &mut self.next);
        if matches!(r, Some(Err(_))) {
            self.next = None;
        }
        r
    }
}

fn start_frame<'a>(slots: &'a [SlotInfo], entries: &[EnvEntry]) -> Frame<'a> {
    let mut f = Frame::new(slots);
    for (i, e) in entries.iter().enumerate() {
        f.vals[i] = Some(e.value.clone());
    }
    f
}

/// Evaluates `e` with its free variables taken from `env`.
pub fn eval_expr<'s>(
    spec: &'s TypedSpec,
    e: &Expr,
    env: &Env,
    mode: EvalMode,
) -> Result<OutcomeStream<'s, Value>, SemaError> {
    let (vars, entries) = env.free_vars()?;
    let (ir, slots): (IrExpr, Vec<SlotInfo>) = spec.compile_expr(e, &vars)?;
    let run = move |m: &mut Machine<'s>| {
        let mut f = start_frame(&slots, &entries);
        m.eval(&ir, &mut f)
    };
    Ok(OutcomeStream::new(Machine::new(spec, mode), Box::new(run)))
}

/// Evaluates `choose var:T with cond`.
pub fn eval_choose<'s>(
    spec: &'s TypedSpec,
    binder: &Binder,
    cond: &Expr,
    env: &Env,
    mode: EvalMode,
) -> Result<OutcomeStream<'s, Value>, SemaError> {
    let e = Expr::new(ExprKind::Choose {
        binder: binder.clone(),
        cond: Box::new(cond.clone()),
    });
    eval_expr(spec, &e, env, mode)
}

/// Executes `c`; each outcome is the final environment. Variables bound
/// with [`Env::bind_typed`] may be assigned.
pub fn exec_command<'s>(
    spec: &'s TypedSpec,
    c: &Command,
    env: &Env,
    mode: EvalMode,
) -> Result<OutcomeStream<'s, Env>, SemaError> {
    let (vars, entries) = env.free_vars()?;
    let (ir, slots): (IrCmd, Vec<SlotInfo>) = spec.compile_command(c, &vars)?;
    let run = move |m: &mut Machine<'s>| -> R<Env> {
        let mut f = start_frame(&slots, &entries);
        m.exec(&ir, &mut f)?;
        let mut out = Env::new();
        for (i, e) in entries.iter().enumerate() {
            out.entries.push(EnvEntry {
                name: e.name.clone(),
                value: f.vals[i].clone().expect("bound"),
                den: e.den.clone(),
            });
        }
        Ok(out)
    };
    Ok(OutcomeStream::new(Machine::new(spec, mode), Box::new(run)))
}

/// Applies the named operation to `args`, checking its contract.
pub fn call_operation<'s>(
    spec: &'s TypedSpec,
    name: &str,
    args: &[Value],
    mode: EvalMode,
) -> Result<OutcomeStream<'s, Value>, SemaError> {
    let id = spec.op_id(name).ok_or_else(|| SemaError::Undeclared {
        span: Span::default(),
        name: name.to_string(),
    })?;
    let op = &spec.ops[id];
    if op.params.len() != args.len() {
        return Err(SemaError::Type {
            span: op.span,
            message: format!(
                "`{name}` expects {} argument(s), found {}",
                op.params.len(),
                args.len()
            ),
        });
    }
    let args = args.to_vec();
    let span = op.span;
    let run = move |m: &mut Machine<'s>| match m.invoke(id, &args, span, false)? {
        machine::Invoked::Value(v) => Ok(v),
        machine::Invoked::Inadmissible => Err(Halt::Dead),
    };
    Ok(OutcomeStream::new(Machine::new(spec, mode), Box::new(run)))
}
