use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::error::RuntimeError;
use super::value::{Bindings, Value};
use super::{EvalMode, Event, Record};
use crate::sema::ir::*;
use crate::sema::{TypeDen, TypedSpec};
use crate::syntax::Span;

/// Abnormal end of one evaluation path.
#[derive(Debug)]
pub(crate) enum Halt {
    Error(RuntimeError),
    /// A prescribed choice index exceeds the number of satisfying values:
    /// the path does not exist.
    Dead,
}

impl From<RuntimeError> for Halt {
    fn from(e: RuntimeError) -> Self {
        Halt::Error(e)
    }
}

pub(crate) type R<T> = Result<T, Halt>;

/// Local variable storage of one operation activation.
pub(crate) struct Frame<'a> {
    pub vals: Vec<Option<Value>>,
    pub info: &'a [SlotInfo],
}

impl<'a> Frame<'a> {
    pub fn new(info: &'a [SlotInfo]) -> Self {
        Frame {
            vals: vec![None; info.len()],
            info,
        }
    }

    fn get(&self, s: Slot) -> Value {
        self.vals[s].clone().expect("slot bound before use")
    }

    /// All live bindings.
    pub fn snapshot(&self) -> Bindings {
        self.collect(|_| true)
    }

    /// Live program variables (parameters, locals and `result`).
    pub fn program_state(&self) -> Bindings {
        self.collect(|k| matches!(k, SlotKind::Param | SlotKind::Local | SlotKind::Result))
    }

    fn collect(&self, keep: impl Fn(SlotKind) -> bool) -> Bindings {
        self.vals
            .iter()
            .zip(self.info)
            .filter(|(_, i)| keep(i.kind))
            .filter_map(|(v, i)| v.as_ref().map(|v| (i.name.clone(), v.clone())))
            .collect()
    }
}

/// Result of invoking an operation on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Invoked {
    Value(Value),
    /// The precondition is false (only reported for top-level invocations).
    Inadmissible,
}

const MEMO_LIMIT: usize = 1 << 20;

/// The evaluator. One machine is used by one thread; it keeps a call memo
/// that is valid for the lifetime of its specification.
pub struct Machine<'s> {
    pub(crate) spec: &'s TypedSpec,
    mode: EvalMode,
    prescribed: Vec<u32>,
    trail: Vec<u32>,
    memo: HashMap<(OpId, Vec<Value>), Result<Value, RuntimeError>>,
    deadline: Option<(Instant, u64)>,
    steps: u64,
    record: Record,
    events: Vec<Event>,
    suppress: u32,
    pred_depth: u32,
}

impl<'s> Machine<'s> {
    pub fn new(spec: &'s TypedSpec, mode: EvalMode) -> Self {
        Machine {
            spec,
            mode,
            prescribed: Vec::new(),
            trail: Vec::new(),
            memo: HashMap::new(),
            deadline: None,
            steps: 0,
            record: Record::Off,
            events: Vec::new(),
            suppress: 0,
            pred_depth: 0,
        }
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// Starts a time budget of `millis` milliseconds (0 clears it).
    pub fn set_timeout(&mut self, millis: u64) {
        self.deadline =
            (millis > 0).then(|| (Instant::now() + Duration::from_millis(millis), millis));
    }

    pub fn set_record(&mut self, record: Record) {
        self.record = record;
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    fn begin_path(&mut self, prescription: Vec<u32>) {
        self.prescribed = prescription;
        self.trail.clear();
        self.suppress = 0;
        self.pred_depth = 0;
    }

    /// Executes one path and returns the prescription of the next one.
    pub(crate) fn step_paths<T>(
        &mut self,
        run: &mut dyn FnMut(&mut Machine<'s>) -> R<T>,
        next: &mut Option<Vec<u32>>,
    ) -> Option<Result<T, RuntimeError>> {
        loop {
            let p = next.take()?;
            self.begin_path(p);
            let r = run(self);
            let advance = |mut t: Vec<u32>| {
                let last = t.last_mut()?;
                *last += 1;
                Some(t)
            };
            match r {
                Ok(v) => {
                    if self.mode == EvalMode::Nondet {
                        *next = advance(std::mem::take(&mut self.trail));
                    }
                    return Some(Ok(v));
                }
                Err(Halt::Dead) => {
                    let mut t = std::mem::take(&mut self.trail);
                    t.pop();
                    *next = advance(t);
                }
                Err(Halt::Error(e)) => return Some(Err(e)),
            }
        }
    }

    fn next_choice(&mut self) -> u32 {
        if self.mode == EvalMode::Det {
            return 0;
        }
        let i = self.prescribed.get(self.trail.len()).copied().unwrap_or(0);
        self.trail.push(i);
        i
    }

    fn tick(&mut self) -> R<()> {
        self.steps = self.steps.wrapping_add(1);
        if self.steps & 0x3ff == 0 {
            if let Some((d, millis)) = self.deadline {
                if Instant::now() >= d {
                    return Err(RuntimeError::Timeout { millis }.into());
                }
            }
        }
        Ok(())
    }

    fn quiet<T>(&mut self, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.suppress += 1;
        let r = f(self)?;
        self.suppress -= 1;
        Ok(r)
    }

    fn emit(&mut self, e: Event) {
        self.events.push(e);
    }

    // ---------------------------------------------------------------- calls

    /// Invokes an operation. At top level a false precondition makes the
    /// input inadmissible; otherwise it is a `PreconditionViolation`.
    pub(crate) fn invoke(&mut self, id: OpId, args: &[Value], span: Span, top: bool) -> R<Invoked> {
        let spec = self.spec;
        let op = &spec.ops[id];
        let mut f = Frame::new(&op.slots);
        for (p, a) in op.params.iter().zip(args) {
            if !p.den.contains(a) {
                return Err(RuntimeError::RangeViolation {
                    span,
                    value: a.clone(),
                    expected: p.den.to_string(),
                    env: vec![(p.name.clone(), a.clone())],
                }
                .into());
            }
            f.vals[p.slot] = Some(a.clone());
        }
        for r in &op.requires {
            if !self.quiet(|m| m.eval(r, &mut f))?.as_bool() {
                if top {
                    return Ok(Invoked::Inadmissible);
                }
                return Err(RuntimeError::PreconditionViolation {
                    span,
                    operation: op.name.clone(),
                    env: f.snapshot(),
                }
                .into());
            }
        }
        let (value, vspan) = match &op.body {
            OpBody::Expr(b) => (self.eval(b, &mut f)?, b.span),
            OpBody::Proc { body, clear, ret } => {
                for c in body {
                    self.exec(c, &mut f)?;
                }
                let v = self.eval(ret, &mut f)?;
                for s in clear {
                    f.vals[*s] = None;
                }
                (v, ret.span)
            }
        };
        if let Some(den) = &op.result {
            if !den.contains(&value) {
                return Err(RuntimeError::RangeViolation {
                    span: vspan,
                    value,
                    expected: den.to_string(),
                    env: f.snapshot(),
                }
                .into());
            }
        }
        if let Some(rs) = op.result_slot {
            f.vals[rs] = Some(value.clone());
            for e in &op.ensures {
                if !self.quiet(|m| m.eval(e, &mut f))?.as_bool() {
                    return Err(RuntimeError::PostconditionViolation {
                        span: e.span,
                        operation: op.name.clone(),
                        env: f.snapshot(),
                    }
                    .into());
                }
            }
        }
        Ok(Invoked::Value(value))
    }

    fn call(&mut self, id: OpId, args: Vec<Value>, span: Span) -> R<Value> {
        self.tick()?;
        let spec = self.spec;
        let op = &spec.ops[id];
        let memo = self.record == Record::Off && (self.mode == EvalMode::Det || op.deterministic);
        let key = (id, args);
        if memo {
            if let Some(r) = self.memo.get(&key) {
                return r.clone().map_err(Halt::Error);
            }
        }
        let args = &key.1;
        let active = self.suppress == 0;
        let arg_bindings = || -> Bindings {
            op.params
                .iter()
                .zip(args)
                .map(|(p, a)| (p.name.clone(), a.clone()))
                .collect()
        };
        let r = match self.record {
            Record::Trace if active => {
                self.emit(Event::CallBegin {
                    operation: op.name.clone(),
                    args: arg_bindings(),
                });
                let r = if op.kind == OpKind::Proc {
                    self.invoke_value(id, args, span)
                } else {
                    let r = self.quiet(|m| m.invoke_value(id, args, span));
                    if let Ok(v) = &r {
                        let mut state = arg_bindings();
                        state.push(("result".into(), v.clone()));
                        self.emit(Event::State(state));
                    }
                    r
                };
                self.emit(Event::CallEnd {
                    result: r.as_ref().ok().cloned(),
                });
                r
            }
            Record::Tree if active && op.kind.is_boolean() => {
                self.emit(Event::PredArgs(arg_bindings()));
                if self.pred_depth >= 1 {
                    self.quiet(|m| m.invoke_value(id, args, span))
                } else {
                    self.pred_depth += 1;
                    let r = self.invoke_value(id, args, span)?;
                    self.pred_depth -= 1;
                    Ok(r)
                }
            }
            _ => self.invoke_value(id, args, span),
        };
        if memo {
            match &r {
                Ok(v) => {
                    self.remember(key, Ok(v.clone()));
                }
                Err(Halt::Error(e)) if !matches!(e, RuntimeError::Timeout { .. }) => {
                    self.remember(key, Err(e.clone()));
                }
                _ => {}
            }
        }
        r
    }

    fn remember(&mut self, key: (OpId, Vec<Value>), r: Result<Value, RuntimeError>) {
        if self.memo.len() >= MEMO_LIMIT {
            self.memo.clear();
        }
        self.memo.insert(key, r);
    }

    fn invoke_value(&mut self, id: OpId, args: &[Value], span: Span) -> R<Value> {
        match self.invoke(id, args, span, false)? {
            Invoked::Value(v) => Ok(v),
            Invoked::Inadmissible => unreachable!("only top-level invocations are inadmissible"),
        }
    }

    // ----------------------------------------------------------- expressions

    pub(crate) fn eval(&mut self, e: &IrExpr, f: &mut Frame) -> R<Value> {
        if self.record != Record::Tree || self.suppress > 0 {
            return self.eval_inner(e, f);
        }
        let Some(info) = &e.formula else {
            return self.quiet(|m| m.eval_inner(e, f));
        };
        let bindings = info
            .visible
            .iter()
            .filter_map(|&s| f.vals[s].as_ref().map(|v| (f.info[s].name.clone(), v.clone())))
            .collect();
        self.emit(Event::FormulaBegin {
            label: info.label.clone(),
            text: info.text.clone(),
            bindings,
        });
        let v = if info.label == NodeLabel::Atom {
            self.quiet(|m| m.eval_inner(e, f))?
        } else {
            self.eval_inner(e, f)?
        };
        self.emit(Event::FormulaEnd(v.as_bool()));
        Ok(v)
    }

    fn overflow(e: &IrExpr, f: &Frame) -> Halt {
        RuntimeError::ArithmeticOverflow {
            span: e.span,
            env: f.snapshot(),
        }
        .into()
    }

    fn eval_inner(&mut self, e: &IrExpr, f: &mut Frame) -> R<Value> {
        Ok(match &e.kind {
            IrKind::Const(v) => v.clone(),
            IrKind::Local(s) => f.get(*s),
            IrKind::Not(x) => Value::Bool(!self.eval(x, f)?.as_bool()),
            IrKind::Neg(x) => {
                let n = self.eval(x, f)?.as_int();
                Value::Int(n.checked_neg().ok_or_else(|| Self::overflow(e, f))?)
            }
            IrKind::Arith(op, l, r) => {
                let a = self.eval(l, f)?.as_int();
                let b = self.eval(r, f)?.as_int();
                if matches!(op, ArithOp::Div | ArithOp::Mod) && b == 0 {
                    return Err(RuntimeError::RangeViolation {
                        span: r.span,
                        value: Value::Int(0),
                        expected: "nonzero divisor".into(),
                        env: f.snapshot(),
                    }
                    .into());
                }
                let v = match op {
                    ArithOp::Add => a.checked_add(b),
                    ArithOp::Sub => a.checked_sub(b),
                    ArithOp::Mul => a.checked_mul(b),
                    ArithOp::Div => a.checked_div(b),
                    ArithOp::Mod => a.checked_rem(b),
                };
                Value::Int(v.ok_or_else(|| Self::overflow(e, f))?)
            }
            IrKind::Compare(op, l, r) => {
                let a = self.eval(l, f)?.as_int();
                let b = self.eval(r, f)?.as_int();
                Value::Bool(match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                })
            }
            IrKind::Eq(l, r) => {
                let a = self.eval(l, f)?;
                Value::Bool(a == self.eval(r, f)?)
            }
            IrKind::Neq(l, r) => {
                let a = self.eval(l, f)?;
                Value::Bool(a != self.eval(r, f)?)
            }
            IrKind::Member(l, r) => {
                let x = self.eval(l, f)?;
                let s = self.eval(r, f)?;
                Value::Bool(s.elements().binary_search(&x).is_ok())
            }
            IrKind::Logic(op, l, r) => {
                let a = self.eval(l, f)?.as_bool();
                Value::Bool(match op {
                    LogicOp::And => a && self.eval(r, f)?.as_bool(),
                    LogicOp::Or => a || self.eval(r, f)?.as_bool(),
                    LogicOp::Implies => !a || self.eval(r, f)?.as_bool(),
                    LogicOp::Iff => a == self.eval(r, f)?.as_bool(),
                })
            }
            IrKind::Quant {
                forall,
                binders,
                body,
            } => Value::Bool(self.quant(*forall, binders, body, f)?),
            IrKind::Choose { binder, cond } => {
                let want = self.next_choice();
                let mut seen = 0;
                for k in 0..binder.size {
                    self.tick()?;
                    let v = binder.den.nth(k);
                    f.vals[binder.slot] = Some(v.clone());
                    if self.eval(cond, f)?.as_bool() {
                        if seen == want {
                            f.vals[binder.slot] = None;
                            return Ok(v);
                        }
                        seen += 1;
                    }
                }
                f.vals[binder.slot] = None;
                if want > 0 {
                    return Err(Halt::Dead);
                }
                return Err(RuntimeError::ChooseFailure {
                    span: e.span,
                    env: f.snapshot(),
                }
                .into());
            }
            IrKind::Let {
                parallel,
                bindings,
                body,
            } => {
                if *parallel {
                    let mut vals = Vec::with_capacity(bindings.len());
                    for (_, x) in bindings {
                        vals.push(self.eval(x, f)?);
                    }
                    for ((s, _), v) in bindings.iter().zip(vals) {
                        f.vals[*s] = Some(v);
                    }
                } else {
                    for (s, x) in bindings {
                        let v = self.eval(x, f)?;
                        f.vals[*s] = Some(v);
                    }
                }
                let v = self.eval(body, f)?;
                for (s, _) in bindings {
                    f.vals[*s] = None;
                }
                v
            }
            IrKind::If(c, t, x) => {
                if self.eval(c, f)?.as_bool() {
                    self.eval(t, f)?
                } else {
                    self.eval(x, f)?
                }
            }
            IrKind::Call { op, args } => {
                let mut vals = Vec::with_capacity(args.len());
                let quiet_args = self.record == Record::Tree;
                if quiet_args {
                    self.suppress += 1;
                }
                for a in args {
                    vals.push(self.eval(a, f)?);
                }
                if quiet_args {
                    self.suppress -= 1;
                }
                self.call(*op, vals, e.span)?
            }
            IrKind::Index(a, i) => {
                let arr = self.eval(a, f)?;
                let i = self.eval(i, f)?.as_int();
                let items = arr.elements();
                let k = check_index(i, items.len(), e.span, f)?;
                items[k].clone()
            }
            IrKind::Proj(t, k) => self.eval(t, f)?.elements()[*k].clone(),
            IrKind::With(a, i, v) => {
                let arr = self.eval(a, f)?;
                let i = self.eval(i, f)?.as_int();
                let v = self.eval(v, f)?;
                let mut items = arr.elements().to_vec();
                let k = check_index(i, items.len(), e.span, f)?;
                items[k] = v;
                Value::Array(items.into())
            }
            IrKind::SetLit(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for x in items {
                    vals.push(self.eval(x, f)?);
                }
                Value::set_from(vals)
            }
            IrKind::TupleLit(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for x in items {
                    vals.push(self.eval(x, f)?);
                }
                Value::Tuple(vals.into())
            }
            IrKind::ArrayInit { len, value } => {
                let v = self.eval(value, f)?;
                Value::Array(vec![v; *len].into())
            }
        })
    }

    fn quant(&mut self, forall: bool, binders: &[QuantBinder], body: &IrExpr, f: &mut Frame) -> R<bool> {
        let Some((b, rest)) = binders.split_first() else {
            return Ok(self.eval(body, f)?.as_bool());
        };
        for k in 0..b.size {
            self.tick()?;
            f.vals[b.slot] = Some(b.den.nth(k));
            if self.quant(forall, rest, body, f)? != forall {
                f.vals[b.slot] = None;
                return Ok(!forall);
            }
        }
        f.vals[b.slot] = None;
        Ok(forall)
    }

    // -------------------------------------------------------------- commands

    fn state_step(&mut self, f: &Frame) {
        if self.record == Record::Trace && self.suppress == 0 {
            self.emit(Event::State(f.program_state()));
        }
    }

    pub(crate) fn exec(&mut self, c: &IrCmd, f: &mut Frame) -> R<()> {
        match c {
            IrCmd::Var { slot, den, init, span } => {
                let v = self.eval(init, f)?;
                range_check(den, &v, *span, f)?;
                f.vals[*slot] = Some(v);
                self.state_step(f);
            }
            IrCmd::Assign {
                slot,
                den,
                indices,
                value,
                span,
            } => {
                let mut idx = Vec::with_capacity(indices.len());
                for i in indices {
                    idx.push(self.eval(i, f)?.as_int());
                }
                let v = self.eval(value, f)?;
                let mut elem = den;
                for _ in &idx {
                    let TypeDen::Array { elem: e, .. } = elem else {
                        unreachable!("checked by sema")
                    };
                    elem = e;
                }
                range_check(elem, &v, *span, f)?;
                let new = update(&f.get(*slot), &idx, v, *span, f)?;
                f.vals[*slot] = Some(new);
                self.state_step(f);
            }
            IrCmd::If { cond, then, els } => {
                if self.eval(cond, f)?.as_bool() {
                    self.exec(then, f)?;
                } else if let Some(e) = els {
                    self.exec(e, f)?;
                }
            }
            IrCmd::While {
                cond,
                invariants,
                decreases,
                body,
                snapshots,
                ..
            } => {
                for (src, snap) in snapshots {
                    f.vals[*snap] = f.vals[*src].clone();
                }
                let mut iteration = 0u64;
                loop {
                    self.tick()?;
                    self.suppress += 1;
                    for (index, inv) in invariants.iter().enumerate() {
                        if !self.eval(inv, f)?.as_bool() {
                            return Err(RuntimeError::InvariantViolation {
                                span: inv.span,
                                index,
                                iteration,
                                env: f.snapshot(),
                            }
                            .into());
                        }
                    }
                    let before = match decreases {
                        Some(d) => {
                            let m = self.eval(d, f)?.as_int();
                            if m < 0 {
                                return Err(RuntimeError::MeasureNegative {
                                    span: d.span,
                                    value: m,
                                    env: f.snapshot(),
                                }
                                .into());
                            }
                            Some(m)
                        }
                        None => None,
                    };
                    self.suppress -= 1;
                    if !self.eval(cond, f)?.as_bool() {
                        break;
                    }
                    self.exec(body, f)?;
                    if let (Some(d), Some(before)) = (decreases, before) {
                        let after = self.quiet(|m| m.eval(d, f))?.as_int();
                        if after >= before {
                            return Err(RuntimeError::MeasureNotDecreased {
                                span: d.span,
                                before,
                                after,
                                env: f.snapshot(),
                            }
                            .into());
                        }
                    }
                    iteration += 1;
                }
                for (_, snap) in snapshots {
                    f.vals[*snap] = None;
                }
            }
            IrCmd::Block { body, clear } => {
                for c in body {
                    self.exec(c, f)?;
                }
                for s in clear {
                    f.vals[*s] = None;
                }
            }
            IrCmd::Assert(e) => {
                if !self.quiet(|m| m.eval(e, f))?.as_bool() {
                    return Err(RuntimeError::AssertionViolation {
                        span: e.span,
                        env: f.snapshot(),
                    }
                    .into());
                }
            }
            IrCmd::Call(e) => {
                self.eval(e, f)?;
            }
        }
        Ok(())
    }
}

fn check_index(i: i64, len: usize, span: Span, f: &Frame) -> R<usize> {
    if i < 0 || i as u64 >= len as u64 {
        return Err(RuntimeError::RangeViolation {
            span,
            value: Value::Int(i),
            expected: if len == 0 {
                "the indices of an empty array".into()
            } else {
                format!("ℤ[0,{}]", len - 1)
            },
            env: f.snapshot(),
        }
        .into());
    }
    Ok(i as usize)
}

fn range_check(den: &TypeDen, v: &Value, span: Span, f: &Frame) -> R<()> {
    if den.contains(v) {
        Ok(())
    } else {
        Err(RuntimeError::RangeViolation {
            span,
            value: v.clone(),
            expected: den.to_string(),
            env: f.snapshot(),
        }
        .into())
    }
}

fn update(base: &Value, idx: &[i64], v: Value, span: Span, f: &Frame) -> R<Value> {
    let Some((&i, rest)) = idx.split_first() else {
        return Ok(v);
    };
    let mut items = base.elements().to_vec();
    let k = check_index(i, items.len(), span, f)?;
    items[k] = update(&items[k], rest, v, span, f)?;
    Ok(Value::Array(items.into()))
}
