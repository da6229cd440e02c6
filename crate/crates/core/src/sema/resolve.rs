use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::ir::*;
use super::types::{Ty, TypeDen};
use super::SemaError;
use crate::eval::Value;
use crate::syntax::ast::*;
use crate::syntax::{print_expr_bare, Span};

type Result<T> = std::result::Result<T, SemaError>;

/// Value supplied for a `val` declaration from outside the specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstBinding {
    pub name: String,
    pub value: i64,
}

impl ConstBinding {
    pub fn new(name: impl Into<String>, value: i64) -> Self {
        ConstBinding {
            name: name.into(),
            value,
        }
    }
}

/// A variable supplied by the caller when compiling a standalone expression
/// or command.
#[derive(Clone, Debug)]
pub struct FreeVar {
    pub name: String,
    pub ty: Ty,
    /// Declared carrier; required for variables that are assigned.
    pub den: Option<TypeDen>,
}

/// A specification with all constants bound, all types denoted and all
/// operations type-checked and compiled.
#[derive(Clone, Debug)]
pub struct TypedSpec {
    pub spec: Spec,
    pub bindings: Vec<ConstBinding>,
    pub constants: Vec<(String, Value)>,
    pub types: Vec<(String, TypeDen)>,
    pub ops: Vec<Operation>,
    const_index: HashMap<String, usize>,
    type_index: HashMap<String, usize>,
    op_index: HashMap<String, OpId>,
}

pub fn resolve(spec: &Spec, consts: &[ConstBinding]) -> Result<TypedSpec> {
    let mut ts = TypedSpec {
        spec: spec.clone(),
        bindings: consts.to_vec(),
        constants: Vec::new(),
        types: Vec::new(),
        ops: Vec::new(),
        const_index: HashMap::new(),
        type_index: HashMap::new(),
        op_index: HashMap::new(),
    };

    let vals: HashSet<&str> = spec
        .decls
        .iter()
        .filter(|d| matches!(d.kind, DeclKind::Val { .. }))
        .map(|d| d.kind.name().name.as_str())
        .collect();
    let mut given: HashMap<&str, i64> = HashMap::new();
    for b in consts {
        if !vals.contains(b.name.as_str()) {
            return Err(SemaError::UnknownConstant {
                name: b.name.clone(),
            });
        }
        if given.insert(b.name.as_str(), b.value).is_some() {
            return Err(SemaError::ConstantAlreadyDefined {
                name: b.name.clone(),
            });
        }
    }

    let mut names = HashSet::new();
    for d in &spec.decls {
        let name = d.kind.name();
        if !names.insert(name.name.clone()) {
            return Err(SemaError::Duplicate {
                span: name.span,
                name: name.name.clone(),
            });
        }
        match &d.kind {
            DeclKind::Val { name, ty, value } => {
                let n = match (given.get(name.name.as_str()), value) {
                    (Some(_), Some(_)) => {
                        return Err(SemaError::ConstantAlreadyDefined {
                            name: name.name.clone(),
                        })
                    }
                    (Some(v), None) => *v,
                    (None, Some(e)) => ts.const_int(e)?,
                    (None, None) => {
                        return Err(SemaError::UnboundConstant {
                            span: name.span,
                            name: name.name.clone(),
                        })
                    }
                };
                if let Some(t) = ty {
                    ts.check_const_type(&name.name, n, t)?;
                }
                ts.const_index.insert(name.name.clone(), ts.constants.len());
                ts.constants.push((name.name.clone(), Value::Int(n)));
            }
            DeclKind::Type { name, ty } => {
                let den = ts.resolve_type(ty)?;
                ts.type_index.insert(name.name.clone(), ts.types.len());
                ts.types.push((name.name.clone(), den));
            }
            _ => {
                let op = Compiler::new(&ts).operation(d)?;
                ts.op_index.insert(op.name.clone(), ts.ops.len());
                ts.ops.push(op);
            }
        }
    }
    Ok(ts)
}

impl TypedSpec {
    pub fn op_id(&self, name: &str) -> Option<OpId> {
        self.op_index.get(name).copied()
    }

    pub fn op(&self, name: &str) -> Option<&Operation> {
        self.op_id(name).map(|id| &self.ops[id])
    }

    pub fn constant(&self, name: &str) -> Option<&Value> {
        self.const_index.get(name).map(|&i| &self.constants[i].1)
    }

    pub fn type_den(&self, name: &str) -> Option<&TypeDen> {
        self.type_index.get(name).map(|&i| &self.types[i].1)
    }

    /// Evaluates a type expression to its denotation under the bound constants.
    pub fn resolve_type(&self, t: &TypeExpr) -> Result<TypeDen> {
        match &t.kind {
            TypeExprKind::Named(n) => self.type_den(n).cloned().ok_or(SemaError::Undeclared {
                span: t.span,
                name: n.clone(),
            }),
            TypeExprKind::Bool => Ok(TypeDen::Bool),
            TypeExprKind::Nat | TypeExprKind::Int => Err(SemaError::Type {
                span: t.span,
                message: "unbounded integer types are only allowed for constants".into(),
            }),
            TypeExprKind::NatUpTo(hi) => {
                let hi = self.const_int(hi)?;
                interval(t.span, 0, hi)
            }
            TypeExprKind::Range(lo, hi) => {
                let lo = self.const_int(lo)?;
                let hi = self.const_int(hi)?;
                interval(t.span, lo, hi)
            }
            TypeExprKind::Array(n, elem) => {
                let len = self.const_int(n)?;
                let len = usize::try_from(len).map_err(|_| SemaError::Type {
                    span: n.span,
                    message: format!("array length {len} is negative"),
                })?;
                Ok(TypeDen::Array {
                    len,
                    elem: Box::new(self.resolve_type(elem)?),
                })
            }
            TypeExprKind::Set(elem) => Ok(TypeDen::Set(Box::new(self.resolve_type(elem)?))),
            TypeExprKind::Tuple(ts) => Ok(TypeDen::Tuple(
                ts.iter().map(|t| self.resolve_type(t)).collect::<Result<_>>()?,
            )),
        }
    }

    /// Resolves a type that is enumerated (parameter or bound variable) and
    /// checks that its carrier size is representable.
    pub fn resolve_carrier(&self, t: &TypeExpr) -> Result<(TypeDen, u64)> {
        let den = self.resolve_type(t)?;
        let size = den.size().map_err(|_| SemaError::Overflow {
            span: t.span,
            what: den.to_string(),
        })?;
        Ok((den, size))
    }

    fn const_int(&self, e: &Expr) -> Result<i64> {
        let overflow = || SemaError::Type {
            span: e.span,
            message: "arithmetic overflow in constant expression".into(),
        };
        match &e.kind {
            ExprKind::Int(n) => Ok(*n),
            ExprKind::Var(name) => match self.constant(name) {
                Some(Value::Int(n)) => Ok(*n),
                _ => Err(SemaError::Undeclared {
                    span: e.span,
                    name: name.clone(),
                }),
            },
            ExprKind::Unary(UnOp::Neg, x) => self.const_int(x)?.checked_neg().ok_or_else(overflow),
            ExprKind::Binary(op, l, r) => {
                let (a, b) = (self.const_int(l)?, self.const_int(r)?);
                let v = match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    BinOp::Mul => a.checked_mul(b),
                    BinOp::Div | BinOp::Mod if b == 0 => {
                        return Err(SemaError::Type {
                            span: e.span,
                            message: "division by zero in constant expression".into(),
                        })
                    }
                    BinOp::Div => a.checked_div(b),
                    BinOp::Mod => a.checked_rem(b),
                    _ => return Err(not_constant(e.span)),
                };
                v.ok_or_else(overflow)
            }
            _ => Err(not_constant(e.span)),
        }
    }

    fn check_const_type(&self, name: &str, n: i64, t: &TypeExpr) -> Result<()> {
        let ok = match &t.kind {
            TypeExprKind::Int => true,
            TypeExprKind::Nat => n >= 0,
            TypeExprKind::Bool | TypeExprKind::Array(..) | TypeExprKind::Set(_) | TypeExprKind::Tuple(_) => {
                return Err(SemaError::Type {
                    span: t.span,
                    message: format!("constant `{name}` must have an integer type"),
                })
            }
            _ => self.resolve_type(t)?.contains(&Value::Int(n)),
        };
        if ok {
            Ok(())
        } else {
            Err(SemaError::Type {
                span: t.span,
                message: format!("value {n} of constant `{name}` is outside its type"),
            })
        }
    }

    /// Compiles an expression whose free variables are `free`; variable `i`
    /// occupies slot `i` of the resulting frame layout.
    pub fn compile_expr(&self, e: &Expr, free: &[FreeVar]) -> Result<(IrExpr, Vec<SlotInfo>)> {
        let mut c = Compiler::new(self);
        c.declare_free(free)?;
        c.calls_allowed = true;
        let ir = c.expr(e)?;
        Ok((ir, c.slots))
    }

    /// Compiles a command over the variables `free` (see [`TypedSpec::compile_expr`]).
    pub fn compile_command(&self, cmd: &Command, free: &[FreeVar]) -> Result<(IrCmd, Vec<SlotInfo>)> {
        let mut c = Compiler::new(self);
        c.declare_free(free)?;
        let ir = c.command(cmd)?;
        Ok((ir, c.slots))
    }
}

fn interval(span: Span, lo: i64, hi: i64) -> Result<TypeDen> {
    if lo > hi {
        Err(SemaError::EmptyInterval { span, lo, hi })
    } else {
        Ok(TypeDen::Int { lo, hi })
    }
}

fn not_constant(span: Span) -> SemaError {
    SemaError::Type {
        span,
        message: "expected a constant integer expression".into(),
    }
}

fn mismatch(span: Span, expected: &Ty, found: &Ty) -> SemaError {
    SemaError::Type {
        span,
        message: format!("expected {expected}, found {found}"),
    }
}

fn expect(e: &IrExpr, ty: &Ty) -> Result<()> {
    if &e.ty == ty {
        Ok(())
    } else {
        Err(mismatch(e.span, ty, &e.ty))
    }
}

enum Found {
    Slot(Slot),
    Const(Value),
}

struct Compiler<'a> {
    spec: &'a TypedSpec,
    slots: Vec<SlotInfo>,
    slot_tys: Vec<Ty>,
    slot_dens: Vec<Option<TypeDen>>,
    scopes: Vec<Vec<(String, Slot)>>,
    program_vars: HashSet<String>,
    declared_order: Vec<String>,
    deterministic: bool,
    /// Whether the expression about to be compiled may be a procedure call.
    calls_allowed: bool,
}

impl<'a> Compiler<'a> {
    fn new(spec: &'a TypedSpec) -> Self {
        Compiler {
            spec,
            slots: Vec::new(),
            slot_tys: Vec::new(),
            slot_dens: Vec::new(),
            scopes: vec![Vec::new()],
            program_vars: HashSet::new(),
            declared_order: Vec::new(),
            deterministic: true,
            calls_allowed: false,
        }
    }

    fn declare_free(&mut self, free: &[FreeVar]) -> Result<()> {
        for v in free {
            let kind = if v.den.is_some() {
                SlotKind::Local
            } else {
                SlotKind::Param
            };
            self.declare_program(&Ident::new(&v.name), v.ty.clone(), v.den.clone(), kind)?;
        }
        Ok(())
    }

    fn new_slot(&mut self, name: &str, kind: SlotKind, ty: Ty, den: Option<TypeDen>) -> Slot {
        let slot = self.slots.len();
        self.slots.push(SlotInfo {
            name: name.to_string(),
            kind,
        });
        self.slot_tys.push(ty);
        self.slot_dens.push(den);
        self.scopes.last_mut().expect("scope").push((name.to_string(), slot));
        slot
    }

    fn check_not_constant(&self, name: &Ident) -> Result<()> {
        if self.spec.constant(&name.name).is_some() {
            Err(SemaError::Duplicate {
                span: name.span,
                name: name.name.clone(),
            })
        } else {
            Ok(())
        }
    }

    fn declare_program(&mut self, name: &Ident, ty: Ty, den: Option<TypeDen>, kind: SlotKind) -> Result<Slot> {
        self.check_not_constant(name)?;
        if name.name.starts_with("old_") {
            return Err(SemaError::Type {
                span: name.span,
                message: format!("the prefix `old_` is reserved (`{}`)", name.name),
            });
        }
        if !self.program_vars.insert(name.name.clone()) {
            return Err(SemaError::Duplicate {
                span: name.span,
                name: name.name.clone(),
            });
        }
        self.declared_order.push(name.name.clone());
        Ok(self.new_slot(&name.name, kind, ty, den))
    }

    fn declare_bound(&mut self, name: &Ident, ty: Ty) -> Result<Slot> {
        self.check_not_constant(name)?;
        Ok(self.new_slot(&name.name, SlotKind::Bound, ty, None))
    }

    fn push(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop(&mut self) -> Vec<Slot> {
        self.scopes
            .pop()
            .expect("scope")
            .into_iter()
            .map(|(_, s)| s)
            .collect()
    }

    fn lookup(&self, name: &str) -> Option<Found> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, s)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(Found::Slot(*s));
            }
        }
        self.spec.constant(name).cloned().map(Found::Const)
    }

    fn visible(&self) -> Vec<Slot> {
        let mut names: Vec<&str> = Vec::new();
        let mut slots: Vec<Slot> = Vec::new();
        for scope in &self.scopes {
            for (n, s) in scope {
                match names.iter().position(|m| m == n) {
                    Some(i) => slots[i] = *s,
                    None => {
                        names.push(n);
                        slots.push(*s);
                    }
                }
            }
        }
        slots
    }

    fn operation(mut self, d: &Decl) -> Result<Operation> {
        let (name, kind, params, result, requires, ensures) = match &d.kind {
            DeclKind::Pred {
                name,
                params,
                requires,
                ..
            } => (name, OpKind::Pred, params, None, requires, &[][..]),
            DeclKind::Theorem {
                name,
                params,
                requires,
                ..
            } => (name, OpKind::Theorem, params, None, requires, &[][..]),
            DeclKind::Fun {
                name,
                params,
                result,
                requires,
                ..
            } => (name, OpKind::Fun, params, Some(result), requires, &[][..]),
            DeclKind::Proc {
                name,
                params,
                result,
                requires,
                ensures,
                ..
            } => (name, OpKind::Proc, params, Some(result), requires, &ensures[..]),
            _ => unreachable!("not an operation"),
        };

        let mut op_params = Vec::new();
        for p in params {
            let (den, _) = self.spec.resolve_carrier(&p.ty)?;
            let slot = self.declare_program(&p.name, den.ty(), Some(den.clone()), SlotKind::Param)?;
            op_params.push(OpParam {
                name: p.name.name.clone(),
                den,
                slot,
            });
        }
        let result = result.map(|t| self.spec.resolve_type(t)).transpose()?;
        let requires = requires.iter().map(|e| self.formula(e)).collect::<Result<Vec<_>>>()?;

        let body = match &d.kind {
            DeclKind::Pred { body, .. } | DeclKind::Theorem { body, .. } => OpBody::Expr(self.formula(body)?),
            DeclKind::Fun { body, .. } => {
                let ir = self.expr(body)?;
                expect(&ir, &result.as_ref().expect("fun result").ty())?;
                OpBody::Expr(ir)
            }
            DeclKind::Proc { body, ret, .. } => {
                self.push();
                let cmds = body.iter().map(|c| self.command(c)).collect::<Result<Vec<_>>>()?;
                self.calls_allowed = true;
                let ret = self.expr(ret)?;
                expect(&ret, &result.as_ref().expect("proc result").ty())?;
                let clear = self.pop();
                OpBody::Proc {
                    body: cmds,
                    clear,
                    ret,
                }
            }
            _ => unreachable!(),
        };

        let mut result_slot = None;
        let mut ens = Vec::new();
        if kind == OpKind::Proc {
            self.push();
            let r = Ident {
                name: "result".into(),
                span: name.span,
            };
            let res_den = result.clone().expect("proc result");
            if self.program_vars.contains("result") {
                return Err(SemaError::Duplicate {
                    span: name.span,
                    name: "result".into(),
                });
            }
            result_slot = Some(self.new_slot(&r.name, SlotKind::Result, res_den.ty(), Some(res_den)));
            for e in ensures {
                ens.push(self.formula(e)?);
            }
            self.pop();
        }

        Ok(Operation {
            name: name.name.clone(),
            kind,
            params: op_params,
            result,
            result_slot,
            requires,
            ensures: ens,
            body,
            slots: self.slots,
            span: d.span,
            deterministic: self.deterministic,
        })
    }

    fn formula(&mut self, e: &Expr) -> Result<IrExpr> {
        let ir = self.expr(e)?;
        expect(&ir, &Ty::Bool)?;
        Ok(ir)
    }

    fn int(&mut self, e: &Expr) -> Result<IrExpr> {
        let ir = self.expr(e)?;
        expect(&ir, &Ty::Int)?;
        Ok(ir)
    }

    fn expr(&mut self, e: &Expr) -> Result<IrExpr> {
        let calls_allowed = std::mem::replace(&mut self.calls_allowed, false);
        let b = Box::new;
        let (kind, ty, label) = match &e.kind {
            ExprKind::Int(n) => (IrKind::Const(Value::Int(*n)), Ty::Int, None),
            ExprKind::Bool(v) => (IrKind::Const(Value::Bool(*v)), Ty::Bool, Some(NodeLabel::Atom)),
            ExprKind::Var(name) => match self.lookup(name) {
                Some(Found::Slot(s)) => {
                    let ty = self.slot_tys[s].clone();
                    let label = (ty == Ty::Bool).then_some(NodeLabel::Atom);
                    (IrKind::Local(s), ty, label)
                }
                Some(Found::Const(v)) => (IrKind::Const(v), Ty::Int, None),
                None => {
                    return Err(SemaError::Undeclared {
                        span: e.span,
                        name: name.clone(),
                    })
                }
            },
            ExprKind::Unary(UnOp::Not, x) => (IrKind::Not(b(self.formula(x)?)), Ty::Bool, Some(NodeLabel::Connective("¬"))),
            ExprKind::Unary(UnOp::Neg, x) => (IrKind::Neg(b(self.int(x)?)), Ty::Int, None),
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r)?,
            ExprKind::Quant {
                quantifier,
                binders,
                body,
            } => {
                self.push();
                let mut bs = Vec::new();
                for binder in binders {
                    let (den, size) = self.spec.resolve_carrier(&binder.ty)?;
                    let slot = self.declare_bound(&binder.name, den.ty())?;
                    bs.push(QuantBinder { slot, den, size });
                }
                let body = self.formula(body)?;
                self.pop();
                let forall = *quantifier == Quantifier::Forall;
                (
                    IrKind::Quant {
                        forall,
                        binders: bs,
                        body: b(body),
                    },
                    Ty::Bool,
                    Some(NodeLabel::Connective(quantifier.symbol())),
                )
            }
            ExprKind::Choose { binder, cond } => {
                self.deterministic = false;
                let (den, size) = self.spec.resolve_carrier(&binder.ty)?;
                self.push();
                let slot = self.declare_bound(&binder.name, den.ty())?;
                let cond = self.formula(cond)?;
                self.pop();
                let ty = den.ty();
                (
                    IrKind::Choose {
                        binder: QuantBinder { slot, den, size },
                        cond: b(cond),
                    },
                    ty,
                    None,
                )
            }
            ExprKind::Let {
                parallel,
                bindings,
                body,
            } => {
                self.push();
                let mut bs = Vec::new();
                if *parallel {
                    let mut seen = HashSet::new();
                    let mut values = Vec::new();
                    for bnd in bindings {
                        if !seen.insert(bnd.name.name.as_str()) {
                            return Err(SemaError::Duplicate {
                                span: bnd.name.span,
                                name: bnd.name.name.clone(),
                            });
                        }
                        values.push(self.expr(&bnd.value)?);
                    }
                    for (bnd, v) in bindings.iter().zip(values) {
                        let slot = self.declare_bound(&bnd.name, v.ty.clone())?;
                        bs.push((slot, v));
                    }
                } else {
                    for bnd in bindings {
                        let v = self.expr(&bnd.value)?;
                        let slot = self.declare_bound(&bnd.name, v.ty.clone())?;
                        bs.push((slot, v));
                    }
                }
                let body = self.expr(body)?;
                self.pop();
                let ty = body.ty.clone();
                let label = (ty == Ty::Bool).then_some(NodeLabel::Connective(if *parallel { "letpar" } else { "let" }));
                (
                    IrKind::Let {
                        parallel: *parallel,
                        bindings: bs,
                        body: b(body),
                    },
                    ty,
                    label,
                )
            }
            ExprKind::If { cond, then, els } => {
                let c = self.formula(cond)?;
                let t = self.expr(then)?;
                let f = self.expr(els)?;
                expect(&f, &t.ty)?;
                let ty = t.ty.clone();
                let label = (ty == Ty::Bool).then_some(NodeLabel::Connective("if"));
                (IrKind::If(b(c), b(t), b(f)), ty, label)
            }
            ExprKind::Call { name, args } => {
                let id = self.spec.op_id(&name.name).ok_or_else(|| SemaError::Undeclared {
                    span: name.span,
                    name: name.name.clone(),
                })?;
                let op = &self.spec.ops[id];
                if op.kind == OpKind::Proc && !calls_allowed {
                    return Err(SemaError::Type {
                        span: e.span,
                        message: format!(
                            "procedure `{}` may only be called as a whole initializer, assigned value, command or return value",
                            op.name
                        ),
                    });
                }
                if op.params.len() != args.len() {
                    return Err(SemaError::Type {
                        span: e.span,
                        message: format!(
                            "`{}` expects {} argument(s), found {}",
                            op.name,
                            op.params.len(),
                            args.len()
                        ),
                    });
                }
                let mut irs = Vec::new();
                for (a, p) in args.iter().zip(&op.params) {
                    let ir = self.expr(a)?;
                    expect(&ir, &p.den.ty())?;
                    irs.push(ir);
                }
                if !op.deterministic {
                    self.deterministic = false;
                }
                let (ty, label) = match &op.result {
                    Some(d) => (d.ty(), None),
                    None => (Ty::Bool, Some(NodeLabel::PredCall(op.name.clone()))),
                };
                let label = label.or_else(|| (ty == Ty::Bool).then_some(NodeLabel::Atom));
                (IrKind::Call { op: id, args: irs }, ty, label)
            }
            ExprKind::Index { base, index } => {
                let a = self.expr(base)?;
                let Ty::Array(_, elem) = &a.ty else {
                    return Err(SemaError::Type {
                        span: base.span,
                        message: format!("expected an array, found {}", a.ty),
                    });
                };
                let ty = (**elem).clone();
                let i = self.int(index)?;
                let label = (ty == Ty::Bool).then_some(NodeLabel::Atom);
                (IrKind::Index(b(a), b(i)), ty, label)
            }
            ExprKind::Proj { base, index } => {
                let t = self.expr(base)?;
                let Ty::Tuple(ts) = &t.ty else {
                    return Err(SemaError::Type {
                        span: base.span,
                        message: format!("expected a tuple, found {}", t.ty),
                    });
                };
                if *index == 0 || *index > ts.len() {
                    return Err(SemaError::Type {
                        span: e.span,
                        message: format!("tuple has no component {index}"),
                    });
                }
                let ty = ts[index - 1].clone();
                let label = (ty == Ty::Bool).then_some(NodeLabel::Atom);
                (IrKind::Proj(b(t), index - 1), ty, label)
            }
            ExprKind::With { base, index, value } => {
                let a = self.expr(base)?;
                let Ty::Array(_, elem) = &a.ty else {
                    return Err(SemaError::Type {
                        span: base.span,
                        message: format!("expected an array, found {}", a.ty),
                    });
                };
                let elem = (**elem).clone();
                let i = self.int(index)?;
                let v = self.expr(value)?;
                expect(&v, &elem)?;
                let ty = a.ty.clone();
                (IrKind::With(b(a), b(i), b(v)), ty, None)
            }
            ExprKind::SetLit(items) => {
                let irs = items.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>>>()?;
                let elem = irs[0].ty.clone();
                for x in &irs[1..] {
                    expect(x, &elem)?;
                }
                (IrKind::SetLit(irs), Ty::Set(Box::new(elem)), None)
            }
            ExprKind::EmptySet(t) => {
                let den = self.spec.resolve_type(t)?;
                (IrKind::Const(Value::Set(Vec::new().into())), Ty::Set(Box::new(den.ty())), None)
            }
            ExprKind::TupleLit(items) => {
                let irs = items.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>>>()?;
                let ty = Ty::Tuple(irs.iter().map(|x| x.ty.clone()).collect());
                (IrKind::TupleLit(irs), ty, None)
            }
            ExprKind::ArrayInit { ty, value } => {
                let den = self.spec.resolve_type(ty)?;
                let TypeDen::Array { len, elem } = &den else {
                    return Err(SemaError::Type {
                        span: ty.span,
                        message: format!("expected an array type, found {den}"),
                    });
                };
                let v = self.expr(value)?;
                expect(&v, &elem.ty())?;
                (
                    IrKind::ArrayInit {
                        len: *len,
                        value: b(v),
                    },
                    den.ty(),
                    None,
                )
            }
        };
        let formula = label.map(|label| {
            Arc::new(FormulaInfo {
                label,
                text: print_expr_bare(e),
                visible: self.visible(),
            })
        });
        Ok(IrExpr {
            kind,
            ty,
            span: e.span,
            formula,
        })
    }

    fn binary(&mut self, op: BinOp, l: &Expr, r: &Expr) -> Result<(IrKind, Ty, Option<NodeLabel>)> {
        let b = Box::new;
        let arith = |o| -> Option<ArithOp> {
            match o {
                BinOp::Add => Some(ArithOp::Add),
                BinOp::Sub => Some(ArithOp::Sub),
                BinOp::Mul => Some(ArithOp::Mul),
                BinOp::Div => Some(ArithOp::Div),
                BinOp::Mod => Some(ArithOp::Mod),
                _ => None,
            }
        };
        let cmp = |o| -> Option<CmpOp> {
            match o {
                BinOp::Lt => Some(CmpOp::Lt),
                BinOp::Le => Some(CmpOp::Le),
                BinOp::Gt => Some(CmpOp::Gt),
                BinOp::Ge => Some(CmpOp::Ge),
                _ => None,
            }
        };
        let logic = |o| -> Option<LogicOp> {
            match o {
                BinOp::And => Some(LogicOp::And),
                BinOp::Or => Some(LogicOp::Or),
                BinOp::Implies => Some(LogicOp::Implies),
                BinOp::Iff => Some(LogicOp::Iff),
                _ => None,
            }
        };
        if let Some(a) = arith(op) {
            let (x, y) = (self.int(l)?, self.int(r)?);
            return Ok((IrKind::Arith(a, b(x), b(y)), Ty::Int, None));
        }
        if let Some(c) = cmp(op) {
            let (x, y) = (self.int(l)?, self.int(r)?);
            return Ok((IrKind::Compare(c, b(x), b(y)), Ty::Bool, Some(NodeLabel::Atom)));
        }
        if let Some(g) = logic(op) {
            let (x, y) = (self.formula(l)?, self.formula(r)?);
            return Ok((IrKind::Logic(g, b(x), b(y)), Ty::Bool, Some(NodeLabel::Connective(op.symbol()))));
        }
        let x = self.expr(l)?;
        let y = self.expr(r)?;
        let kind = match op {
            BinOp::Eq => {
                expect(&y, &x.ty)?;
                IrKind::Eq(b(x), b(y))
            }
            BinOp::Neq => {
                expect(&y, &x.ty)?;
                IrKind::Neq(b(x), b(y))
            }
            BinOp::Member => {
                expect(&y, &Ty::Set(Box::new(x.ty.clone())))?;
                IrKind::Member(b(x), b(y))
            }
            _ => unreachable!("all operators covered"),
        };
        Ok((kind, Ty::Bool, Some(NodeLabel::Atom)))
    }

    fn scoped(&mut self, c: &Command) -> Result<IrCmd> {
        self.push();
        let ir = self.command(c)?;
        let clear = self.pop();
        Ok(if clear.is_empty() {
            ir
        } else {
            IrCmd::Block {
                body: vec![ir],
                clear,
            }
        })
    }

    fn command(&mut self, c: &Command) -> Result<IrCmd> {
        match &c.kind {
            CommandKind::Var { name, ty, init } => {
                let den = self.spec.resolve_type(ty)?;
                self.calls_allowed = true;
                let init = self.expr(init)?;
                expect(&init, &den.ty())?;
                let slot = self.declare_program(name, den.ty(), Some(den.clone()), SlotKind::Local)?;
                Ok(IrCmd::Var {
                    slot,
                    den,
                    init,
                    span: c.span,
                })
            }
            CommandKind::Assign { target, value } => {
                let slot = match self.lookup(&target.name.name) {
                    Some(Found::Slot(s)) if self.slots[s].kind == SlotKind::Local => s,
                    Some(_) => {
                        return Err(SemaError::Type {
                            span: target.name.span,
                            message: format!("`{}` cannot be assigned", target.name.name),
                        })
                    }
                    None => {
                        return Err(SemaError::Undeclared {
                            span: target.name.span,
                            name: target.name.name.clone(),
                        })
                    }
                };
                let den = self.slot_dens[slot].clone().ok_or_else(|| SemaError::Type {
                    span: target.name.span,
                    message: format!("`{}` has no declared type", target.name.name),
                })?;
                let mut ty = den.ty();
                let mut indices = Vec::new();
                for i in &target.indices {
                    let Ty::Array(_, elem) = ty else {
                        return Err(SemaError::Type {
                            span: i.span,
                            message: format!("indexing a non-array of type {ty}"),
                        });
                    };
                    indices.push(self.int(i)?);
                    ty = *elem;
                }
                self.calls_allowed = true;
                let value = self.expr(value)?;
                expect(&value, &ty)?;
                Ok(IrCmd::Assign {
                    slot,
                    den,
                    indices,
                    value,
                    span: c.span,
                })
            }
            CommandKind::If { cond, then, els } => {
                let cond = self.formula(cond)?;
                let then = Box::new(self.scoped(then)?);
                let els = els.as_ref().map(|e| self.scoped(e)).transpose()?.map(Box::new);
                Ok(IrCmd::If { cond, then, els })
            }
            CommandKind::While { cond, ann, body } => self.while_loop(cond, ann, &[&**body], c.span),
            CommandKind::For {
                init,
                cond,
                update,
                ann,
                body,
            } => {
                self.push();
                let init = self.command(init)?;
                let lp = self.while_loop(cond, ann, &[&**body, &**update], c.span)?;
                let clear = self.pop();
                Ok(IrCmd::Block {
                    body: vec![init, lp],
                    clear,
                })
            }
            CommandKind::Seq(cs) => {
                self.push();
                let body = cs.iter().map(|c| self.command(c)).collect::<Result<Vec<_>>>()?;
                let clear = self.pop();
                Ok(IrCmd::Block { body, clear })
            }
            CommandKind::Assert(e) => Ok(IrCmd::Assert(self.formula(e)?)),
            CommandKind::Call { name, args } => {
                let call = Expr {
                    kind: ExprKind::Call {
                        name: name.clone(),
                        args: args.clone(),
                    },
                    span: c.span,
                };
                self.calls_allowed = true;
                Ok(IrCmd::Call(self.expr(&call)?))
            }
        }
    }

    fn while_loop(&mut self, cond: &Expr, ann: &LoopAnnotations, body: &[&Command], span: Span) -> Result<IrCmd> {
        let cond = self.formula(cond)?;
        let modified = loop_modified_variables(body, &self.declared_order);
        self.push();
        let mut snapshots = Vec::new();
        let annotated = !ann.invariants.is_empty() || ann.decreases.is_some();
        for v in modified.iter().filter(|_| annotated) {
            let Some(Found::Slot(src)) = self.lookup(v) else {
                continue;
            };
            let ty = self.slot_tys[src].clone();
            let snap = self.new_slot(&format!("old_{v}"), SlotKind::Snapshot, ty, None);
            snapshots.push((src, snap));
        }
        let invariants = ann.invariants.iter().map(|e| self.formula(e)).collect::<Result<Vec<_>>>()?;
        let decreases = ann.decreases.as_ref().map(|e| self.int(e)).transpose()?;
        self.pop();
        self.push();
        let cmds = body.iter().map(|c| self.command(c)).collect::<Result<Vec<_>>>()?;
        let clear = self.pop();
        Ok(IrCmd::While {
            cond,
            invariants,
            decreases,
            body: Box::new(IrCmd::Block { body: cmds, clear }),
            snapshots,
            span,
        })
    }
}
