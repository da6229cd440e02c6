//! Compiled form of a resolved specification. Variables are resolved to
//! slots of the enclosing operation's frame, constants are inlined and
//! operation names are resolved to [`OpId`]s.

use std::sync::Arc;

use super::types::{Ty, TypeDen};
use crate::eval::Value;
use crate::syntax::Span;

pub type OpId = usize;
pub type Slot = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicOp {
    And,
    Or,
    Implies,
    Iff,
}

/// How a Boolean node is shown in an evaluation tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeLabel {
    /// `∧ ∨ ¬ ⇒ ⇔ ∀ ∃ let if`
    Connective(&'static str),
    /// Application of a Boolean-valued operation.
    PredCall(String),
    /// Any other Boolean expression (comparison, membership, variable, ...).
    Atom,
}

/// Display data attached to every Boolean-valued node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaInfo {
    pub label: NodeLabel,
    pub text: String,
    /// Slots in scope at this node, outermost first.
    pub visible: Vec<Slot>,
}

#[derive(Clone, Debug)]
pub struct IrExpr {
    pub kind: IrKind,
    pub ty: Ty,
    pub span: Span,
    pub formula: Option<Arc<FormulaInfo>>,
}

#[derive(Clone, Debug)]
pub struct QuantBinder {
    pub slot: Slot,
    pub den: TypeDen,
    pub size: u64,
}

#[derive(Clone, Debug)]
pub enum IrKind {
    Const(Value),
    Local(Slot),
    Not(Box<IrExpr>),
    Neg(Box<IrExpr>),
    Arith(ArithOp, Box<IrExpr>, Box<IrExpr>),
    Compare(CmpOp, Box<IrExpr>, Box<IrExpr>),
    Eq(Box<IrExpr>, Box<IrExpr>),
    Neq(Box<IrExpr>, Box<IrExpr>),
    Member(Box<IrExpr>, Box<IrExpr>),
    Logic(LogicOp, Box<IrExpr>, Box<IrExpr>),
    Quant {
        forall: bool,
        binders: Vec<QuantBinder>,
        body: Box<IrExpr>,
    },
    Choose {
        binder: QuantBinder,
        cond: Box<IrExpr>,
    },
    Let {
        parallel: bool,
        bindings: Vec<(Slot, IrExpr)>,
        body: Box<IrExpr>,
    },
    If(Box<IrExpr>, Box<IrExpr>, Box<IrExpr>),
    Call {
        op: OpId,
        args: Vec<IrExpr>,
    },
    Index(Box<IrExpr>, Box<IrExpr>),
    /// 0-based component.
    Proj(Box<IrExpr>, usize),
    With(Box<IrExpr>, Box<IrExpr>, Box<IrExpr>),
    SetLit(Vec<IrExpr>),
    TupleLit(Vec<IrExpr>),
    ArrayInit {
        len: usize,
        value: Box<IrExpr>,
    },
}

#[derive(Clone, Debug)]
pub enum IrCmd {
    Var {
        slot: Slot,
        den: TypeDen,
        init: IrExpr,
        span: Span,
    },
    Assign {
        slot: Slot,
        den: TypeDen,
        indices: Vec<IrExpr>,
        value: IrExpr,
        span: Span,
    },
    If {
        cond: IrExpr,
        then: Box<IrCmd>,
        els: Option<Box<IrCmd>>,
    },
    While {
        cond: IrExpr,
        invariants: Vec<IrExpr>,
        decreases: Option<IrExpr>,
        body: Box<IrCmd>,
        /// `(variable, old_ copy)` pairs bound on loop entry.
        snapshots: Vec<(Slot, Slot)>,
        span: Span,
    },
    /// Commands of a block; `clear` lists the slots declared in it.
    Block {
        body: Vec<IrCmd>,
        clear: Vec<Slot>,
    },
    Assert(IrExpr),
    Call(IrExpr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Param,
    Local,
    Result,
    /// Quantifier, choose and let variables.
    Bound,
    /// `old_` copies of loop-modified variables.
    Snapshot,
}

#[derive(Clone, Debug)]
pub struct SlotInfo {
    pub name: String,
    pub kind: SlotKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Pred,
    Fun,
    Theorem,
    Proc,
}

impl OpKind {
    pub fn keyword(self) -> &'static str {
        match self {
            OpKind::Pred => "pred",
            OpKind::Fun => "fun",
            OpKind::Theorem => "theorem",
            OpKind::Proc => "proc",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, OpKind::Pred | OpKind::Theorem)
    }
}

#[derive(Clone, Debug)]
pub struct OpParam {
    pub name: String,
    pub den: TypeDen,
    pub slot: Slot,
}

#[derive(Clone, Debug)]
pub enum OpBody {
    Expr(IrExpr),
    /// Body commands, then the return expression; `clear` lists the body's
    /// local slots, released after the return value is computed.
    Proc {
        body: Vec<IrCmd>,
        clear: Vec<Slot>,
        ret: IrExpr,
    },
}

#[derive(Clone, Debug)]
pub struct Operation {
    pub name: String,
    pub kind: OpKind,
    pub params: Vec<OpParam>,
    /// Declared result type; `None` for predicates and theorems.
    pub result: Option<TypeDen>,
    pub result_slot: Option<Slot>,
    pub requires: Vec<IrExpr>,
    pub ensures: Vec<IrExpr>,
    pub body: OpBody,
    pub slots: Vec<SlotInfo>,
    pub span: Span,
    /// No `choose` is reachable from this operation.
    pub deterministic: bool,
}

impl Operation {
    /// Number of inputs, i.e. the product of the parameter carrier sizes.
    /// Sizes are checked during resolution, but the product may still overflow.
    pub fn input_count(&self) -> Option<u64> {
        self.params.iter().try_fold(1u64, |acc, p| {
            acc.checked_mul(p.den.size().ok()?)
        })
    }

    /// The `index`-th input tuple, parameter 0 varying fastest.
    pub fn nth_input(&self, index: u64) -> Vec<Value> {
        let mut rest = index;
        self.params
            .iter()
            .map(|p| {
                let n = p.den.size().expect("checked carrier");
                let v = p.den.nth(rest % n);
                rest /= n;
                v
            })
            .collect()
    }

    /// Signature as shown in run headers, e.g. `gcdp(ℤ,ℤ)`.
    pub fn signature(&self) -> String {
        let ps: Vec<String> = self.params.iter().map(|p| p.den.base_name()).collect();
        format!("{}({})", self.name, ps.join(","))
    }
}
