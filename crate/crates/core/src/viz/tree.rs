use serde::{Deserialize, Serialize};

use super::VizError;
use crate::eval::machine::{Frame, Invoked};
use crate::eval::{Bindings, EvalMode, Event, Machine, Record, Value};
use crate::sema::ir::NodeLabel;
use crate::sema::TypedSpec;
use crate::syntax::ast::Expr;

pub const DEFAULT_LAYER_CAP: usize = 500;

/// Formula events of one evaluated input.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub number: u64,
    pub args: Bindings,
    pub events: Vec<Event>,
    pub value: Option<bool>,
    pub error: Option<String>,
}

/// Events of evaluating a Boolean operation on its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaRun {
    pub operation: String,
    pub instances: Vec<InstanceRecord>,
    /// Inputs not evaluated because of the layer cap.
    pub omitted: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Root,
    Instance,
    Connective,
    PredCall,
    Atom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalNode {
    pub kind: NodeKind,
    /// Outermost symbol, predicate name, or formula text.
    pub label: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Bindings,
    /// Argument values of a predicate call or an instance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Bindings,
    /// Truth value; absent when evaluation did not finish.
    pub value: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<EvalNode>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub omitted: u64,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

impl EvalNode {
    fn new(kind: NodeKind, label: impl Into<String>, text: impl Into<String>) -> Self {
        EvalNode {
            kind,
            label: label.into(),
            text: text.into(),
            bindings: Vec::new(),
            args: Vec::new(),
            value: None,
            children: Vec::new(),
            truncated: false,
            omitted: 0,
        }
    }

    /// Number of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(EvalNode::size).sum::<usize>()
    }

    /// Pre-order search.
    pub fn find(&self, pred: &dyn Fn(&EvalNode) -> bool) -> Option<&EvalNode> {
        if pred(self) {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(pred))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalTree {
    pub root: EvalNode,
    pub layer_cap: usize,
}

impl EvalTree {
    pub fn size(&self) -> usize {
        self.root.size()
    }
}

fn bindings_of(params: &[crate::sema::ir::OpParam], args: &[Value]) -> Bindings {
    params.iter().zip(args).map(|(p, a)| (p.name.clone(), a.clone())).collect()
}

/// Evaluates the Boolean operation `op` on its inputs in enumeration order,
/// recording formula events. At most `max_instances` inputs are evaluated.
pub fn record_formula_run(spec: &TypedSpec, op: &str, max_instances: usize) -> Result<FormulaRun, VizError> {
    let id = spec.op_id(op).ok_or_else(|| VizError::UnknownOperation(op.to_string()))?;
    let o = &spec.ops[id];
    let total = o.input_count().ok_or_else(|| VizError::TooManyInputs(op.to_string()))?;
    let mut m = Machine::new(spec, EvalMode::Det);
    m.set_record(Record::Tree);
    let mut instances = Vec::new();
    let shown = total.min(max_instances.max(1) as u64);
    for i in 0..shown {
        let args = o.nth_input(i);
        let mut run = |m: &mut Machine<'_>| m.invoke(id, &args, o.span, true);
        let (value, error) = match m.step_paths(&mut run, &mut Some(Vec::new())) {
            Some(Ok(Invoked::Value(v))) => (truth(&v), None),
            Some(Ok(Invoked::Inadmissible)) => (None, Some("precondition is false".to_string())),
            Some(Err(e)) => (None, Some(e.to_string())),
            None => (None, None),
        };
        instances.push(InstanceRecord {
            number: i + 1,
            args: bindings_of(&o.params, &args),
            events: m.take_events(),
            value,
            error,
        });
    }
    Ok(FormulaRun {
        operation: o.name.clone(),
        instances,
        omitted: total - shown,
    })
}

/// Evaluates a closed formula, recording formula events.
pub fn record_expr(spec: &TypedSpec, e: &Expr) -> Result<FormulaRun, VizError> {
    let (ir, slots) = spec.compile_expr(e, &[])?;
    let mut m = Machine::new(spec, EvalMode::Det);
    m.set_record(Record::Tree);
    let mut run = |m: &mut Machine<'_>| {
        let mut f = Frame::new(&slots);
        m.eval(&ir, &mut f)
    };
    let (value, error) = match m.step_paths(&mut run, &mut Some(Vec::new())) {
        Some(Ok(v)) => (truth(&v), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };
    Ok(FormulaRun {
        operation: String::new(),
        instances: vec![InstanceRecord {
            number: 1,
            args: Vec::new(),
            events: m.take_events(),
            value,
            error,
        }],
        omitted: 0,
    })
}

/// Builds the evaluation tree of a run; with `prune`, only the children
/// that justify each node's truth value are kept.
pub fn build_eval_tree(run: &FormulaRun, prune: bool, layer_cap: usize) -> EvalTree {
    let layer_cap = layer_cap.max(1);
    let mut root = EvalNode::new(NodeKind::Root, run.operation.clone(), run.operation.clone());
    for inst in &run.instances {
        let mut node = EvalNode::new(NodeKind::Instance, format!("#{}", inst.number), format_args(&inst.args));
        node.args = inst.args.clone();
        node.value = inst.value;
        node.children = build_nodes(&inst.events, prune);
        root.children.push(node);
    }
    root.value = run
        .instances
        .iter()
        .try_fold(true, |acc, i| i.value.map(|v| acc && v));
    root.omitted = run.omitted;
    root.truncated = run.omitted > 0;
    let mut budgets = Vec::new();
    cap(&mut root, 0, layer_cap, &mut budgets);
    EvalTree { root, layer_cap }
}

fn format_args(args: &Bindings) -> String {
    let a: Vec<String> = args.iter().map(|(n, v)| format!("{n}={v}")).collect();
    format!("({})", a.join(", "))
}

fn build_nodes(events: &[Event], prune: bool) -> Vec<EvalNode> {
    let mut stack: Vec<EvalNode> = vec![EvalNode::new(NodeKind::Root, "", "")];
    for e in events {
        match e {
            Event::FormulaBegin { label, text, bindings } => {
                let (kind, l) = match label {
                    NodeLabel::Connective(s) => (NodeKind::Connective, s.to_string()),
                    NodeLabel::PredCall(n) => (NodeKind::PredCall, n.clone()),
                    NodeLabel::Atom => (NodeKind::Atom, text.clone()),
                };
                let mut n = EvalNode::new(kind, l, text.clone());
                n.bindings = bindings.clone();
                stack.push(n);
            }
            Event::PredArgs(args) => {
                if let Some(top) = stack.last_mut() {
                    if top.kind == NodeKind::PredCall && top.args.is_empty() {
                        top.args = args.clone();
                    }
                }
            }
            Event::FormulaEnd(v) => {
                let mut n = stack.pop().expect("balanced formula events");
                n.value = Some(*v);
                if prune {
                    prune_node(&mut n);
                }
                stack.last_mut().expect("root").children.push(n);
            }
            _ => {}
        }
    }
    while stack.len() > 1 {
        let n = stack.pop().expect("nonempty");
        stack.last_mut().expect("root").children.push(n);
    }
    stack.pop().map(|r| r.children).unwrap_or_default()
}

fn prune_node(n: &mut EvalNode) {
    if n.kind != NodeKind::Connective {
        return;
    }
    let v = n.value;
    let keep_last = matches!(
        (n.label.as_str(), v),
        ("∧" | "∀", Some(false)) | ("∨" | "∃", Some(true))
    );
    if keep_last {
        if let Some(last) = n.children.pop() {
            n.children = vec![last];
        }
    } else if n.label == "⇒" && v == Some(true) && n.children.first().and_then(|c| c.value) == Some(false) {
        n.children.truncate(1);
    }
}

/// Drops trailing children beyond the cap of their parent and of their
/// layer. A new layer starts below each instance and each predicate call.
fn cap(n: &mut EvalNode, layer: usize, limit: usize, budgets: &mut Vec<usize>) {
    let child_layer = match n.kind {
        NodeKind::Instance | NodeKind::PredCall => layer + 1,
        _ => layer,
    };
    if budgets.len() <= child_layer {
        budgets.resize(child_layer + 1, limit);
    }
    let keep = n.children.len().min(budgets[child_layer]);
    if keep < n.children.len() {
        n.omitted += (n.children.len() - keep) as u64;
        n.truncated = true;
        n.children.truncate(keep);
    }
    budgets[child_layer] -= keep;
    for c in &mut n.children {
        cap(c, child_layer, limit, budgets);
    }
}

/// Truth value derived bottom-up from the kept children of `n`. Leaves,
/// truncated nodes and unfinished nodes give their recorded value.
pub fn reconstruct(n: &EvalNode) -> Option<bool> {
    if n.children.is_empty() || n.truncated {
        return n.value;
    }
    let kids: Option<Vec<bool>> = n.children.iter().map(reconstruct).collect();
    let kids = kids?;
    Some(match (n.kind, n.label.as_str()) {
        (NodeKind::Root, _) => kids.iter().all(|&k| k),
        (NodeKind::Connective, "∧" | "∀") => kids.iter().all(|&k| k),
        (NodeKind::Connective, "∨" | "∃") => kids.iter().any(|&k| k),
        (NodeKind::Connective, "¬") => !kids[0],
        (NodeKind::Connective, "⇒") => match kids[..] {
            [a] => !a,
            [a, b, ..] => !a || b,
            [] => return n.value,
        },
        (NodeKind::Connective, "⇔") => match kids[..] {
            [a, b] => a == b,
            _ => return n.value,
        },
        _ => *kids.last().expect("nonempty"),
    })
}

fn truth(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        _ => None,
    }
}
