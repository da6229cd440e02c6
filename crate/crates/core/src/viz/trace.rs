use serde::{Deserialize, Serialize};

use super::VizError;
use crate::eval::machine::Invoked;
use crate::eval::{Bindings, EvalMode, Event, Machine, Record, Value};
use crate::sema::TypedSpec;

/// Events of one procedure run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcRun {
    /// Call text, e.g. `gcdp(6,4)`.
    pub title: String,
    pub events: Vec<Event>,
    pub result: Option<Value>,
    pub error: Option<String>,
    /// The precondition was false, so the body did not run.
    pub inadmissible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceNode {
    /// Program state after a declaration or assignment.
    State { number: u64, bindings: Bindings },
    /// Call of another operation, with the callee's own trace.
    Call {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        result: Option<Value>,
        graph: TraceGraph,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceGraph {
    pub title: String,
    pub nodes: Vec<TraceNode>,
    /// `(from, to)` node indices; consecutive nodes are linked.
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TraceGraph {
    pub fn states(&self) -> impl Iterator<Item = (u64, &Bindings)> {
        self.nodes.iter().filter_map(|n| match n {
            TraceNode::State { number, bindings } => Some((*number, bindings)),
            TraceNode::Call { .. } => None,
        })
    }

    pub fn calls(&self) -> impl Iterator<Item = (&str, &TraceGraph)> {
        self.nodes.iter().filter_map(|n| match n {
            TraceNode::Call { text, graph, .. } => Some((text.as_str(), graph)),
            TraceNode::State { .. } => None,
        })
    }
}

fn call_text(name: &str, args: &[Value]) -> String {
    let a: Vec<String> = args.iter().map(Value::to_string).collect();
    format!("{name}({})", a.join(","))
}

/// Runs `op` on `args` once (first outcome) and records its state changes
/// and calls.
pub fn record_run(spec: &TypedSpec, op: &str, args: &[Value]) -> Result<ProcRun, VizError> {
    let id = spec.op_id(op).ok_or_else(|| VizError::UnknownOperation(op.to_string()))?;
    let o = &spec.ops[id];
    if o.params.len() != args.len() {
        return Err(VizError::Arity {
            name: op.to_string(),
            expected: o.params.len(),
            found: args.len(),
        });
    }
    let mut m = Machine::new(spec, EvalMode::Det);
    m.set_record(Record::Trace);
    let span = o.span;
    let mut run = |m: &mut Machine<'_>| match m.invoke(id, args, span, true)? {
        Invoked::Value(v) => Ok(Some(v)),
        Invoked::Inadmissible => Ok(None),
    };
    let outcome = m.step_paths(&mut run, &mut Some(Vec::new()));
    let inadmissible = matches!(outcome, Some(Ok(None)));
    let (result, error) = match outcome {
        Some(Ok(Some(v))) => (Some(v), None),
        Some(Ok(None)) => (None, Some("precondition is false".to_string())),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };
    Ok(ProcRun {
        title: call_text(op, args),
        events: m.take_events(),
        result,
        error,
        inadmissible,
    })
}

/// Builds the trace graph of a run: one state node per recorded state and
/// one call node per operation call, numbered in execution order.
pub fn build_trace(run: &ProcRun) -> TraceGraph {
    let mut step = 0;
    let mut it = run.events.iter();
    let mut g = build(&mut it, run.title.clone(), &mut step);
    g.result = run.result.clone();
    g.error = run.error.clone();
    g
}

fn build<'e>(events: &mut impl Iterator<Item = &'e Event>, title: String, step: &mut u64) -> TraceGraph {
    let mut g = TraceGraph {
        title,
        ..TraceGraph::default()
    };
    while let Some(e) = events.next() {
        match e {
            Event::State(b) => {
                *step += 1;
                g.nodes.push(TraceNode::State {
                    number: *step,
                    bindings: b.clone(),
                });
            }
            Event::CallBegin { operation, args } => {
                let vals: Vec<Value> = args.iter().map(|(_, v)| v.clone()).collect();
                let text = call_text(operation, &vals);
                let sub = build(events, text.clone(), step);
                let result = sub.result.clone();
                g.nodes.push(TraceNode::Call {
                    text,
                    result,
                    graph: sub,
                });
            }
            Event::CallEnd { result } => {
                g.result = result.clone();
                break;
            }
            _ => {}
        }
    }
    g.edges = (1..g.nodes.len()).map(|i| (i - 1, i)).collect();
    g
}
