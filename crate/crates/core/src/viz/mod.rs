//! Execution traces of procedure runs and evaluation trees of formulas,
//! exported as Graphviz DOT or JSON.

mod dot;
mod trace;
mod tree;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use trace::{build_trace, record_run, ProcRun, TraceGraph, TraceNode};
pub use tree::{
    build_eval_tree, reconstruct, record_expr, record_formula_run, EvalNode, EvalTree, FormulaRun, InstanceRecord,
    NodeKind, DEFAULT_LAYER_CAP,
};

use crate::sema::SemaError;

#[derive(Debug, thiserror::Error)]
pub enum VizError {
    #[error("no operation named `{0}` is declared")]
    UnknownOperation(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("`{0}` has too many inputs to enumerate")]
    TooManyInputs(String),
    #[error(transparent)]
    Sema(#[from] SemaError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A graph that can be exported.
pub trait Export: Serialize + DeserializeOwned {
    fn to_dot(&self) -> String;
}

impl Export for TraceGraph {
    fn to_dot(&self) -> String {
        dot::trace(self)
    }
}

impl Export for EvalTree {
    fn to_dot(&self) -> String {
        dot::tree(self)
    }
}

pub fn emit_dot<G: Export>(g: &G) -> String {
    g.to_dot()
}

pub fn emit_json<G: Export>(g: &G) -> String {
    serde_json::to_string_pretty(g).expect("graphs serialize")
}

/// Reads a graph written by [`emit_json`].
pub fn read_json<G: Export>(text: &str) -> Result<G, VizError> {
    Ok(serde_json::from_str(text)?)
}
