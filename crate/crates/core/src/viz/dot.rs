use std::fmt::Write;

use super::tree::{EvalNode, EvalTree, NodeKind};
use super::{TraceGraph, TraceNode};
use crate::eval::format_bindings;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(super) fn trace(g: &TraceGraph) -> String {
    let mut out = String::from("digraph trace {\n  node [shape=circle];\n");
    let mut ids = 0usize;
    if g.nodes.is_empty() {
        let _ = writeln!(out, "  title [shape=box, label={}];", quote(&g.title));
    } else {
        let _ = writeln!(out, "  label={};\n  labelloc=t;", quote(&g.title));
        trace_body(&mut out, g, &mut ids, 1);
    }
    out.push_str("}\n");
    out
}

/// Writes the nodes of `g` and returns the DOT ids of its first and last
/// nodes.
fn trace_body(out: &mut String, g: &TraceGraph, ids: &mut usize, depth: usize) -> Option<(String, String)> {
    let pad = "  ".repeat(depth);
    let mut ends: Vec<(String, String)> = Vec::new();
    for n in &g.nodes {
        match n {
            TraceNode::State { number, bindings } => {
                let id = format!("s{}", *ids);
                *ids += 1;
                let _ = writeln!(
                    out,
                    "{pad}{id} [label=\"{number}\", tooltip={}];",
                    quote(&format_bindings(bindings))
                );
                ends.push((id.clone(), id));
            }
            TraceNode::Call { text, result, graph } => {
                let c = *ids;
                *ids += 1;
                let header = format!("c{c}");
                let label = match result {
                    Some(r) => format!("{text} = {r}"),
                    None => text.clone(),
                };
                let _ = writeln!(out, "{pad}subgraph cluster_{c} {{\n{pad}  label={};", quote(text));
                let _ = writeln!(out, "{pad}  {header} [shape=box, label={}];", quote(&label));
                let inner = trace_body(out, graph, ids, depth + 1);
                let last = match inner {
                    Some((first, last)) => {
                        let _ = writeln!(out, "{pad}  {header} -> {first};");
                        last
                    }
                    None => header.clone(),
                };
                let _ = writeln!(out, "{pad}}}");
                ends.push((header, last));
            }
        }
    }
    for &(a, b) in &g.edges {
        if let (Some((_, from)), Some((to, _))) = (ends.get(a), ends.get(b)) {
            let _ = writeln!(out, "{pad}{from} -> {to};");
        }
    }
    Some((ends.first()?.0.clone(), ends.last()?.1.clone()))
}

pub(super) fn tree(t: &EvalTree) -> String {
    let mut out = String::from("digraph eval {\n  node [shape=box];\n");
    let mut ids = 0usize;
    tree_node(&mut out, &t.root, &mut ids, None, 1);
    out.push_str("}\n");
    out
}

fn tree_node(out: &mut String, n: &EvalNode, ids: &mut usize, parent: Option<usize>, depth: usize) {
    let pad = "  ".repeat(depth);
    let id = *ids;
    *ids += 1;
    let value = match n.value {
        Some(true) => "true",
        Some(false) => "false",
        None => "?",
    };
    let label = match n.kind {
        NodeKind::Root => n.label.clone(),
        NodeKind::Instance => format!("{} {}", n.label, n.text),
        NodeKind::PredCall => format!("{}({}) : {value}", n.label, args_text(n)),
        NodeKind::Connective | NodeKind::Atom => format!("{} : {value}", n.label),
    };
    let mut tip = n.text.clone();
    if !n.bindings.is_empty() {
        tip = format!("{tip}\n{}", format_bindings(&n.bindings));
    }
    let color = match n.value {
        Some(true) => ", color=darkgreen",
        Some(false) => ", color=red",
        None => "",
    };
    let cluster = n.kind == NodeKind::PredCall && !n.children.is_empty();
    let inner = if cluster { format!("{pad}  ") } else { pad.clone() };
    if cluster {
        let _ = writeln!(out, "{pad}subgraph cluster_{id} {{\n{pad}  label={};", quote(&n.text));
    }
    let _ = writeln!(out, "{inner}n{id} [label={}, tooltip={}{color}];", quote(&label), quote(&tip));
    if let Some(p) = parent {
        let _ = writeln!(out, "{pad}n{p} -> n{id};");
    }
    for c in &n.children {
        tree_node(out, c, ids, Some(id), depth + usize::from(cluster));
    }
    if n.truncated {
        let _ = writeln!(
            out,
            "{inner}t{id} [shape=plaintext, label={}];\n{inner}n{id} -> t{id} [style=dashed];",
            quote(&format!("… {} more", n.omitted))
        );
    }
    if cluster {
        let _ = writeln!(out, "{pad}}}");
    }
}

fn args_text(n: &EvalNode) -> String {
    let a: Vec<String> = n.args.iter().map(|(_, v)| v.to_string()).collect();
    a.join(",")
}
