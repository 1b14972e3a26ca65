use std::fmt::Write;

use super::StateGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: one node per state (labelled with its bit string,
/// the initial state drawn as a double circle) and one edge per distinct
/// transition, labelled with its input condition.
pub fn state_graph_dot(graph: &StateGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    out.push_str("  rankdir=LR;\n  node [shape=circle];\n");
    for &s in &graph.states {
        let label = graph.format_state(s);
        let shape = if s == graph.initial_state {
            ", shape=doublecircle"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} [label={}{shape}];",
            quote(&format!("s{label}")),
            quote(&label)
        )
        .unwrap();
    }
    for ((s, t), cond) in graph.condensed_edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&format!("s{}", graph.format_state(s))),
            quote(&format!("s{}", graph.format_state(t))),
            quote(&cond.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(graph: &StateGraph) -> String {
    state_graph_dot(graph, "fsm")
}
