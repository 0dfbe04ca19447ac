//! Graphviz export.

use std::fmt::Write;

use crate::report::round9;
use crate::strategy::Strategy;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Memory-node digraph with one cluster per location and probabilities as edge labels.
pub fn to_dot(strategy: &Strategy) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(strategy.name())).unwrap();
    for (i, loc) in strategy.locations().iter().enumerate() {
        writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{i}"))).unwrap();
        writeln!(out, "    label={};", quote(&loc.label)).unwrap();
        for &n in &loc.members {
            writeln!(out, "    {};", quote(&strategy.nodes()[n].id)).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for e in strategy.edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&strategy.nodes()[e.from].id),
            quote(&strategy.nodes()[e.to].id),
            quote(&format!("{:?}", round9(e.p)))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
