use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::ir::{statement_text, Location, Program};
use crate::registry::{Registries, SourceLabel};
use crate::slicer::Slice;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn node_kind(
    loc: &Location,
    p: &Program,
    regs: &Registries,
    sources: &BTreeSet<&Location>,
) -> &'static str {
    if sources.contains(loc) {
        return "source";
    }
    let sig = p
        .statement(loc)
        .and_then(|s| s.kind.callee())
        .map(|c| c.signature());
    match sig {
        Some(sig) if regs.sinks.classify(&sig).is_some() => "sink",
        Some(sig) if regs.sanitizers.contains(&sig) => "sanitizer",
        _ => "normal",
    }
}

fn shape(kind: &str) -> &'static str {
    match kind {
        "source" => "invhouse",
        "sink" => "house",
        "sanitizer" => "octagon",
        _ => "box",
    }
}

/// DOT digraph of a slice. Nodes appear in location order and are named
/// `n0`, `n1`, ...; `labels` decides which nodes are sources.
pub fn render_dot(s: &Slice, p: &Program, regs: &Registries, labels: &[SourceLabel]) -> String {
    let sources: BTreeSet<&Location> = labels.iter().map(|l| &l.location).collect();
    let ids: HashMap<&Location, usize> = s.nodes.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut out = String::new();
    writeln!(out, "digraph slice_{} {{", s.root.id.0).unwrap();
    writeln!(out, "  node [fontname=\"monospace\"];").unwrap();
    for (i, loc) in s.nodes.iter().enumerate() {
        let text = p
            .statement(loc)
            .map(|st| statement_text(&st.kind))
            .unwrap_or_default();
        let kind = node_kind(loc, p, regs, &sources);
        writeln!(
            out,
            "  n{i} [label=\"{}\", kind=\"{kind}\", shape=\"{}\"];",
            escape(&format!("{loc}: {text}")),
            shape(kind)
        )
        .unwrap();
    }
    for e in &s.edges {
        let (Some(a), Some(b)) = (ids.get(&e.from), ids.get(&e.to)) else {
            continue;
        };
        let k = e.kind.as_str();
        writeln!(out, "  n{a} -> n{b} [kind=\"{k}\", label=\"{k}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}
