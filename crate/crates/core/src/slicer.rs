//! Forward slices rooted at labelled sources.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::graph::{DepEdge, DepGraph, NodeId};
use crate::ir::{Location, MethodId, Program};
use crate::registry::{SinkRegistry, SourceLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub root: SourceLabel,
    /// Sorted by location.
    pub nodes: Vec<Location>,
    /// Every graph edge with both endpoints in `nodes`, sorted.
    pub edges: Vec<DepEdge>,
}

impl Slice {
    pub fn contains(&self, loc: &Location) -> bool {
        self.nodes.binary_search(loc).is_ok()
    }
}

/// Node ids reachable from `start` (inclusive) over every edge kind.
pub fn reachable(g: &DepGraph, start: NodeId) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &(s, _) in g.successors(v) {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Everything transitively dependent on the label's statement.
pub fn forward_slice(g: &DepGraph, label: &SourceLabel) -> Slice {
    let Some(start) = g.node_id(&label.location) else {
        return Slice {
            root: label.clone(),
            nodes: vec![label.location.clone()],
            edges: Vec::new(),
        };
    };
    let seen = reachable(g, start);
    let mut nodes: Vec<Location> = seen
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(id, _)| g.location(id).clone())
        .collect();
    nodes.sort();
    let mut edges = Vec::new();
    for (from, _) in seen.iter().enumerate().filter(|(_, &s)| s) {
        for &(to, kind) in g.successors(from) {
            if seen[to] {
                edges.push(DepEdge {
                    from: g.location(from).clone(),
                    to: g.location(to).clone(),
                    kind,
                });
            }
        }
    }
    edges.sort();
    Slice {
        root: label.clone(),
        nodes,
        edges,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceStats {
    pub node_count: usize,
    pub methods_touched: usize,
    pub sink_nodes: Vec<Location>,
}

pub fn slice_stats(s: &Slice, p: &Program, sinks: &SinkRegistry) -> SliceStats {
    let methods: BTreeSet<&MethodId> = s.nodes.iter().map(|l| &l.method).collect();
    let sink_nodes = s
        .nodes
        .iter()
        .filter(|loc| {
            p.statement(loc)
                .and_then(|st| st.kind.callee())
                .is_some_and(|c| sinks.classify(&c.signature()).is_some())
        })
        .cloned()
        .collect();
    SliceStats {
        node_count: s.nodes.len(),
        methods_touched: methods.len(),
        sink_nodes,
    }
}
