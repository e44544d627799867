use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::callgraph::{CallGraph, CallTarget};
use super::intra::{control_deps, data_deps, Cfg, Def, ReachingDefs};
use crate::ir::{Local, Location, MethodId, Program, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeKind {
    Data,
    Control,
    Call,
    ParamIn,
    ReturnOut,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Data => "data",
            EdgeKind::Control => "control",
            EdgeKind::Call => "call",
            EdgeKind::ParamIn => "param-in",
            EdgeKind::ReturnOut => "return-out",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepEdge {
    pub from: Location,
    pub to: Location,
    pub kind: EdgeKind,
}

/// Dependence graph over statement locations.
#[derive(Debug, Clone, Default)]
pub struct DepGraph {
    nodes: Vec<Location>,
    index: HashMap<Location, NodeId>,
    succ: Vec<Vec<(NodeId, EdgeKind)>>,
    pred: Vec<Vec<(NodeId, EdgeKind)>>,
    edge_count: usize,
}

impl DepGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, loc: Location) -> NodeId {
        if let Some(&id) = self.index.get(&loc) {
            return id;
        }
        let id = self.nodes.len();
        self.index.insert(loc.clone(), id);
        self.nodes.push(loc);
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        id
    }

    /// Adds an edge between existing nodes. Returns false if it was present.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, kind: EdgeKind) -> bool {
        if self.succ[from].contains(&(to, kind)) {
            return false;
        }
        self.succ[from].push((to, kind));
        self.pred[to].push((from, kind));
        self.edge_count += 1;
        true
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[Location] {
        &self.nodes
    }

    pub fn location(&self, id: NodeId) -> &Location {
        &self.nodes[id]
    }

    pub fn node_id(&self, loc: &Location) -> Option<NodeId> {
        self.index.get(loc).copied()
    }

    pub fn successors(&self, id: NodeId) -> &[(NodeId, EdgeKind)] {
        &self.succ[id]
    }

    pub fn predecessors(&self, id: NodeId) -> &[(NodeId, EdgeKind)] {
        &self.pred[id]
    }

    pub fn has_edge(&self, from: &Location, to: &Location) -> bool {
        match (self.node_id(from), self.node_id(to)) {
            (Some(f), Some(t)) => self.succ[f].iter().any(|&(s, _)| s == t),
            _ => false,
        }
    }

    /// All edges, sorted by (from, to, kind) location order.
    pub fn edges(&self) -> Vec<DepEdge> {
        let mut out: Vec<DepEdge> = self
            .succ
            .iter()
            .enumerate()
            .flat_map(|(f, ss)| {
                ss.iter().map(move |&(t, kind)| DepEdge {
                    from: self.nodes[f].clone(),
                    to: self.nodes[t].clone(),
                    kind,
                })
            })
            .collect();
        out.sort();
        out
    }

    /// Sorts adjacency lists by target location so traversals are
    /// deterministic regardless of insertion order.
    fn sort_adjacency(&mut self) {
        let nodes = &self.nodes;
        for list in self.succ.iter_mut().chain(self.pred.iter_mut()) {
            list.sort_by(|a, b| nodes[a.0].cmp(&nodes[b.0]).then(a.1.cmp(&b.1)));
        }
    }
}

/// Resolved field cell: the declaring class when it is in the program,
/// otherwise the class as written.
fn field_cell<'p>(p: &'p Program, class: &'p str, field: &'p str) -> (&'p str, &'p str) {
    let mut cursor = class;
    for _ in 0..=p.classes.len() {
        match p.class(cursor) {
            Some(c) if c.fields.iter().any(|f| f.name == field) => return (&c.name, field),
            Some(c) => cursor = &c.superclass,
            None => break,
        }
    }
    (class, field)
}

pub(crate) fn resolve_field<'p>(p: &'p Program, class: &'p str, field: &'p str) -> (String, String) {
    let (c, f) = field_cell(p, class, field);
    (c.to_string(), f.to_string())
}

/// Builds the interprocedural dependence graph: per-method data and
/// control edges, field store→load edges across the whole program, and
/// Call / ParamIn / ReturnOut edges for every resolved call.
///
/// Calls to opaque code need no extra edge: the call statement reads its
/// arguments and defines its result, so the argument→result summary is the
/// ordinary def-use chain through the call node.
pub fn build_pdg(p: &Program, cg: &CallGraph) -> DepGraph {
    let mut g = DepGraph::new();
    for loc in p.locations() {
        g.add_node(loc);
    }
    let methods = p.methods();
    let by_id: BTreeMap<&MethodId, _> = methods.iter().map(|(id, m)| (id, *m)).collect();

    let mut cfgs = BTreeMap::new();
    for (id, m) in &methods {
        cfgs.insert(id, Cfg::new(m));
    }
    let reaching: BTreeMap<&MethodId, ReachingDefs> = methods
        .iter()
        .map(|(id, m)| (id, ReachingDefs::compute(m, &cfgs[id])))
        .collect();

    let node = |g: &DepGraph, id: &MethodId, i: usize| g.node_id(&id.at(i)).expect("every statement is a node");

    for (id, m) in &methods {
        for (d, u) in data_deps(m) {
            let (a, b) = (node(&g, id, d), node(&g, id, u));
            g.add_edge(a, b, EdgeKind::Data);
        }
        for (c, d) in control_deps(m) {
            let (a, b) = (node(&g, id, c), node(&g, id, d));
            g.add_edge(a, b, EdgeKind::Control);
        }
    }

    let mut stores: BTreeMap<(String, String), Vec<NodeId>> = BTreeMap::new();
    let mut loads: BTreeMap<(String, String), Vec<NodeId>> = BTreeMap::new();
    for (id, m) in &methods {
        for (i, stmt) in m.body.iter().enumerate() {
            match &stmt.kind {
                StmtKind::FieldStore { class, field, .. } => stores
                    .entry(resolve_field(p, class, field))
                    .or_default()
                    .push(node(&g, id, i)),
                StmtKind::AssignFieldLoad { class, field, .. } => loads
                    .entry(resolve_field(p, class, field))
                    .or_default()
                    .push(node(&g, id, i)),
                _ => {}
            }
        }
    }
    for (cell, ss) in &stores {
        for &l in loads.get(cell).into_iter().flatten() {
            for &s in ss {
                g.add_edge(s, l, EdgeKind::Data);
            }
        }
    }

    // Readers of each parameter reached by the entry definition.
    let mut param_readers: BTreeMap<(&MethodId, usize), Vec<usize>> = BTreeMap::new();
    for (id, m) in &methods {
        let rd = &reaching[id];
        for (i, stmt) in m.body.iter().enumerate() {
            for used in stmt.kind.uses() {
                if let Some(k) = param_position(m.params.as_slice(), used) {
                    if rd.at(i, used).any(|d| d == Def::Entry) {
                        let readers = param_readers.entry((id, k)).or_default();
                        if readers.last() != Some(&i) {
                            readers.push(i);
                        }
                    }
                }
            }
        }
    }

    for (site, targets) in &cg.edges {
        let caller = &site.method;
        let Some(stmt) = by_id.get(caller).and_then(|m| m.body.get(site.index)) else {
            continue;
        };
        let site_node = node(&g, caller, site.index);
        let rd = &reaching[caller];
        for target in targets {
            let CallTarget::Method(callee_id) = target else { continue };
            let Some(callee) = by_id.get(callee_id) else { continue };
            if !callee.body.is_empty() {
                let entry = node(&g, callee_id, 0);
                g.add_edge(site_node, entry, EdgeKind::Call);
            }
            for (k, arg) in stmt.kind.args().iter().enumerate() {
                let Some(readers) = param_readers.get(&(callee_id, k)) else { continue };
                // An argument that is itself a caller parameter has no
                // defining statement here; the call site stands in for it.
                let origins: BTreeSet<NodeId> = rd
                    .at(site.index, arg)
                    .map(|d| match d {
                        Def::Stmt(s) => node(&g, caller, s),
                        Def::Entry => site_node,
                    })
                    .collect();
                for &r in readers {
                    let r = node(&g, callee_id, r);
                    for &o in &origins {
                        g.add_edge(o, r, EdgeKind::ParamIn);
                    }
                }
            }
            if stmt.kind.def().is_some() {
                for (r, rs) in callee.body.iter().enumerate() {
                    if let StmtKind::Return { value: Some(_) } = rs.kind {
                        let r = node(&g, callee_id, r);
                        g.add_edge(r, site_node, EdgeKind::ReturnOut);
                    }
                }
            }
        }
    }
    g.sort_adjacency();
    g
}

fn param_position(params: &[Local], local: &Local) -> Option<usize> {
    params.iter().position(|p| p == local)
}
