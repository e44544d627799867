use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::{bits, Cell, Status, TaintError, TaintFacts};
use crate::graph::{DepGraph, NodeId};
use crate::ir::{Location, Program, StmtKind};
use crate::registry::{SinkClass, SinkRegistry, SourceId, SourceLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkSite {
    pub location: Location,
    #[serde(flatten)]
    pub class: SinkClass,
}

/// A labelled source reaching a classified sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flow {
    pub source: SourceLabel,
    pub sink: SinkSite,
    pub status: Status,
    /// Dependence path from the source statement to the sink statement.
    pub witness: Vec<Location>,
    /// Callee signatures invoked along the witness, source and sink excluded.
    pub manipulations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PseudonymizationVerdict {
    AllPathsPseudonymized,
    RawOnSomePath,
}

/// Because `Raw` absorbs `Pseudonymized` at every merge, a flow is
/// `Pseudonymized` exactly when each reaching path applied a sanitizer.
pub fn check_pseudonymization(f: &Flow) -> PseudonymizationVerdict {
    match f.status {
        Status::Pseudonymized => PseudonymizationVerdict::AllPathsPseudonymized,
        Status::Raw => PseudonymizationVerdict::RawOnSomePath,
    }
}

fn bfs_distances(g: &DepGraph, start: NodeId, backward: bool) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued nodes have a distance");
        let next = if backward {
            g.predecessors(v)
        } else {
            g.successors(v)
        };
        for &(w, _) in next {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest path from `from` to `to`; among shortest paths, the
/// lexicographically smallest sequence of locations.
pub fn shortest_witness(g: &DepGraph, from: &Location, to: &Location) -> Option<Vec<Location>> {
    let (s, t) = (g.node_id(from)?, g.node_id(to)?);
    let to_sink = bfs_distances(g, t, true);
    witness_with(g, s, t, &to_sink)
}

fn witness_with(
    g: &DepGraph,
    s: NodeId,
    t: NodeId,
    to_sink: &[Option<usize>],
) -> Option<Vec<Location>> {
    let mut remaining = to_sink[s]?;
    let mut path = vec![g.location(s).clone()];
    let mut cur = s;
    while cur != t {
        remaining -= 1;
        let next = g
            .successors(cur)
            .iter()
            .map(|&(w, _)| w)
            .filter(|&w| to_sink[w] == Some(remaining))
            .min_by(|&a, &b| g.location(a).cmp(g.location(b)))?;
        path.push(g.location(next).clone());
        cur = next;
    }
    Some(path)
}

/// One flow per (sink statement, source) pair. A source reaching the sink
/// through several arguments is reported once with the joined status.
pub fn collect_flows(
    tr: &TaintFacts,
    p: &Program,
    sinks: &SinkRegistry,
    g: &DepGraph,
) -> Vec<Flow> {
    let labels: HashMap<SourceId, &SourceLabel> = tr.labels.iter().map(|l| (l.id, l)).collect();
    let mut flows = Vec::new();
    for (mid, m) in p.methods() {
        for (index, stmt) in m.body.iter().enumerate() {
            let Some(callee) = stmt.kind.callee() else { continue };
            let Some(class) = sinks.classify(&callee.signature()) else { continue };
            let loc = mid.at(index);
            let mut reaching: BTreeMap<SourceId, Status> = BTreeMap::new();
            for arg in stmt.kind.args() {
                let Some(facts) = tr.local_before(&loc, arg) else { break };
                for (id, st) in facts {
                    let slot = reaching.entry(id).or_insert(st);
                    *slot = slot.join(st);
                }
            }
            if reaching.is_empty() {
                continue;
            }
            let sink_node = g.node_id(&loc);
            let to_sink = sink_node.map(|t| bfs_distances(g, t, true));
            for (id, status) in reaching {
                let Some(label) = labels.get(&id) else { continue };
                let witness = match (g.node_id(&label.location), sink_node, &to_sink) {
                    (Some(s), Some(t), Some(d)) => witness_with(g, s, t, d),
                    _ => None,
                };
                debug_assert!(
                    witness.is_some(),
                    "taint reached {loc} from {} without a dependence path",
                    label.location
                );
                let witness =
                    witness.unwrap_or_else(|| vec![label.location.clone(), loc.clone()]);
                let manipulations = if witness.len() > 2 {
                    witness[1..witness.len() - 1]
                        .iter()
                        .filter_map(|l| p.statement(l)?.kind.callee().map(|c| c.signature()))
                        .collect()
                } else {
                    Vec::new()
                };
                flows.push(Flow {
                    source: (*label).clone(),
                    sink: SinkSite {
                        location: loc.clone(),
                        class: class.clone(),
                    },
                    status,
                    witness,
                    manipulations,
                });
            }
        }
    }
    flows
}

/// Labels that reach no sink.
pub fn unsunk(labels: &[SourceLabel], flows: &[Flow]) -> Vec<SourceLabel> {
    let sunk: BTreeSet<SourceId> = flows.iter().map(|f| f.source.id).collect();
    labels
        .iter()
        .filter(|l| !sunk.contains(&l.id))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DerivedData {
    /// Every cell that holds data of the label somewhere.
    pub cells: BTreeSet<Cell>,
    /// Calls whose result carries data of the label.
    pub signatures: BTreeSet<String>,
}

pub fn derived_data(
    tr: &TaintFacts,
    p: &Program,
    label: SourceId,
) -> Result<DerivedData, TaintError> {
    let root = tr.label(label).ok_or(TaintError::NotALabel(label.0))?;
    let mut out = DerivedData::default();
    let k = tr.label_index(label).expect("label has an index");
    for (mid, mf) in &tr.methods {
        for (slot, local) in mf.locals.iter().enumerate() {
            if mf
                .before
                .iter()
                .chain(&mf.after)
                .any(|s| bits::contains(tr.value(s, slot), k))
            {
                out.cells.insert(Cell::Local {
                    method: mid.clone(),
                    local: local.clone(),
                });
            }
        }
    }
    for ((class, field), ids) in &tr.fields {
        if ids.contains_key(&label) {
            out.cells.insert(Cell::Field {
                class: class.clone(),
                field: field.clone(),
            });
        }
    }
    out.signatures = call_outputs_carrying(tr, p, k, &root.location);
    Ok(out)
}

fn call_outputs_carrying(
    tr: &TaintFacts,
    p: &Program,
    k: usize,
    root: &Location,
) -> BTreeSet<String> {
    let mut sigs = BTreeSet::new();
    for (mid, mf) in &tr.methods {
        for (index, after) in mf.after.iter().enumerate() {
            let loc = mid.at(index);
            if &loc == root {
                continue;
            }
            let Some(StmtKind::AssignCall { lhs, callee, .. }) = p.statement(&loc).map(|s| &s.kind) else {
                continue;
            };
            if mf.slot(lhs).is_some_and(|slot| bits::contains(tr.value(after, slot), k)) {
                sigs.insert(callee.signature());
            }
        }
    }
    sigs
}
