//! Interprocedural taint propagation with pseudonymization status.
//!
//! Every labelled source generates a `Raw` fact on the call's result.
//! Facts move through copies, opaque calls (argument → result), resolved
//! calls (argument → parameter, return value → result) and field cells.
//! Registered sanitizers mark their result `Pseudonymized`. At control-flow
//! merges a `Raw` and a `Pseudonymized` version of the same source collapse
//! to `Raw`, so a `Pseudonymized` fact means every reaching path applied a
//! sanitizer.
//!
//! Implicit flows through branch conditions are not tracked here; they are
//! visible in slices only.

mod bits;
mod engine;
mod flows;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{CallGraph, DepGraph};
use crate::ir::{Local, Location, MethodId, Program};
use crate::registry::{Registries, SourceId, SourceLabel};

pub use engine::propagate;
pub use flows::{
    check_pseudonymization, collect_flows, derived_data, shortest_witness, unsunk, DerivedData,
    Flow, PseudonymizationVerdict, SinkSite,
};

/// Two-point status lattice: `Pseudonymized ⊑ Raw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Status {
    Pseudonymized,
    Raw,
}

impl Status {
    pub fn join(self, other: Status) -> Status {
        self.max(other)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pseudonymized => "Pseudonymized",
            Status::Raw => "Raw",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Cell {
    Local { method: MethodId, local: Local },
    Field { class: String, field: String },
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Local { method, local } => write!(f, "{method}/{local}"),
            Cell::Field { class, field } => write!(f, "{class}.{field}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaintFact {
    pub cell: Cell,
    pub source: SourceId,
    pub status: Status,
}

/// Taint of the locals of one method at one program point.
pub type LocalState = BTreeMap<(Local, SourceId), Status>;

/// Facts of `local` in `state`, by source.
pub fn facts_of(state: &LocalState, local: &Local) -> BTreeMap<SourceId, Status> {
    state
        .range((local.clone(), SourceId(0))..=(local.clone(), SourceId(u32::MAX)))
        .map(|((_, id), st)| (*id, *st))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaintError {
    #[error("taint fixpoint did not converge within {budget} steps")]
    FixpointBudgetExceeded { budget: u64 },
    #[error("source id {0} is not a label of this analysis")]
    NotALabel(u32),
}

/// Fixpoint of [`propagate`].
#[derive(Debug, Clone)]
pub struct TaintFacts {
    pub(crate) labels: Vec<SourceLabel>,
    /// Words per label set; see `bits`.
    pub(crate) words: usize,
    pub(crate) methods: BTreeMap<MethodId, MethodFacts>,
    pub(crate) fields: BTreeMap<(String, String), BTreeMap<SourceId, Status>>,
    /// Digest of the program the facts were computed on.
    pub program_digest: String,
    /// Number of statement evaluations the fixpoint took.
    pub steps: u64,
}

/// Bitset states of one method, one value of `2 * words` per local slot.
#[derive(Debug, Clone, Default)]
pub(crate) struct MethodFacts {
    /// Slot order; sorted.
    pub locals: Vec<Local>,
    pub before: Vec<Vec<u64>>,
    pub after: Vec<Vec<u64>>,
}

impl MethodFacts {
    pub fn slot(&self, local: &Local) -> Option<usize> {
        self.locals.binary_search(local).ok()
    }
}

impl TaintFacts {
    pub fn labels(&self) -> &[SourceLabel] {
        &self.labels
    }

    pub fn label(&self, id: SourceId) -> Option<&SourceLabel> {
        self.labels.iter().find(|l| l.id == id)
    }

    pub(crate) fn label_index(&self, id: SourceId) -> Option<usize> {
        self.labels.iter().position(|l| l.id == id)
    }

    fn raw_state(&self, loc: &Location, after: bool) -> Option<(&MethodFacts, &[u64])> {
        let m = self.methods.get(&loc.method)?;
        let v = if after { m.after.get(loc.index) } else { m.before.get(loc.index) }?;
        Some((m, v))
    }

    pub(crate) fn value<'s>(&self, state: &'s [u64], slot: usize) -> &'s [u64] {
        let v = 2 * self.words;
        &state[slot * v..(slot + 1) * v]
    }

    pub(crate) fn decode(&self, value: &[u64]) -> BTreeMap<SourceId, Status> {
        bits::statuses(value, self.words)
            .map(|(k, st)| (self.labels[k].id, st))
            .collect()
    }

    fn materialize(&self, m: &MethodFacts, state: &[u64]) -> LocalState {
        let mut out = LocalState::new();
        for (slot, local) in m.locals.iter().enumerate() {
            for (id, st) in self.decode(self.value(state, slot)) {
                out.insert((local.clone(), id), st);
            }
        }
        out
    }

    fn to_facts(&self, loc: &Location, after: bool) -> BTreeSet<TaintFact> {
        let Some(state) = self.state(loc, after) else {
            return BTreeSet::new();
        };
        state
            .into_iter()
            .map(|((local, id), status)| TaintFact {
                cell: Cell::Local {
                    method: loc.method.clone(),
                    local,
                },
                source: id,
                status,
            })
            .collect()
    }

    fn state(&self, loc: &Location, after: bool) -> Option<LocalState> {
        let (m, s) = self.raw_state(loc, after)?;
        Some(self.materialize(m, s))
    }

    /// Local facts holding on entry to the statement at `loc`.
    pub fn before(&self, loc: &Location) -> BTreeSet<TaintFact> {
        self.to_facts(loc, false)
    }

    /// Local facts holding after the statement at `loc`.
    pub fn after(&self, loc: &Location) -> BTreeSet<TaintFact> {
        self.to_facts(loc, true)
    }

    pub fn before_state(&self, loc: &Location) -> Option<LocalState> {
        self.state(loc, false)
    }

    pub fn after_state(&self, loc: &Location) -> Option<LocalState> {
        self.state(loc, true)
    }

    /// Facts of `local` on entry to `loc`; `None` if `loc` is not a statement.
    pub fn local_before(&self, loc: &Location, local: &Local) -> Option<BTreeMap<SourceId, Status>> {
        let (m, s) = self.raw_state(loc, false)?;
        Some(match m.slot(local) {
            Some(slot) => self.decode(self.value(s, slot)),
            None => BTreeMap::new(),
        })
    }

    /// Flow-insensitive field facts.
    pub fn field_facts(&self) -> BTreeSet<TaintFact> {
        self.fields
            .iter()
            .flat_map(|((class, field), ids)| {
                ids.iter().map(move |(id, st)| TaintFact {
                    cell: Cell::Field {
                        class: class.clone(),
                        field: field.clone(),
                    },
                    source: *id,
                    status: *st,
                })
            })
            .collect()
    }

    /// Total number of (program point, fact) pairs, before and after.
    pub fn fact_count(&self) -> usize {
        self.methods
            .values()
            .flat_map(|m| m.before.iter().chain(&m.after))
            .map(|s| {
                s.chunks(2 * self.words.max(1))
                    .map(|v| bits::count(v, self.words))
                    .sum::<usize>()
            })
            .sum::<usize>()
            + self.fields.values().map(BTreeMap::len).sum::<usize>()
    }
}

/// Everything the taint stage produces.
#[derive(Debug, Clone)]
pub struct TaintResult {
    pub facts: TaintFacts,
    pub flows: Vec<Flow>,
    pub unsunk: Vec<SourceLabel>,
}

/// Propagation followed by flow collection.
pub fn analyze_taint(
    p: &Program,
    cg: &CallGraph,
    g: &DepGraph,
    labels: &[SourceLabel],
    regs: &Registries,
) -> Result<TaintResult, TaintError> {
    let facts = propagate(p, cg, labels, &regs.sanitizers)?;
    let flows = collect_flows(&facts, p, &regs.sinks, g);
    let unsunk = unsunk(&facts.labels, &flows);
    Ok(TaintResult {
        facts,
        flows,
        unsunk,
    })
}
