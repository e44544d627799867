//! Intraprocedural analyses over a single method body: reaching
//! definitions, def-use (data) edges and postdominator-based control
//! dependence.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{Local, MethodDef, StmtKind};

/// A definition site: method entry (parameters) or a statement index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Def {
    Entry,
    Stmt(usize),
}

/// Control-flow graph of one body. Node `len` is the synthetic exit.
pub struct Cfg {
    pub len: usize,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
}

impl Cfg {
    pub fn new(m: &MethodDef) -> Cfg {
        let len = m.body.len();
        let mut succ = vec![Vec::new(); len + 1];
        let mut pred = vec![Vec::new(); len + 1];
        for (i, stmt) in m.body.iter().enumerate() {
            for s in stmt.kind.successors(i, len) {
                succ[i].push(s);
                pred[s].push(i);
            }
        }
        Cfg { len, succ, pred }
    }
}

/// Reaching definitions of locals at the entry of each statement.
pub struct ReachingDefs<'m> {
    before: Vec<BTreeMap<&'m Local, BTreeSet<Def>>>,
}

impl<'m> ReachingDefs<'m> {
    pub fn compute(m: &'m MethodDef, cfg: &Cfg) -> ReachingDefs<'m> {
        let n = m.body.len();
        let mut before: Vec<BTreeMap<&Local, BTreeSet<Def>>> = vec![BTreeMap::new(); n];
        if n == 0 {
            return ReachingDefs { before };
        }
        for p in &m.params {
            before[0].entry(p).or_default().insert(Def::Entry);
        }
        let mut queued = vec![true; n];
        let mut work: Vec<usize> = (0..n).rev().collect();
        while let Some(i) = work.pop() {
            queued[i] = false;
            let mut out = before[i].clone();
            if let Some(d) = m.body[i].kind.def() {
                out.insert(d, BTreeSet::from([Def::Stmt(i)]));
            }
            for &s in &cfg.succ[i] {
                if s >= n {
                    continue;
                }
                let mut changed = false;
                for (local, defs) in &out {
                    let slot = before[s].entry(local).or_default();
                    for d in defs {
                        changed |= slot.insert(*d);
                    }
                }
                if changed && !queued[s] {
                    queued[s] = true;
                    work.push(s);
                }
            }
        }
        ReachingDefs { before }
    }

    /// Definitions of `local` that reach the entry of statement `index`.
    pub fn at(&self, index: usize, local: &Local) -> impl Iterator<Item = Def> + '_ {
        self.before
            .get(index)
            .and_then(|m| m.get(local))
            .into_iter()
            .flatten()
            .copied()
    }
}

/// Def-use edges `(def, use)` between statement indices, for locals, plus
/// store→load edges for fields accessed within this body (field cells are
/// flow-insensitive, so order does not matter).
pub fn data_deps(m: &MethodDef) -> BTreeSet<(usize, usize)> {
    let cfg = Cfg::new(m);
    let rd = ReachingDefs::compute(m, &cfg);
    let mut edges = BTreeSet::new();
    for (i, stmt) in m.body.iter().enumerate() {
        for used in stmt.kind.uses() {
            for d in rd.at(i, used) {
                if let Def::Stmt(d) = d {
                    edges.insert((d, i));
                }
            }
        }
    }
    let mut stores: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, stmt) in m.body.iter().enumerate() {
        if let StmtKind::FieldStore { class, field, .. } = &stmt.kind {
            stores.entry((class, field)).or_default().push(i);
        }
    }
    for (i, stmt) in m.body.iter().enumerate() {
        if let StmtKind::AssignFieldLoad { class, field, .. } = &stmt.kind {
            for &s in stores.get(&(class.as_str(), field.as_str())).into_iter().flatten() {
                edges.insert((s, i));
            }
        }
    }
    edges
}

/// Immediate postdominators; `ipdom[exit]` is the exit itself.
fn immediate_postdominators(cfg: &Cfg) -> Vec<usize> {
    let exit = cfg.len;
    let n = exit + 1;
    let mut succ = cfg.succ.clone();
    let mut pred = cfg.pred.clone();

    // Nodes that cannot reach the exit (infinite loops) get a virtual edge
    // to it so that postdominance is defined everywhere.
    let mut reaches = vec![false; n];
    let mut stack = vec![exit];
    reaches[exit] = true;
    while let Some(v) = stack.pop() {
        for &p in &pred[v] {
            if !reaches[p] {
                reaches[p] = true;
                stack.push(p);
            }
        }
    }
    for v in 0..exit {
        if !reaches[v] {
            succ[v].push(exit);
            pred[exit].push(v);
        }
    }

    // Postorder of the reverse graph rooted at exit.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![(exit, 0usize)];
    seen[exit] = true;
    while let Some((v, k)) = stack.pop() {
        if k < pred[v].len() {
            stack.push((v, k + 1));
            let p = pred[v][k];
            if !seen[p] {
                seen[p] = true;
                stack.push((p, 0));
            }
        } else {
            order.push(v);
        }
    }
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }

    const UNDEF: usize = usize::MAX;
    let mut ipdom = vec![UNDEF; n];
    ipdom[exit] = exit;
    let mut changed = true;
    while changed {
        changed = false;
        for &v in order.iter().rev() {
            if v == exit {
                continue;
            }
            let mut new = UNDEF;
            for &s in &succ[v] {
                if ipdom[s] == UNDEF {
                    continue;
                }
                new = if new == UNDEF {
                    s
                } else {
                    let (mut a, mut b) = (new, s);
                    while a != b {
                        while rank[a] < rank[b] {
                            a = ipdom[a];
                        }
                        while rank[b] < rank[a] {
                            b = ipdom[b];
                        }
                    }
                    a
                };
            }
            if ipdom[v] != new {
                ipdom[v] = new;
                changed = true;
            }
        }
    }
    ipdom
}

/// Control-dependence edges `(branch, dependent)` between statement indices.
pub fn control_deps(m: &MethodDef) -> BTreeSet<(usize, usize)> {
    let cfg = Cfg::new(m);
    let ipdom = immediate_postdominators(&cfg);
    let mut edges = BTreeSet::new();
    for a in 0..cfg.len {
        if cfg.succ[a].len() < 2 {
            continue;
        }
        for &b in &cfg.succ[a] {
            let mut runner = b;
            while runner != ipdom[a] && runner != cfg.len {
                edges.insert((a, runner));
                runner = ipdom[runner];
            }
        }
    }
    edges
}
