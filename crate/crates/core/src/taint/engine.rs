use std::collections::{BTreeMap, HashMap, VecDeque};

use super::bits;
use super::{MethodFacts, TaintError, TaintFacts};
use crate::digest::program_digest;
use crate::graph::{resolve_field, CallGraph, CallTarget, Cfg};
use crate::ir::{Local, MethodId, Program, StmtKind};
use crate::registry::{SanitizerRegistry, SourceLabel};

/// A statement with its locals, fields and callees resolved to indices.
enum Op {
    Kill(usize),
    Copy(usize, usize),
    Load(usize, usize),
    Store(usize, usize),
    Call {
        lhs: Option<usize>,
        args: Vec<usize>,
        label: Option<usize>,
        sanitizer: bool,
        opaque: bool,
        targets: Vec<usize>,
    },
    Return(usize),
    Nop,
}

struct Method {
    params: Vec<usize>,
    slots: usize,
    ops: Vec<Op>,
    succ: Vec<Vec<usize>>,
    reachable: Vec<bool>,
}

struct Engine<'a> {
    w: usize,
    methods: &'a [Method],
    facts: Vec<MethodFacts>,
    returns: Vec<Vec<u64>>,
    fields: Vec<Vec<u64>>,
    loads_of: Vec<Vec<(usize, usize)>>,
    call_sites_of: Vec<Vec<(usize, usize)>>,
    queue: VecDeque<(usize, usize)>,
    queued: Vec<Vec<bool>>,
}

impl Engine<'_> {
    fn enqueue(&mut self, m: usize, i: usize) {
        if self.methods[m].reachable[i] && !self.queued[m][i] {
            self.queued[m][i] = true;
            self.queue.push_back((m, i));
        }
    }

    fn step(&mut self, m: usize, i: usize) {
        let w = self.w;
        let v = 2 * w;
        let methods = self.methods;
        let mut after = self.facts[m].before[i].clone();
        match &methods[m].ops[i] {
            Op::Kill(l) => after[l * v..(l + 1) * v].fill(0),
            Op::Copy(l, r) => after.copy_within(r * v..(r + 1) * v, l * v),
            Op::Load(l, c) => after[l * v..(l + 1) * v].copy_from_slice(&self.fields[*c]),
            Op::Store(c, r) => {
                let (c, r) = (*c, *r);
                if bits::join(&mut self.fields[c], &after[r * v..(r + 1) * v]) {
                    for k in 0..self.loads_of[c].len() {
                        let (lm, li) = self.loads_of[c][k];
                        self.enqueue(lm, li);
                    }
                }
            }
            Op::Call {
                lhs,
                args,
                label,
                sanitizer,
                opaque,
                targets,
            } => {
                let before = &self.facts[m].before[i];
                let mut argv = vec![0u64; v];
                for &a in args {
                    bits::join(&mut argv, &before[a * v..(a + 1) * v]);
                }
                if let Some(l) = *lhs {
                    let mut out = vec![0u64; v];
                    for &t in targets {
                        bits::join(&mut out, &self.returns[t]);
                    }
                    // a source's result is the acquired data, not its arguments
                    if *opaque && label.is_none() {
                        bits::join(&mut out, &argv);
                    }
                    if *sanitizer {
                        bits::join(&mut out, &argv);
                        bits::pseudonymize(&mut out, w);
                    }
                    if let Some(id) = *label {
                        bits::set_raw(&mut out, w, id);
                    }
                    after[l * v..(l + 1) * v].copy_from_slice(&out);
                }
                for &t in targets {
                    let callee = &methods[t];
                    if callee.ops.is_empty() {
                        continue;
                    }
                    let mut changed = false;
                    for (&a, &p) in args.iter().zip(&callee.params) {
                        let src = self.facts[m].before[i][a * v..(a + 1) * v].to_vec();
                        changed |= bits::join(&mut self.facts[t].before[0][p * v..(p + 1) * v], &src);
                    }
                    if changed {
                        self.enqueue(t, 0);
                    }
                }
            }
            Op::Return(r) => {
                let r = *r;
                if bits::join(&mut self.returns[m], &after[r * v..(r + 1) * v]) {
                    for k in 0..self.call_sites_of[m].len() {
                        let (cm, ci) = self.call_sites_of[m][k];
                        self.enqueue(cm, ci);
                    }
                }
            }
            Op::Nop => {}
        }

        for &s in &methods[m].succ[i] {
            if bits::join(&mut self.facts[m].before[s], &after) {
                self.enqueue(m, s);
            }
        }
        self.facts[m].after[i] = after;
    }
}

fn reachable_from_entry(cfg: &Cfg) -> Vec<bool> {
    let n = cfg.len;
    let mut seen = vec![false; n];
    if n == 0 {
        return seen;
    }
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &s in &cfg.succ[v] {
            if s < n && !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// Sorted, deduplicated locals mentioned by a method.
fn locals_of(def: &crate::ir::MethodDef) -> Vec<Local> {
    let mut ls: Vec<Local> = def.params.clone();
    for s in &def.body {
        ls.extend(s.kind.def().cloned());
        ls.extend(s.kind.uses().into_iter().cloned());
    }
    ls.sort();
    ls.dedup();
    ls
}

/// Computes the least fixpoint of the taint transfer functions over the
/// whole program. Every method is an entry point (framework callbacks), and
/// callees additionally receive the facts of their arguments at every call
/// site.
pub fn propagate(
    p: &Program,
    cg: &CallGraph,
    labels: &[SourceLabel],
    san: &SanitizerRegistry,
) -> Result<TaintFacts, TaintError> {
    let w = bits::words(labels.len());
    let defs = p.methods();
    let index: HashMap<&MethodId, usize> =
        defs.iter().enumerate().map(|(i, (id, _))| (id, i)).collect();
    let label_at: HashMap<_, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (&l.location, i))
        .collect();

    let mut cells: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut cell_of = |class: &str, field: &str| {
        let key = resolve_field(p, class, field);
        let n = cells.len();
        *cells.entry(key).or_insert(n)
    };

    let mut locals = Vec::with_capacity(defs.len());
    let mut methods = Vec::with_capacity(defs.len());
    let mut loads: Vec<(usize, usize, usize)> = Vec::new();
    let mut call_sites_of = vec![Vec::new(); defs.len()];
    for (mi, (id, def)) in defs.iter().enumerate() {
        let ls = locals_of(def);
        let slot = |l: &Local| ls.binary_search(l).expect("local interned");
        let cfg = Cfg::new(def);
        let n = def.body.len();
        let mut ops = Vec::with_capacity(n);
        for (i, stmt) in def.body.iter().enumerate() {
            let op = match &stmt.kind {
                StmtKind::AssignConst { lhs, .. } => Op::Kill(slot(lhs)),
                StmtKind::AssignCopy { lhs, rhs } => Op::Copy(slot(lhs), slot(rhs)),
                StmtKind::AssignFieldLoad { lhs, class, field } => {
                    let c = cell_of(class, field);
                    loads.push((c, mi, i));
                    Op::Load(slot(lhs), c)
                }
                StmtKind::FieldStore { class, field, rhs } => Op::Store(cell_of(class, field), slot(rhs)),
                StmtKind::Return { value: Some(v) } => Op::Return(slot(v)),
                k @ (StmtKind::AssignCall { .. } | StmtKind::Call { .. }) => {
                    let loc = id.at(i);
                    let mut targets = Vec::new();
                    let mut opaque = false;
                    for t in cg.targets(&loc) {
                        match t {
                            CallTarget::Method(t) => targets.extend(index.get(t).copied()),
                            CallTarget::Opaque(_) => opaque = true,
                        }
                    }
                    let lhs = k.def().map(slot);
                    if lhs.is_some() {
                        for &t in &targets {
                            call_sites_of[t].push((mi, i));
                        }
                    }
                    Op::Call {
                        lhs,
                        args: k.args().iter().map(slot).collect(),
                        label: label_at.get(&loc).copied(),
                        sanitizer: san.contains(&k.callee().expect("call form").signature()),
                        opaque,
                        targets,
                    }
                }
                StmtKind::If { .. } | StmtKind::Goto { .. } | StmtKind::Return { value: None } => Op::Nop,
            };
            ops.push(op);
        }
        let succ = cfg
            .succ
            .iter()
            .map(|ss| ss.iter().copied().filter(|&s| s < n).collect())
            .collect();
        methods.push(Method {
            params: def.params.iter().map(slot).collect(),
            slots: ls.len(),
            ops,
            succ,
            reachable: reachable_from_entry(&cfg),
        });
        locals.push(ls);
    }
    let mut loads_of = vec![Vec::new(); cells.len()];
    for (c, m, i) in loads {
        loads_of[c].push((m, i));
    }

    let facts: Vec<MethodFacts> = methods
        .iter()
        .zip(&locals)
        .map(|(m, ls)| {
            let blank = vec![0u64; m.slots * 2 * w];
            MethodFacts {
                locals: ls.clone(),
                before: vec![blank.clone(); m.ops.len()],
                after: vec![blank; m.ops.len()],
            }
        })
        .collect();
    let queued = methods.iter().map(|m| vec![false; m.ops.len()]).collect();

    let node_count = p.statement_count() as u64;
    let cell_count = methods.iter().map(|m| m.slots as u64).sum::<u64>() + cells.len() as u64 + 1;
    let budget = node_count
        .max(1)
        .saturating_mul(cell_count.saturating_mul(labels.len().max(1) as u64 * 2))
        .saturating_mul(4);

    let mut engine = Engine {
        w,
        returns: vec![vec![0; 2 * w]; methods.len()],
        fields: vec![vec![0; 2 * w]; cells.len()],
        facts,
        loads_of,
        call_sites_of,
        queue: VecDeque::new(),
        queued,
        methods: &methods,
    };
    for (m, method) in methods.iter().enumerate() {
        for i in 0..method.ops.len() {
            engine.enqueue(m, i);
        }
    }

    let mut steps = 0u64;
    while let Some((m, i)) = engine.queue.pop_front() {
        engine.queued[m][i] = false;
        steps += 1;
        if steps > budget {
            return Err(TaintError::FixpointBudgetExceeded { budget });
        }
        engine.step(m, i);
    }

    let fields = cells
        .into_iter()
        .map(|(cell, c)| {
            let v = &engine.fields[c];
            let ids = bits::statuses(v, w).map(|(k, st)| (labels[k].id, st)).collect();
            (cell, ids)
        })
        .filter(|(_, ids): &(_, BTreeMap<_, _>)| !ids.is_empty())
        .collect();
    let methods = defs.into_iter().map(|(id, _)| id).zip(engine.facts).collect();
    Ok(TaintFacts {
        labels: labels.to_vec(),
        words: w,
        methods,
        fields,
        program_digest: program_digest(p),
        steps,
    })
}
