//! Brute-force reference semantics for taint and slicing.
//!
//! The taint oracle enumerates every control-flow path of every method and
//! simulates it. A value is a set of `(source, sanitized)` pairs, where
//! `sanitized` records whether the dependence chain that brought this
//! source here went through a sanitizer call. Nothing is merged along the
//! way; statuses are only read off at the end. Method entries, method
//! returns and fields are global sets iterated to a fixpoint, which matches
//! the context-insensitive, field-based model.

use std::collections::{BTreeMap, BTreeSet};

use pdaudit::graph::DepGraph;
use pdaudit::ir::{Local, Location, MethodDef, MethodId, Program, StmtKind};
use pdaudit::registry::{Registries, SourceId, SourceLabel};
use pdaudit::taint::Status;

pub type Value = BTreeSet<(SourceId, bool)>;
type Env = BTreeMap<Local, Value>;

#[derive(Default, Clone, PartialEq)]
struct Globals {
    entry: BTreeMap<(MethodId, usize), Value>,
    ret: BTreeMap<MethodId, Value>,
    fields: BTreeMap<(String, String), Value>,
}

/// Per-statement union of path states, before the statement runs.
pub struct OracleFacts {
    pub before: BTreeMap<Location, BTreeMap<Local, Value>>,
}

impl OracleFacts {
    /// Collapses each value to one status per source: `Pseudonymized` only
    /// when every chain was sanitized.
    pub fn statuses_at(&self, loc: &Location) -> BTreeMap<(Local, SourceId), Status> {
        let mut out = BTreeMap::new();
        if let Some(env) = self.before.get(loc) {
            for (local, v) in env {
                for &(id, sanitized) in v {
                    let st = if sanitized {
                        Status::Pseudonymized
                    } else {
                        Status::Raw
                    };
                    let e = out.entry((local.clone(), id)).or_insert(st);
                    if st == Status::Raw {
                        *e = Status::Raw;
                    }
                }
            }
        }
        out
    }

    /// Union of the argument values of the statement at `loc`.
    pub fn args_at(&self, p: &Program, loc: &Location) -> Value {
        let mut v = Value::new();
        let Some(env) = self.before.get(loc) else { return v };
        for a in p.statement(loc).unwrap().kind.args() {
            if let Some(x) = env.get(a) {
                v.extend(x.iter().copied());
            }
        }
        v
    }
}

fn program_method<'p>(p: &'p Program, class: &str, name: &str, arity: usize) -> Option<(MethodId, &'p MethodDef)> {
    let c = p.class(class)?;
    let m = c.methods.iter().find(|m| m.name == name && m.params.len() == arity)?;
    Some((MethodId::new(class, name, arity), m))
}

fn field_cell(p: &Program, class: &str, field: &str) -> (String, String) {
    // Walk up to the declaring class; undeclared fields stay where named.
    let mut cur = class.to_string();
    let mut seen = BTreeSet::new();
    while let Some(c) = p.class(&cur) {
        if c.fields.iter().any(|f| f.name == field) {
            return (cur, field.to_string());
        }
        if !seen.insert(cur.clone()) {
            break;
        }
        cur = c.superclass.clone();
    }
    (class.to_string(), field.to_string())
}

struct Run<'a> {
    p: &'a Program,
    regs: &'a Registries,
    labels: BTreeMap<Location, SourceId>,
    g: Globals,
    next: Globals,
    before: BTreeMap<Location, BTreeMap<Local, Value>>,
}

impl Run<'_> {
    fn exec(&mut self, mid: &MethodId, m: &MethodDef, i: usize, env: &mut Env) {
        let loc = mid.at(i);
        let slot = self.before.entry(loc.clone()).or_default();
        for (l, v) in env.iter() {
            slot.entry(l.clone()).or_default().extend(v.iter().copied());
        }
        let get = |env: &Env, l: &Local| env.get(l).cloned().unwrap_or_default();
        match &m.body[i].kind {
            StmtKind::AssignConst { lhs, .. } => {
                env.insert(lhs.clone(), Value::new());
            }
            StmtKind::AssignCopy { lhs, rhs } => {
                let v = get(env, rhs);
                env.insert(lhs.clone(), v);
            }
            StmtKind::AssignFieldLoad { lhs, class, field } => {
                let v = self
                    .g
                    .fields
                    .get(&field_cell(self.p, class, field))
                    .cloned()
                    .unwrap_or_default();
                env.insert(lhs.clone(), v);
            }
            StmtKind::FieldStore { class, field, rhs } => {
                let v = get(env, rhs);
                self.next
                    .fields
                    .entry(field_cell(self.p, class, field))
                    .or_default()
                    .extend(v);
            }
            StmtKind::AssignCall { callee, args, .. } | StmtKind::Call { callee, args, .. } => {
                let arg_vals: Vec<Value> = args.iter().map(|a| get(env, a)).collect();
                let all_args: Value = arg_vals.iter().flatten().copied().collect();
                let target = program_method(self.p, &callee.class, &callee.method, args.len());
                let mut returned = Value::new();
                if let Some((tid, _)) = &target {
                    for (k, v) in arg_vals.iter().enumerate() {
                        self.next
                            .entry
                            .entry((tid.clone(), k))
                            .or_default()
                            .extend(v.iter().copied());
                    }
                    returned = self.g.ret.get(tid).cloned().unwrap_or_default();
                }
                let sig = callee.signature();
                let result: Value = if let Some(&id) = self.labels.get(&loc) {
                    [(id, false)].into()
                } else if self.regs.sanitizers.contains(&sig) {
                    all_args
                        .iter()
                        .chain(&returned)
                        .map(|&(id, _)| (id, true))
                        .collect()
                } else if target.is_some() {
                    returned
                } else {
                    all_args
                };
                if let StmtKind::AssignCall { lhs, .. } = &m.body[i].kind {
                    env.insert(lhs.clone(), result);
                }
            }
            StmtKind::Return { value: Some(v) } => {
                let v = get(env, v);
                self.next.ret.entry(mid.clone()).or_default().extend(v);
            }
            StmtKind::Return { value: None } | StmtKind::If { .. } | StmtKind::Goto { .. } => {}
        }
    }

    /// Depth-first enumeration of every path from statement 0. Loop-free
    /// bodies only.
    fn paths(&mut self, mid: &MethodId, m: &MethodDef, i: usize, mut env: Env, depth: usize) {
        assert!(depth <= m.body.len(), "cycle in a body given to the path oracle");
        if i >= m.body.len() {
            return;
        }
        self.exec(mid, m, i, &mut env);
        for s in m.body[i].kind.successors(i, m.body.len()) {
            self.paths(mid, m, s, env.clone(), depth + 1);
        }
    }
}

/// All-paths taint semantics of a loop-free program.
pub fn taint_oracle(p: &Program, regs: &Registries, labels: &[SourceLabel]) -> OracleFacts {
    let mut run = Run {
        p,
        regs,
        labels: labels.iter().map(|l| (l.location.clone(), l.id)).collect(),
        g: Globals::default(),
        next: Globals::default(),
        before: BTreeMap::new(),
    };
    let methods: Vec<(MethodId, &MethodDef)> = p
        .classes
        .iter()
        .flat_map(|c| {
            c.methods
                .iter()
                .map(move |m| (MethodId::new(c.name.clone(), m.name.clone(), m.params.len()), m))
        })
        .collect();
    loop {
        run.before.clear();
        run.next = run.g.clone();
        for (mid, m) in &methods {
            let mut env = Env::new();
            for k in 0..m.params.len() {
                let v = run.g.entry.get(&(mid.clone(), k)).cloned().unwrap_or_default();
                env.insert(Local::param(k), v);
            }
            run.paths(mid, m, 0, env, 0);
        }
        if run.next == run.g {
            break;
        }
        run.g = run.next.clone();
    }
    // Drop empty entries so that comparisons only see real facts.
    for env in run.before.values_mut() {
        env.retain(|_, v| !v.is_empty());
    }
    OracleFacts { before: run.before }
}

/// Brute-force closure: repeatedly add successors until nothing changes.
pub fn closure(g: &DepGraph, start: usize) -> BTreeSet<Location> {
    let n = g.node_count();
    let mut reach = vec![false; n];
    reach[start] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !reach[v] {
                continue;
            }
            for &(w, _) in g.successors(v) {
                if !reach[w] {
                    reach[w] = true;
                    changed = true;
                }
            }
        }
    }
    (0..n).filter(|&v| reach[v]).map(|v| g.location(v).clone()).collect()
}
