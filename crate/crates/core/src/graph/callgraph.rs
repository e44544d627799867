use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ir::{Callee, Location, MethodId, Program};

/// Resolved target of a call site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CallTarget {
    Method(MethodId),
    /// Code outside the program, identified by the written signature.
    Opaque(String),
}

/// Class-hierarchy call graph. Context-insensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub methods: BTreeSet<MethodId>,
    pub opaque: BTreeSet<String>,
    pub edges: BTreeMap<Location, BTreeSet<CallTarget>>,
}

impl CallGraph {
    pub fn targets(&self, site: &Location) -> impl Iterator<Item = &CallTarget> {
        self.edges.get(site).into_iter().flatten()
    }

    /// Call sites whose targets include `m`, in location order.
    pub fn callers_of(&self, m: &MethodId) -> Vec<&Location> {
        self.edges
            .iter()
            .filter(|(_, ts)| ts.iter().any(|t| matches!(t, CallTarget::Method(id) if id == m)))
            .map(|(site, _)| site)
            .collect()
    }
}

struct Hierarchy<'p> {
    program: &'p Program,
    children: HashMap<&'p str, Vec<&'p str>>,
}

impl<'p> Hierarchy<'p> {
    fn new(program: &'p Program) -> Self {
        let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
        for c in &program.classes {
            children.entry(c.superclass.as_str()).or_default().push(&c.name);
        }
        Hierarchy { program, children }
    }

    /// `class.method/arity` under class-hierarchy analysis: the nearest
    /// definition in `class` or its superclasses, plus every override in a
    /// (transitive) subclass present in the program.
    fn resolve(&self, callee: &Callee, arity: usize) -> BTreeSet<CallTarget> {
        let mut out = BTreeSet::new();
        let Some(_) = self.program.class(&callee.class) else {
            out.insert(CallTarget::Opaque(callee.signature()));
            return out;
        };

        let mut cursor = callee.class.as_str();
        let mut hops = 0;
        loop {
            match self.program.class(cursor) {
                Some(c) if hops <= self.program.classes.len() => {
                    if c.find_method(&callee.method, arity).is_some() {
                        out.insert(CallTarget::Method(MethodId::new(cursor, &callee.method, arity)));
                        break;
                    }
                    cursor = &c.superclass;
                    hops += 1;
                }
                _ => {
                    out.insert(CallTarget::Opaque(callee.signature()));
                    break;
                }
            }
        }

        let mut stack = vec![callee.class.as_str()];
        let mut seen = BTreeSet::from([callee.class.as_str()]);
        while let Some(c) = stack.pop() {
            for &sub in self.children.get(c).into_iter().flatten() {
                if !seen.insert(sub) {
                    continue;
                }
                stack.push(sub);
                let class = self.program.class(sub).expect("child classes are in the program");
                if class.find_method(&callee.method, arity).is_some() {
                    out.insert(CallTarget::Method(MethodId::new(sub, &callee.method, arity)));
                }
            }
        }
        out
    }
}

pub fn build_call_graph(p: &Program) -> CallGraph {
    let hierarchy = Hierarchy::new(p);
    let mut cg = CallGraph::default();
    for (id, m) in p.methods() {
        cg.methods.insert(id.clone());
        for (index, stmt) in m.body.iter().enumerate() {
            let Some(callee) = stmt.kind.callee() else { continue };
            let targets = hierarchy.resolve(callee, stmt.kind.args().len());
            for t in &targets {
                if let CallTarget::Opaque(sig) = t {
                    cg.opaque.insert(sig.clone());
                }
            }
            cg.edges.insert(id.at(index), targets);
        }
    }
    cg
}
