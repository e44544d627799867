use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{Local, MethodDef, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub class: String,
    pub method: Option<String>,
    pub index: Option<usize>,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}", self.class)?;
        if let Some(m) = &self.method {
            write!(f, ".{m}")?;
        }
        if let Some(i) = self.index {
            write!(f, ":{i}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Structural checks beyond what the grammar enforces. The result is sorted
/// by (class, method, index).
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |class: &str, method: Option<&str>, index, severity, message: String| {
        out.push(Diagnostic {
            class: class.to_string(),
            method: method.map(str::to_string),
            index,
            severity,
            message,
        })
    };

    let supers: HashMap<&str, &str> = p
        .classes
        .iter()
        .map(|c| (c.name.as_str(), c.superclass.as_str()))
        .collect();

    for class in &p.classes {
        let mut cursor = class.superclass.as_str();
        let mut steps = 0;
        while let Some(next) = supers.get(cursor) {
            if cursor == class.name || steps > supers.len() {
                push(
                    &class.name,
                    None,
                    None,
                    Severity::Error,
                    "cyclic class hierarchy".into(),
                );
                break;
            }
            cursor = next;
            steps += 1;
        }

        let mut fields = HashSet::new();
        for field in &class.fields {
            if !fields.insert(field.name.as_str()) {
                push(
                    &class.name,
                    None,
                    None,
                    Severity::Error,
                    format!("duplicate field `{}`", field.name),
                );
            }
        }

        let mut sigs = HashSet::new();
        for method in &class.methods {
            let name = Some(method.name.as_str());
            if !sigs.insert((method.name.as_str(), method.arity())) {
                push(
                    &class.name,
                    name,
                    None,
                    Severity::Error,
                    format!("duplicate method `{}` with arity {}", method.name, method.arity()),
                );
            }
            for (i, param) in method.params.iter().enumerate() {
                if *param != Local::param(i) {
                    push(
                        &class.name,
                        name,
                        None,
                        Severity::Error,
                        format!("parameter {i} must be named `p{i}`, found `{param}`"),
                    );
                }
            }
            for (index, message) in method_warnings(method) {
                push(&class.name, name, Some(index), Severity::Warning, message);
            }
        }
    }
    out.sort();
    out
}

/// Reads of locals that no path assigns, and fall-through off the end.
fn method_warnings(m: &MethodDef) -> Vec<(usize, String)> {
    let n = m.body.len();
    if n == 0 {
        return Vec::new();
    }
    // may-be-assigned sets on entry to each statement; None = unreachable
    let mut entry: Vec<Option<BTreeSet<&Local>>> = vec![None; n];
    entry[0] = Some(m.params.iter().collect());
    let mut work = vec![0usize];
    while let Some(i) = work.pop() {
        let mut out = entry[i].clone().expect("queued statements are reached");
        if let Some(d) = m.body[i].kind.def() {
            out.insert(d);
        }
        for s in m.body[i].kind.successors(i, n) {
            if s >= n {
                continue;
            }
            let changed = match &mut entry[s] {
                None => {
                    entry[s] = Some(out.clone());
                    true
                }
                Some(set) => {
                    let before = set.len();
                    set.extend(out.iter().copied());
                    set.len() != before
                }
            };
            if changed && !work.contains(&s) {
                work.push(s);
            }
        }
    }

    let mut warnings = Vec::new();
    for (i, stmt) in m.body.iter().enumerate() {
        let Some(assigned) = &entry[i] else { continue };
        let mut reported = HashSet::new();
        for used in stmt.kind.uses() {
            if !assigned.contains(used) && reported.insert(used) {
                warnings.push((i, format!("`{used}` is read but never assigned on any path")));
            }
        }
        if stmt.kind.successors(i, n).contains(&n) && !matches!(stmt.kind, super::StmtKind::Return { .. }) {
            warnings.push((i, "control falls off the end of the method".into()));
        }
    }
    warnings
}
