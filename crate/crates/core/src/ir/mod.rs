//! The textual program intermediate representation (PIR).
//!
//! A [`Program`] is a list of classes, each holding fields and methods whose
//! bodies are dense, indexed three-address statements. Every analysis in this
//! crate consumes a parsed `Program`; nothing is mutated after parsing.

mod lexer;
mod parser;
mod printer;
mod validate;

use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};

pub use parser::{parse_program, ParseError};
pub use printer::{print_program, statement_text};
pub use validate::{validate, Diagnostic, Severity};

/// Source position of a statement, 1-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub superclass: String,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<MethodDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    /// Declared return type, kept only so printing is faithful.
    pub ret: String,
    pub name: String,
    pub params: Vec<Local>,
    pub body: Vec<Statement>,
}

/// A local variable: either `$name` or a parameter `pN`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct Local(String);

impl Local {
    /// Returns `None` unless `text` is a well-formed local name.
    pub fn new(text: &str) -> Option<Local> {
        if is_local_name(text) {
            Some(Local(text.to_string()))
        } else {
            None
        }
    }

    /// The `i`-th formal parameter, `p{i}`.
    pub fn param(i: usize) -> Local {
        Local(format!("p{i}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Parameter position if this local is named `pN`.
    pub fn param_index(&self) -> Option<usize> {
        self.0.strip_prefix('p').and_then(|d| d.parse().ok())
    }
}

impl fmt::Display for Local {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_local_name(text: &str) -> bool {
    if let Some(rest) = text.strip_prefix('$') {
        is_ident(rest)
    } else if let Some(digits) = text.strip_prefix('p') {
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    } else {
        false
    }
}

pub(crate) fn is_ident(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// True for dotted names such as `com.app.Main`.
pub fn is_qualified_name(text: &str) -> bool {
    !text.is_empty() && text.split('.').all(is_ident)
}

/// Target of a call: a class name and a method name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Callee {
    pub class: String,
    pub method: String,
}

impl Callee {
    pub fn new(class: impl Into<String>, method: impl Into<String>) -> Self {
        Callee {
            class: class.into(),
            method: method.into(),
        }
    }

    /// Fully qualified signature, `class.method`, as used by the registries.
    pub fn signature(&self) -> String {
        format!("{}.{}", self.class, self.method)
    }
}

impl fmt::Display for Callee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.method)
    }
}

/// Literals are uninterpreted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    /// A double-quoted string, stored unescaped.
    Str(String),
    /// A bare numeric or keyword literal (`42`, `-1.5`, `true`, `null`).
    Atom(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    AssignConst {
        lhs: Local,
        value: Literal,
    },
    AssignCopy {
        lhs: Local,
        rhs: Local,
    },
    AssignCall {
        lhs: Local,
        callee: Callee,
        args: Vec<Local>,
        widget: Option<String>,
    },
    AssignFieldLoad {
        lhs: Local,
        class: String,
        field: String,
    },
    FieldStore {
        class: String,
        field: String,
        rhs: Local,
    },
    Call {
        callee: Callee,
        args: Vec<Local>,
        widget: Option<String>,
    },
    If {
        cond: Local,
        target: usize,
    },
    Goto {
        target: usize,
    },
    Return {
        value: Option<Local>,
    },
}

impl StmtKind {
    /// The local this statement writes, if any.
    pub fn def(&self) -> Option<&Local> {
        match self {
            StmtKind::AssignConst { lhs, .. }
            | StmtKind::AssignCopy { lhs, .. }
            | StmtKind::AssignCall { lhs, .. }
            | StmtKind::AssignFieldLoad { lhs, .. } => Some(lhs),
            _ => None,
        }
    }

    /// Locals read by this statement, in operand order.
    pub fn uses(&self) -> Vec<&Local> {
        match self {
            StmtKind::AssignCopy { rhs, .. } | StmtKind::FieldStore { rhs, .. } => vec![rhs],
            StmtKind::AssignCall { args, .. } | StmtKind::Call { args, .. } => args.iter().collect(),
            StmtKind::If { cond, .. } => vec![cond],
            StmtKind::Return { value: Some(v) } => vec![v],
            _ => Vec::new(),
        }
    }

    pub fn callee(&self) -> Option<&Callee> {
        match self {
            StmtKind::AssignCall { callee, .. } | StmtKind::Call { callee, .. } => Some(callee),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Local] {
        match self {
            StmtKind::AssignCall { args, .. } | StmtKind::Call { args, .. } => args,
            _ => &[],
        }
    }

    pub fn widget(&self) -> Option<&str> {
        match self {
            StmtKind::AssignCall { widget, .. } | StmtKind::Call { widget, .. } => widget.as_deref(),
            _ => None,
        }
    }

    pub fn is_call(&self) -> bool {
        self.callee().is_some()
    }

    /// Control-flow successors of statement `index` in a body of `len`
    /// statements. `len` itself denotes the synthetic exit.
    pub fn successors(&self, index: usize, len: usize) -> Vec<usize> {
        match self {
            StmtKind::If { target, .. } => {
                if *target == index + 1 {
                    vec![index + 1]
                } else {
                    vec![index + 1, *target]
                }
            }
            StmtKind::Goto { target } => vec![*target],
            StmtKind::Return { .. } => vec![len],
            _ => vec![index + 1],
        }
    }
}

/// A statement together with its source position. Equality ignores the
/// position so that re-parsed programs compare structurally.
#[derive(Debug, Clone, Eq)]
pub struct Statement {
    pub kind: StmtKind,
    pub span: Span,
}

impl Statement {
    pub fn new(kind: StmtKind) -> Self {
        Statement {
            kind,
            span: Span::default(),
        }
    }
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<StmtKind> for Statement {
    fn from(kind: StmtKind) -> Self {
        Statement::new(kind)
    }
}

/// Identifies a method: its class plus the (name, arity) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct MethodId {
    pub class: String,
    pub name: String,
    pub arity: usize,
}

impl MethodId {
    pub fn new(class: impl Into<String>, name: impl Into<String>, arity: usize) -> Self {
        MethodId {
            class: class.into(),
            name: name.into(),
            arity,
        }
    }

    pub fn at(&self, index: usize) -> Location {
        Location {
            method: self.clone(),
            index,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.name)
    }
}

/// A statement location. Ordered by (class, method name, arity, index),
/// which is the canonical order used for ids, sorting and tie-breaks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    pub method: MethodId,
    pub index: usize,
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Location", 4)?;
        st.serialize_field("class", &self.method.class)?;
        st.serialize_field("method", &self.method.name)?;
        st.serialize_field("arity", &self.method.arity)?;
        st.serialize_field("index", &self.index)?;
        st.end()
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.method, self.index)
    }
}

impl MethodDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

impl ClassDef {
    pub fn method_id(&self, m: &MethodDef) -> MethodId {
        MethodId::new(&self.name, &m.name, m.arity())
    }

    pub fn find_method(&self, name: &str, arity: usize) -> Option<&MethodDef> {
        self.methods
            .iter()
            .find(|m| m.name == name && m.arity() == arity)
    }
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn method(&self, id: &MethodId) -> Option<&MethodDef> {
        self.class(&id.class)?.find_method(&id.name, id.arity)
    }

    pub fn statement(&self, loc: &Location) -> Option<&Statement> {
        self.method(&loc.method)?.body.get(loc.index)
    }

    /// All methods paired with their ids, sorted by id.
    pub fn methods(&self) -> Vec<(MethodId, &MethodDef)> {
        let mut out: Vec<_> = self
            .classes
            .iter()
            .flat_map(|c| c.methods.iter().map(move |m| (c.method_id(m), m)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Every statement location in canonical order.
    pub fn locations(&self) -> Vec<Location> {
        self.methods()
            .into_iter()
            .flat_map(|(id, m)| (0..m.body.len()).map(move |i| id.at(i)))
            .collect()
    }

    pub fn statement_count(&self) -> usize {
        self.classes
            .iter()
            .flat_map(|c| &c.methods)
            .map(|m| m.body.len())
            .sum()
    }
}
