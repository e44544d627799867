use std::fmt::Write;

use super::{Literal, Local, Program, StmtKind};

/// Renders a program in canonical PIR form. Two-space indentation, one
/// statement per line, a blank line between classes.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, class) in p.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "class {} extends {} {{", class.name, class.superclass);
        for field in &class.fields {
            let _ = writeln!(out, "  field {} {};", field.ty, field.name);
        }
        for method in &class.methods {
            let _ = writeln!(
                out,
                "  method {} {}({}) {{",
                method.ret,
                method.name,
                join_locals(&method.params)
            );
            for (idx, stmt) in method.body.iter().enumerate() {
                let _ = writeln!(out, "    {idx}: {}", statement_text(&stmt.kind));
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}

fn join_locals(locals: &[Local]) -> String {
    locals
        .iter()
        .map(Local::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical single-line text of a statement body (without the index).
pub fn statement_text(kind: &StmtKind) -> String {
    match kind {
        StmtKind::AssignConst { lhs, value } => format!("{lhs} = {}", literal_text(value)),
        StmtKind::AssignCopy { lhs, rhs } => format!("{lhs} = {rhs}"),
        StmtKind::AssignCall {
            lhs,
            callee,
            args,
            widget,
        } => format!("{lhs} = {}", call_text(&callee.to_string(), args, widget.as_deref())),
        StmtKind::AssignFieldLoad { lhs, class, field } => format!("{lhs} = load {class}.{field}"),
        StmtKind::FieldStore { class, field, rhs } => format!("store {class}.{field} = {rhs}"),
        StmtKind::Call {
            callee,
            args,
            widget,
        } => call_text(&callee.to_string(), args, widget.as_deref()),
        StmtKind::If { cond, target } => format!("if {cond} goto {target}"),
        StmtKind::Goto { target } => format!("goto {target}"),
        StmtKind::Return { value: Some(v) } => format!("return {v}"),
        StmtKind::Return { value: None } => "return".to_string(),
    }
}

fn call_text(callee: &str, args: &[Local], widget: Option<&str>) -> String {
    let mut s = format!("call {callee}({})", join_locals(args));
    if let Some(w) = widget {
        let _ = write!(s, " @widget({})", quote(w));
    }
    s
}

fn literal_text(lit: &Literal) -> String {
    match lit {
        Literal::Str(s) => quote(s),
        Literal::Atom(a) => a.clone(),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
