use std::collections::HashSet;

use thiserror::Error;

use super::lexer::{tokenize, Tok, Token};
use super::{
    is_local_name, Callee, ClassDef, FieldDef, Literal, Local, MethodDef, Program,
    Statement, StmtKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {expected}")]
    Syntax { line: u32, col: u32, expected: String },
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("{method}: statement {stmt} jumps to invalid index {target}")]
    InvalidTarget {
        method: String,
        stmt: usize,
        target: usize,
    },
}

impl ParseError {
    /// Line and column where the error was detected, when positional.
    pub fn position(&self) -> Option<(u32, u32)> {
        match self {
            ParseError::Syntax { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}

/// Parses PIR source text into a [`Program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text).map_err(|e| ParseError::Syntax {
        line: e.span.line,
        col: e.span.col,
        expected: e.expected,
    })?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut program = Program::default();
    let mut seen = HashSet::new();
    while !parser.at_eof() {
        let class = parser.class_def()?;
        if !seen.insert(class.name.clone()) {
            return Err(ParseError::DuplicateClass(class.name));
        }
        program.classes.push(class);
    }
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn advance(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax {
            line: t.span.line,
            col: t.span.col,
            expected: format!("{expected}, found {}", t.tok.describe()),
        })
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Name(n) if n == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Punct(c) {
            self.advance();
            Ok(())
        } else {
            self.error(&format!("`{c}`"))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn qname(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => self.error(what),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) if !n.contains('.') => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => self.error(what),
        }
    }

    /// A qualified `Class.member` pair, split at the last dot.
    fn member(&mut self, what: &str) -> Result<(String, String), ParseError> {
        match &self.peek().tok {
            Tok::Name(n) if n.contains('.') => {
                let (class, member) = n.rsplit_once('.').expect("contains a dot");
                let pair = (class.to_string(), member.to_string());
                self.advance();
                Ok(pair)
            }
            _ => self.error(what),
        }
    }

    fn peek_local(&self) -> Option<Local> {
        match &self.peek().tok {
            Tok::Local(n) => Local::new(n),
            Tok::Name(n) if is_local_name(n) => Local::new(n),
            _ => None,
        }
    }

    fn local(&mut self) -> Result<Local, ParseError> {
        match self.peek_local() {
            Some(l) => {
                self.advance();
                Ok(l)
            }
            None => self.error("a local (`$name` or `pN`)"),
        }
    }

    fn index(&mut self, what: &str) -> Result<usize, ParseError> {
        match &self.peek().tok {
            Tok::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => match n.parse() {
                Ok(v) => {
                    self.advance();
                    Ok(v)
                }
                Err(_) => self.error(what),
            },
            _ => self.error(what),
        }
    }

    fn class_def(&mut self) -> Result<ClassDef, ParseError> {
        self.keyword("class")?;
        let name = self.qname("class name")?;
        self.keyword("extends")?;
        let superclass = self.qname("superclass name")?;
        self.punct('{')?;
        let mut fields = Vec::new();
        while self.is_keyword("field") {
            self.advance();
            let ty = self.qname("field type")?;
            let name = self.ident("field name")?;
            self.punct(';')?;
            fields.push(FieldDef { ty, name });
        }
        let mut methods = Vec::new();
        while self.is_keyword("method") {
            methods.push(self.method_def(&name)?);
        }
        if !self.eat_punct('}') {
            return self.error("`field`, `method` or `}`");
        }
        Ok(ClassDef {
            name,
            superclass,
            fields,
            methods,
        })
    }

    fn method_def(&mut self, class: &str) -> Result<MethodDef, ParseError> {
        self.keyword("method")?;
        let ret = self.qname("return type")?;
        let name = self.ident("method name")?;
        self.punct('(')?;
        let mut params = Vec::new();
        if !self.eat_punct(')') {
            loop {
                params.push(self.local()?);
                if self.eat_punct(')') {
                    break;
                }
                self.punct(',')?;
            }
        }
        self.punct('{')?;
        let mut body = Vec::new();
        while !self.eat_punct('}') {
            let span = self.peek().span;
            let expected = body.len();
            let idx = self.index(&format!("statement index {expected} or `}}`"))?;
            if idx != expected {
                return Err(ParseError::Syntax {
                    line: span.line,
                    col: span.col,
                    expected: format!("statement index {expected}, found `{idx}`"),
                });
            }
            self.punct(':')?;
            let kind = self.stmt_body()?;
            body.push(Statement { kind, span });
        }
        let len = body.len();
        for (i, stmt) in body.iter().enumerate() {
            if let StmtKind::If { target, .. } | StmtKind::Goto { target } = stmt.kind {
                if target >= len {
                    return Err(ParseError::InvalidTarget {
                        method: format!("{class}.{name}"),
                        stmt: i,
                        target,
                    });
                }
            }
        }
        Ok(MethodDef {
            ret,
            name,
            params,
            body,
        })
    }

    fn stmt_body(&mut self) -> Result<StmtKind, ParseError> {
        if let Some(lhs) = self.peek_local() {
            self.advance();
            self.punct('=')?;
            return self.assign_rhs(lhs);
        }
        let Tok::Name(kw) = &self.peek().tok else {
            return self.error("a statement");
        };
        match kw.as_str() {
            "store" => {
                self.advance();
                let (class, field) = self.member("`Class.field`")?;
                self.punct('=')?;
                let rhs = self.local()?;
                Ok(StmtKind::FieldStore { class, field, rhs })
            }
            "call" => {
                let (callee, args, widget) = self.call_expr()?;
                Ok(StmtKind::Call {
                    callee,
                    args,
                    widget,
                })
            }
            "if" => {
                self.advance();
                let cond = self.local()?;
                self.keyword("goto")?;
                let target = self.index("branch target index")?;
                Ok(StmtKind::If { cond, target })
            }
            "goto" => {
                self.advance();
                let target = self.index("jump target index")?;
                Ok(StmtKind::Goto { target })
            }
            "return" => {
                self.advance();
                let value = match self.peek_local() {
                    Some(l) => {
                        self.advance();
                        Some(l)
                    }
                    None => None,
                };
                Ok(StmtKind::Return { value })
            }
            _ => self.error("a statement"),
        }
    }

    fn assign_rhs(&mut self, lhs: Local) -> Result<StmtKind, ParseError> {
        if let Some(rhs) = self.peek_local() {
            self.advance();
            return Ok(StmtKind::AssignCopy { lhs, rhs });
        }
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(StmtKind::AssignConst {
                    lhs,
                    value: Literal::Str(s),
                })
            }
            Tok::Number(n) => {
                self.advance();
                Ok(StmtKind::AssignConst {
                    lhs,
                    value: Literal::Atom(n),
                })
            }
            Tok::Name(n) if n == "true" || n == "false" || n == "null" => {
                self.advance();
                Ok(StmtKind::AssignConst {
                    lhs,
                    value: Literal::Atom(n),
                })
            }
            Tok::Name(n) if n == "load" => {
                self.advance();
                let (class, field) = self.member("`Class.field`")?;
                Ok(StmtKind::AssignFieldLoad { lhs, class, field })
            }
            Tok::Name(n) if n == "call" => {
                let (callee, args, widget) = self.call_expr()?;
                Ok(StmtKind::AssignCall {
                    lhs,
                    callee,
                    args,
                    widget,
                })
            }
            _ => self.error("a literal, local, `load` or `call`"),
        }
    }

    fn call_expr(&mut self) -> Result<(Callee, Vec<Local>, Option<String>), ParseError> {
        self.keyword("call")?;
        let (class, method) = self.member("`Class.method`")?;
        self.punct('(')?;
        let mut args = Vec::new();
        if !self.eat_punct(')') {
            loop {
                args.push(self.local()?);
                if self.eat_punct(')') {
                    break;
                }
                self.punct(',')?;
            }
        }
        let widget = match &self.peek().tok {
            Tok::At(a) if a == "widget" => {
                self.advance();
                self.punct('(')?;
                let text = match &self.peek().tok {
                    Tok::Str(s) => s.clone(),
                    _ => return self.error("widget string"),
                };
                self.advance();
                self.punct(')')?;
                Some(text)
            }
            Tok::At(_) => return self.error("`@widget`"),
            _ => None,
        };
        Ok((Callee { class, method }, args, widget))
    }
}
