//! A small checker for the DOT language (graphviz is not available in the
//! test environment). Covers the grammar subset without subgraphs and
//! ports: `[strict] (graph|digraph) [ID] { stmt_list }`.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Edge(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '/' if cs.get(i + 1) == Some(&'/') => {
                while i < cs.len() && cs[i] != '\n' {
                    i += 1;
                }
            }
            '/' if cs.get(i + 1) == Some(&'*') => {
                i += 2;
                while i + 1 < cs.len() && !(cs[i] == '*' && cs[i + 1] == '/') {
                    i += 1;
                }
                if i + 1 >= cs.len() {
                    return Err("unterminated comment".into());
                }
                i += 2;
            }
            '{' => (out.push(Tok::LBrace), i += 1).1,
            '}' => (out.push(Tok::RBrace), i += 1).1,
            '[' => (out.push(Tok::LBracket), i += 1).1,
            ']' => (out.push(Tok::RBracket), i += 1).1,
            '=' => (out.push(Tok::Eq), i += 1).1,
            ';' => (out.push(Tok::Semi), i += 1).1,
            ',' => (out.push(Tok::Comma), i += 1).1,
            '-' if cs.get(i + 1) == Some(&'>') => (out.push(Tok::Edge("->")), i += 2).1,
            '-' if cs.get(i + 1) == Some(&'-') => (out.push(Tok::Edge("--")), i += 2).1,
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match cs.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') if cs.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            c if c.is_alphabetic() || c == '_' => {
                let st = i;
                while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Id(cs[st..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let st = i;
                i += 1;
                while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Id(cs[st..i].iter().collect()));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct DotGraph {
    pub directed: bool,
    pub name: Option<String>,
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }
    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(format!("expected {t:?}, got {got:?}")),
        }
    }
    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            got => Err(format!("expected ID, got {got:?}")),
        }
    }
    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut attrs = BTreeMap::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.next();
            while self.peek() != Some(&Tok::RBracket) {
                let k = self.id()?;
                self.expect(Tok::Eq)?;
                let v = self.id()?;
                attrs.insert(k, v);
                if matches!(self.peek(), Some(Tok::Semi | Tok::Comma)) {
                    self.next();
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(attrs)
    }
}

pub fn parse_dot(src: &str) -> Result<DotGraph, String> {
    let mut p = P {
        toks: lex(src)?,
        pos: 0,
    };
    let mut g = DotGraph::default();
    let mut kw = p.id()?;
    if kw.eq_ignore_ascii_case("strict") {
        kw = p.id()?;
    }
    g.directed = match kw.to_ascii_lowercase().as_str() {
        "digraph" => true,
        "graph" => false,
        _ => return Err(format!("expected graph or digraph, got {kw}")),
    };
    if let Some(Tok::Id(_)) = p.peek() {
        g.name = Some(p.id()?);
    }
    p.expect(Tok::LBrace)?;
    let op = if g.directed { "->" } else { "--" };
    loop {
        match p.peek() {
            Some(Tok::RBrace) => {
                p.next();
                break;
            }
            Some(Tok::Semi) => {
                p.next();
            }
            Some(Tok::Id(_)) => {
                let first = p.id()?;
                let lower = first.to_ascii_lowercase();
                if matches!(lower.as_str(), "graph" | "node" | "edge")
                    && p.peek() == Some(&Tok::LBracket)
                {
                    p.attr_list()?;
                } else if p.peek() == Some(&Tok::Eq) {
                    p.next();
                    p.id()?;
                } else if let Some(Tok::Edge(e)) = p.peek().cloned() {
                    if e != op {
                        return Err(format!("edge operator {e} in a graph using {op}"));
                    }
                    let mut chain = vec![first];
                    while let Some(Tok::Edge(e)) = p.peek().cloned() {
                        if e != op {
                            return Err(format!("edge operator {e} in a graph using {op}"));
                        }
                        p.next();
                        chain.push(p.id()?);
                    }
                    let attrs = p.attr_list()?;
                    for n in &chain {
                        g.nodes.entry(n.clone()).or_default();
                    }
                    for w in chain.windows(2) {
                        g.edges.push((w[0].clone(), w[1].clone(), attrs.clone()));
                    }
                } else {
                    let attrs = p.attr_list()?;
                    g.nodes.entry(first).or_default().extend(attrs);
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    if p.pos != p.toks.len() {
        return Err("trailing input after graph".into());
    }
    Ok(g)
}

impl DotGraph {
    pub fn kinds(&self) -> BTreeSet<(String, String)> {
        self.nodes
            .iter()
            .map(|(n, a)| (n.clone(), a.get("kind").cloned().unwrap_or_default()))
            .collect()
    }
}

#[test]
fn checker_rejects_garbage() {
    assert!(parse_dot("digraph { a -> }").is_err());
    assert!(parse_dot("graph { a -> b }").is_err());
    assert!(parse_dot("digraph x { a [label=\"q\\\"x\"]; a -> b [k=v]; }").is_ok());
}
