use super::Span;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Identifier, possibly dotted (`com.app.Main`, `p0`, `call`).
    Name(String),
    /// `$name`
    Local(String),
    /// `-?digits(.digits)?`
    Number(String),
    /// Unescaped string contents.
    Str(String),
    /// `@name`
    At(String),
    Punct(char),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Local(n) => format!("`{n}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::At(n) => format!("`@{n}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub span: Span,
    pub expected: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }

    fn take_while(&mut self, out: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let span = cur.span();
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = if ident_start(c) {
            Tok::Name(lex_dotted(&mut cur)?)
        } else if c == '$' {
            cur.bump();
            if !cur.peek().is_some_and(ident_start) {
                return Err(LexError {
                    span: cur.span(),
                    expected: "identifier after `$`".into(),
                });
            }
            let mut name = String::from("$");
            cur.take_while(&mut name, ident_continue);
            Tok::Local(name)
        } else if c == '@' {
            cur.bump();
            if !cur.peek().is_some_and(ident_start) {
                return Err(LexError {
                    span: cur.span(),
                    expected: "annotation name after `@`".into(),
                });
            }
            let mut name = String::new();
            cur.take_while(&mut name, ident_continue);
            Tok::At(name)
        } else if c.is_ascii_digit() || c == '-' {
            Tok::Number(lex_number(&mut cur)?)
        } else if c == '"' {
            Tok::Str(lex_string(&mut cur)?)
        } else if "{}():;=,.".contains(c) {
            cur.bump();
            Tok::Punct(c)
        } else {
            return Err(LexError {
                span,
                expected: format!("a token, found {c:?}"),
            });
        };
        out.push(Token { tok, span });
    }
}

fn lex_dotted(cur: &mut Cursor<'_>) -> Result<String, LexError> {
    let mut name = String::new();
    loop {
        cur.take_while(&mut name, ident_continue);
        if cur.peek() != Some('.') {
            return Ok(name);
        }
        cur.bump();
        name.push('.');
        if !cur.peek().is_some_and(ident_start) {
            return Err(LexError {
                span: cur.span(),
                expected: "identifier after `.`".into(),
            });
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<String, LexError> {
    let mut text = String::new();
    if cur.peek() == Some('-') {
        text.push('-');
        cur.bump();
    }
    let before = text.len();
    cur.take_while(&mut text, |c| c.is_ascii_digit());
    if text.len() == before {
        return Err(LexError {
            span: cur.span(),
            expected: "digit".into(),
        });
    }
    if cur.peek() == Some('.') {
        text.push('.');
        cur.bump();
        let before = text.len();
        cur.take_while(&mut text, |c| c.is_ascii_digit());
        if text.len() == before {
            return Err(LexError {
                span: cur.span(),
                expected: "digit after decimal point".into(),
            });
        }
    }
    Ok(text)
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<String, LexError> {
    cur.bump();
    let mut text = String::new();
    loop {
        let span = cur.span();
        match cur.bump() {
            None => {
                return Err(LexError {
                    span,
                    expected: "closing `\"`".into(),
                })
            }
            Some('"') => return Ok(text),
            Some('\\') => {
                let esc = cur.bump();
                match esc {
                    Some('"') => text.push('"'),
                    Some('\\') => text.push('\\'),
                    Some('n') => text.push('\n'),
                    Some('t') => text.push('\t'),
                    Some('r') => text.push('\r'),
                    Some('u') => text.push(lex_unicode_escape(cur, span)?),
                    _ => {
                        return Err(LexError {
                            span,
                            expected: "escape sequence (\\\" \\\\ \\n \\t \\r \\u{..})".into(),
                        })
                    }
                }
            }
            Some(c) => text.push(c),
        }
    }
}

fn lex_unicode_escape(cur: &mut Cursor<'_>, span: Span) -> Result<char, LexError> {
    let bad = || LexError {
        span,
        expected: "unicode escape `\\u{HEX}`".into(),
    };
    if cur.bump() != Some('{') {
        return Err(bad());
    }
    let mut hex = String::new();
    cur.take_while(&mut hex, |c| c.is_ascii_hexdigit());
    if cur.bump() != Some('}') || hex.is_empty() || hex.len() > 6 {
        return Err(bad());
    }
    u32::from_str_radix(&hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(bad)
}
