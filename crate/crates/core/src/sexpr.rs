//! Minimal s-expression reader shared by the signature, term and rules file
//! formats. `;` starts a line comment; strings use `\"` and `\\` escapes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom { text: String, line: usize, col: usize },
    Str { text: String, line: usize, col: usize },
    List { items: Vec<Sexpr>, line: usize, col: usize },
}

impl Sexpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexpr::Atom { line, col, .. }
            | Sexpr::Str { line, col, .. }
            | Sexpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.pos();
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn items(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            _ => None,
        }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<Sexpr> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err(self.error("unclosed `(`")),
                        Some(b')') => {
                            self.bump();
                            return Ok(Sexpr::List { items, line, col });
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => Err(self.error("unexpected `)`")),
            Some(b'"') => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error("unterminated string literal")),
                        Some(b'"') => return Ok(Sexpr::Str { text, line, col }),
                        Some(b'\\') => match self.bump() {
                            Some(b'"') => text.push('"'),
                            Some(b'\\') => text.push('\\'),
                            _ => return Err(self.error("invalid escape in string literal")),
                        },
                        Some(c) => text.push(c as char),
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b';' || c == b'"' {
                        break;
                    }
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| self.error("invalid UTF-8 in atom"))?
                    .to_string();
                Ok(Sexpr::Atom { text, line, col })
            }
        }
    }
}

/// Read a single s-expression; trailing input is an error.
pub fn parse_one(src: &str) -> Result<Sexpr> {
    let mut r = Reader::new(src);
    let e = r.read()?;
    r.skip_trivia();
    if r.peek().is_some() {
        return Err(r.error("trailing input after s-expression"));
    }
    Ok(e)
}

/// Read a whole file as a sequence of s-expressions.
pub fn parse_many(src: &str) -> Result<Vec<Sexpr>> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}
