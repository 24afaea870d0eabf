//! S-expression reader with 1-based line/column positions.

use super::PddlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Sexp {
    List(Vec<Sexp>, Pos),
    /// Identifier, variable (`?x`), keyword (`:x`), `-` or `=`; lower-cased.
    Sym(String, Pos),
    /// Double-quoted string, case preserved.
    Str(String, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::List(_, p) | Sexp::Sym(_, p) | Sexp::Str(_, p) => *p,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sexp::List(..) => "a list".into(),
            Sexp::Sym(s, _) => format!("`{s}`"),
            Sexp::Str(s, _) => format!("string \"{s}\""),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> PddlError {
        PddlError::parse(self.line, self.column, message)
    }

    fn read(&mut self) -> Result<Option<Sexp>, PddlError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(&c) = self.chars.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(self.error("expected `)` before end of input")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => {
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            ')' => Err(self.error("unexpected `)`")),
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error("expected closing `\"` before end of input")),
                        Some('"') => return Ok(Some(Sexp::Str(s, start))),
                        Some(c) => s.push(c),
                    }
                }
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                        break;
                    }
                    s.push(c.to_ascii_lowercase());
                    self.bump();
                }
                Ok(Some(Sexp::Sym(s, start)))
            }
        }
    }
}

/// Reads every top-level expression in `text`.
pub(crate) fn read_all(text: &str) -> Result<Vec<Sexp>, PddlError> {
    let mut reader = Reader { chars: text.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    while let Some(e) = reader.read()? {
        out.push(e);
    }
    Ok(out)
}

/// Reads exactly one top-level expression.
pub(crate) fn read_one(text: &str) -> Result<Sexp, PddlError> {
    let mut all = read_all(text)?;
    match all.len() {
        0 => Err(PddlError::parse(1, 1, "expected `(` but input is empty")),
        1 => Ok(all.remove(0)),
        _ => {
            let p = all[1].pos();
            Err(PddlError::parse(p.line, p.column, "expected end of input after the definition"))
        }
    }
}

/// End position of `text`, used for errors about missing trailing tokens.
pub(crate) fn end_pos(text: &str) -> Pos {
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Pos { line, column }
}
