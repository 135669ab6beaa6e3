//! Canonical text form of values.
//!
//! ```text
//! (price 100)   [1 2.5 "s"]   #t #f   #u7   |odd symbol|
//! ```
//!
//! `;` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

use super::value::Value;

const SPECIAL_DECIMALS: [&str; 3] = ["+inf.0", "-inf.0", "+nan.0"];

pub(crate) fn write_value(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Boolean(true) => f.write_str("#t"),
        Value::Boolean(false) => f.write_str("#f"),
        Value::Integer(n) => write!(f, "{n}"),
        Value::Decimal(x) => write_decimal(f, x.0),
        Value::Text(s) => write_text(f, s),
        Value::Symbol(s) => write_symbol(f, s),
        Value::Unique(n) => write!(f, "#u{n}"),
        Value::Sequence(items) => {
            f.write_str("[")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write_value(f, item)?;
            }
            f.write_str("]")
        }
        Value::Record(label, fields) => {
            f.write_str("(")?;
            write_symbol(f, label)?;
            for field in fields {
                f.write_str(" ")?;
                write_value(f, field)?;
            }
            f.write_str(")")
        }
    }
}

fn write_decimal(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_nan() {
        f.write_str("+nan.0")
    } else if x == f64::INFINITY {
        f.write_str("+inf.0")
    } else if x == f64::NEG_INFINITY {
        f.write_str("-inf.0")
    } else {
        // Debug keeps a `.` or exponent, so decimals never read back as integers.
        write!(f, "{x:?}")
    }
}

fn write_text(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | '"' | ';' | '|')
}

fn looks_numeric(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+' | '-' | '.') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

fn needs_bars(s: &str) -> bool {
    s.is_empty()
        || s.starts_with('#')
        || looks_numeric(s)
        || SPECIAL_DECIMALS.contains(&s)
        || s.chars().any(|c| is_delimiter(c) || c.is_control() || c == '\\')
}

pub(crate) fn write_symbol(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if !needs_bars(s) {
        return f.write_str(s);
    }
    f.write_str("|")?;
    for c in s.chars() {
        match c {
            '|' => f.write_str("\\|")?,
            '\\' => f.write_str("\\\\")?,
            c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("|")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Parse exactly one value; surrounding whitespace and comments are allowed.
pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut p = Parser::new(src);
    p.skip_trivia();
    let v = p.value()?;
    p.skip_trivia();
    if p.peek().is_some() {
        return Err(p.error("trailing input after value"));
    }
    Ok(v)
}

/// Parse a sequence of values, each tagged with the line it starts on.
pub fn parse_values(src: &str) -> Result<Vec<(usize, Value)>, ParseError> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    loop {
        p.skip_trivia();
        if p.peek().is_none() {
            return Ok(out);
        }
        let line = p.line;
        out.push((line, p.value()?));
    }
}

impl std::str::FromStr for Value {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_value(s)
    }
}

struct Parser<'a> {
    rest: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { rest: src.chars().peekable(), line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&mut self) -> Option<char> {
        self.rest.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.rest.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.bump();
                self.skip_trivia();
                let label = match self.value()? {
                    Value::Symbol(s) => s,
                    other => return Err(self.error(format!("record label must be a symbol, got {other}"))),
                };
                let fields = self.items(')')?;
                Ok(Value::Record(label, fields))
            }
            Some('[') => {
                self.bump();
                Ok(Value::Sequence(self.items(']')?))
            }
            Some(')') | Some(']') => Err(self.error("unbalanced closing bracket")),
            Some('"') => {
                self.bump();
                Ok(Value::Text(self.quoted('"')?))
            }
            Some('|') => {
                self.bump();
                Ok(Value::Symbol(self.quoted('|')?))
            }
            Some(_) => self.atom(),
        }
    }

    fn items(&mut self, close: char) -> Result<Vec<Value>, ParseError> {
        let mut items = Vec::new();
        loop {
            self.skip_trivia();
            match self.peek() {
                None => return Err(self.error(format!("missing `{close}`"))),
                Some(c) if c == close => {
                    self.bump();
                    return Ok(items);
                }
                Some(_) => items.push(self.value()?),
            }
        }
    }

    fn quoted(&mut self, end: char) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(format!("unterminated `{end}`"))),
                Some(c) if c == end => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('u') => s.push(self.unicode_escape()?),
                    Some(c @ ('"' | '\\' | '|')) => s.push(c),
                    _ => return Err(self.error("bad escape")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn unicode_escape(&mut self) -> Result<char, ParseError> {
        if self.bump() != Some('{') {
            return Err(self.error("expected `{` after \\u"));
        }
        let mut hex = String::new();
        loop {
            match self.bump() {
                Some('}') => break,
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(self.error("bad \\u escape")),
            }
        }
        u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32).ok_or_else(|| self.error("bad \\u escape"))
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let mut tok = String::new();
        while let Some(c) = self.peek() {
            if is_delimiter(c) {
                break;
            }
            tok.push(c);
            self.bump();
        }
        match tok.as_str() {
            "#t" => return Ok(Value::Boolean(true)),
            "#f" => return Ok(Value::Boolean(false)),
            "+inf.0" => return Ok(Value::decimal(f64::INFINITY)),
            "-inf.0" => return Ok(Value::decimal(f64::NEG_INFINITY)),
            "+nan.0" => return Ok(Value::decimal(f64::NAN)),
            _ => {}
        }
        if let Some(serial) = tok.strip_prefix("#u") {
            return serial.parse().map(Value::Unique).map_err(|_| self.error(format!("bad unique `{tok}`")));
        }
        if tok.starts_with('#') {
            return Err(self.error(format!("unknown token `{tok}`")));
        }
        if looks_numeric(&tok) {
            if let Ok(n) = tok.parse::<i64>() {
                return Ok(Value::Integer(n));
            }
            if tok.contains(['.', 'e', 'E']) {
                if let Ok(x) = tok.parse::<f64>() {
                    return Ok(Value::decimal(x));
                }
            }
            return Err(self.error(format!("bad number `{tok}`")));
        }
        Ok(Value::Symbol(tok))
    }
}
