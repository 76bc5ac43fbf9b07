use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{DslError, Pos};
use crate::spin::SpinLabel;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// `stagelab-network`
    Header,
    Ident(String),
    Str(String),
    Num(f64),
    /// A number immediately followed by `i`.
    Imag(f64),
    Ket(Vec<SpinLabel>),
    Arrow,
    EqEq,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    At,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Header => "`stagelab-network`".into(),
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Str(s) => alloc::format!("string {s:?}"),
            Tok::Num(x) => alloc::format!("number {x}"),
            Tok::Imag(x) => alloc::format!("imaginary literal {x}i"),
            Tok::Ket(_) => "ket".into(),
            Tok::Arrow => "`->`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::At => "`@`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
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

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn err(&self, pos: Pos, expected: &str, found: impl ToString) -> DslError {
        DslError::Syntax { line: pos.line, col: pos.col, expected: expected.into(), found: found.to_string() }
    }

    fn number(&mut self, start: Pos) -> Result<Tok, DslError> {
        let mut text = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            text.push(c);
            self.bump();
        }
        if self.peek() == Some('.') {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                self.bump();
            }
        }
        if text == "." {
            return Err(self.err(start, "number", "`.`"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            // only an exponent if digits follow
            let mut look = self.chars.clone();
            look.next();
            let mut sign = None;
            if let Some(s @ ('+' | '-')) = look.peek().copied() {
                sign = Some(s);
                look.next();
            }
            if look.peek().is_some_and(|c| c.is_ascii_digit()) {
                text.push('e');
                self.bump();
                if let Some(s) = sign {
                    text.push(s);
                    self.bump();
                }
                while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                }
            }
        }
        let value: f64 = text.parse().map_err(|_| self.err(start, "number", &text))?;
        if self.peek() == Some('i') {
            let mut look = self.chars.clone();
            look.next();
            if !look.peek().is_some_and(|c| is_ident_char(*c)) {
                self.bump();
                return Ok(Tok::Imag(value));
            }
        }
        if self.peek().is_some_and(is_ident_start) {
            let (p, c) = (self.pos(), self.peek().unwrap_or(' '));
            return Err(self.err(p, "operator or delimiter after number", alloc::format!("`{c}`")));
        }
        Ok(Tok::Num(value))
    }

    fn string(&mut self, start: Pos) -> Result<Tok, DslError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err(start, "closing `\"`", "end of line")),
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => s.push(c),
                    other => {
                        let p = self.pos();
                        return Err(self.err(p, "`\\\"` or `\\\\`", other.map_or("end of input".into(), |c| alloc::format!("`\\{c}`"))));
                    }
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn ket(&mut self, start: Pos) -> Result<Tok, DslError> {
        self.bump();
        let mut labels = Vec::new();
        loop {
            let p = self.pos();
            match self.bump() {
                Some('>') => return Ok(Tok::Ket(labels)),
                Some(c) => match SpinLabel::from_symbol(c) {
                    Some(l) => labels.push(l),
                    None => return Err(self.err(p, "spin label (H V L R + -) or `>`", alloc::format!("`{c}`"))),
                },
                None => return Err(self.err(start, "`>` closing the ket", "end of input")),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, DslError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(Token { tok: Tok::Eof, pos });
        };
        let single = |t: Tok| Ok(Some(t));
        let tok = match c {
            '+' => single(Tok::Plus),
            '*' => single(Tok::Star),
            '/' => single(Tok::Slash),
            '^' => single(Tok::Caret),
            '@' => single(Tok::At),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semi),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            _ => Ok(None),
        }?;
        if let Some(tok) = tok {
            self.bump();
            return Ok(Token { tok, pos });
        }
        let tok = match c {
            '-' => {
                self.bump();
                if self.peek() == Some('>') {
                    self.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '=' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::EqEq
                } else {
                    Tok::Eq
                }
            }
            '"' => self.string(pos)?,
            '|' => self.ket(pos)?,
            c if c.is_ascii_digit() || c == '.' => self.number(pos)?,
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(c) = self.peek().filter(|c| is_ident_char(*c)) {
                    s.push(c);
                    self.bump();
                }
                if s == "stagelab" && self.peek() == Some('-') {
                    let rest: String = self.chars.clone().take(8).collect();
                    if rest == "-network" {
                        for _ in 0..8 {
                            self.bump();
                        }
                        return Ok(Token { tok: Tok::Header, pos });
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(self.err(pos, "token", alloc::format!("`{}`", other.escape_debug()))),
        };
        Ok(Token { tok, pos })
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}
