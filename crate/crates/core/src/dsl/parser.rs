//! Recursive descent with one token of lookahead. Scope is checked while
//! parsing: parameters and stages must be declared before they are used.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{DslError, Pos, MAX_DEPTH, RESERVED};
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    params: BTreeSet<String>,
    labels: BTreeSet<String>,
    stages: BTreeMap<usize, Vec<String>>,
}

fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, expected: &str) -> Result<T, DslError> {
        let pos = self.pos();
        Err(DslError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.to_string(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, DslError> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            self.syntax(&tok.describe())
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn integer(&mut self, what: &str) -> Result<usize, DslError> {
        match *self.peek() {
            Tok::Num(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e9 => {
                self.bump();
                Ok(x as usize)
            }
            _ => self.syntax(what),
        }
    }

    fn document(&mut self) -> Result<NetworkDoc, DslError> {
        let mut doc = NetworkDoc::default();
        if *self.peek() == Tok::Header {
            self.bump();
            match self.peek() {
                Tok::Ident(v) if v == "v1" => {
                    self.bump();
                    doc.version = Some(1);
                }
                _ => return self.syntax("version `v1`"),
            }
        }
        if *self.peek() == Tok::Eof {
            return self.syntax("declaration");
        }
        while *self.peek() != Tok::Eof {
            doc.decls.push(self.decl()?);
        }
        Ok(doc)
    }

    fn decl(&mut self) -> Result<Decl, DslError> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.syntax("declaration"),
        };
        match kw.as_str() {
            "param" => self.param().map(Decl::Param),
            "constraint" => self.constraint().map(Decl::Constraint),
            "stage" => self.stage().map(Decl::Stage),
            "transition" => self.transition().map(Decl::Transition),
            "source" => self.source().map(Decl::Source),
            _ => self.syntax("declaration"),
        }
    }

    fn param(&mut self) -> Result<ParamDecl, DslError> {
        let pos = self.bump().pos;
        let name_pos = self.pos();
        let name = match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => s.clone(),
            _ => return self.syntax("parameter name"),
        };
        self.bump();
        if self.params.contains(&name) || self.labels.contains(&name) {
            return Err(DslError::DuplicateDeclaration { name, line: name_pos.line, col: name_pos.col });
        }
        self.expect(Tok::Eq)?;
        let value = self.expr()?;
        self.expect(Tok::Semi)?;
        self.params.insert(name.clone());
        Ok(ParamDecl { name, value, pos })
    }

    fn constraint(&mut self) -> Result<ConstraintDecl, DslError> {
        let pos = self.bump().pos;
        let lhs = self.expr()?;
        self.expect(Tok::EqEq)?;
        let rhs = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(ConstraintDecl { lhs, rhs, pos })
    }

    fn label(&mut self) -> Result<Label, DslError> {
        let pos = self.pos();
        let name = match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => s.clone(),
            Tok::Str(s) => s.clone(),
            _ => return self.syntax("detector label"),
        };
        self.bump();
        Ok(Label { name, pos })
    }

    fn stage(&mut self) -> Result<StageDecl, DslError> {
        let pos = self.bump().pos;
        let index_pos = self.pos();
        let index = self.integer("stage index")?;
        if self.stages.contains_key(&index) {
            return Err(DslError::DuplicateDeclaration {
                name: format!("stage {index}"),
                line: index_pos.line,
                col: index_pos.col,
            });
        }
        let mut slots = 1;
        if self.keyword("slots") {
            self.bump();
            slots = self.integer("slot count")?;
        }
        self.expect(Tok::LBrace)?;
        let mut labels: Vec<Label> = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let l = self.label()?;
                if labels.iter().any(|x| x.name == l.name) || self.params.contains(&l.name) {
                    return Err(DslError::DuplicateDeclaration { name: l.name, line: l.pos.line, col: l.pos.col });
                }
                labels.push(l);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        for l in &labels {
            self.labels.insert(l.name.clone());
        }
        self.stages.insert(index, labels.iter().map(|l| l.name.clone()).collect());
        Ok(StageDecl { index, slots, labels, pos })
    }

    fn stage_ref(&mut self) -> Result<usize, DslError> {
        let pos = self.pos();
        let n = self.integer("stage index")?;
        if !self.stages.contains_key(&n) {
            return Err(DslError::UndeclaredIdentifier { name: format!("stage {n}"), line: pos.line, col: pos.col });
        }
        Ok(n)
    }

    fn transition(&mut self) -> Result<TransitionDecl, DslError> {
        let pos = self.bump().pos;
        let from = self.stage_ref()?;
        self.expect(Tok::Arrow)?;
        let to = self.stage_ref()?;
        self.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while *self.peek() != Tok::RBrace {
            let rpos = self.pos();
            if !self.starts_term() {
                return self.syntax("rule or `}`");
            }
            let input = self.term(from)?;
            self.expect(Tok::Arrow)?;
            let output = self.lincomb(to)?;
            self.expect(Tok::Semi)?;
            rules.push(Rule { input, output, pos: rpos });
        }
        self.expect(Tok::RBrace)?;
        Ok(TransitionDecl { from, to, rules, pos })
    }

    fn source(&mut self) -> Result<SourceDecl, DslError> {
        let pos = self.bump().pos;
        self.expect(Tok::Eq)?;
        if !self.stages.contains_key(&0) {
            return Err(DslError::UndeclaredIdentifier { name: "stage 0".into(), line: pos.line, col: pos.col });
        }
        let items = self.lincomb(0)?;
        self.expect(Tok::Semi)?;
        Ok(SourceDecl { items, pos })
    }

    fn starts_term_tok(&self, t: &Tok) -> bool {
        match t {
            Tok::Ket(_) | Tok::Str(_) => true,
            Tok::Ident(s) => s == "void" || (!is_reserved(s) && !self.params.contains(s)),
            _ => false,
        }
    }

    fn starts_term(&self) -> bool {
        self.starts_term_tok(self.peek())
    }

    fn term(&mut self, stage: usize) -> Result<Term, DslError> {
        let pos = self.pos();
        let mut ket = None;
        if let Tok::Ket(k) = self.peek() {
            ket = Some((k.clone(), pos));
            self.bump();
            self.expect(Tok::At)?;
        }
        let mut detectors = Vec::new();
        if self.keyword("void") {
            self.bump();
        } else {
            loop {
                let l = self.label()?;
                if !self.stages[&stage].contains(&l.name) {
                    return Err(DslError::UndeclaredIdentifier { name: l.name, line: l.pos.line, col: l.pos.col });
                }
                detectors.push(l);
                let more = match self.peek() {
                    Tok::Str(_) => true,
                    Tok::Ident(s) => s != "void" && self.starts_term(),
                    _ => false,
                };
                if !more {
                    break;
                }
            }
        }
        Ok(Term { ket, detectors, pos })
    }

    fn lincomb(&mut self, stage: usize) -> Result<Vec<Item>, DslError> {
        let mut items = Vec::new();
        let mut negate = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            negate = true;
        }
        loop {
            let coef = if self.starts_term() {
                None
            } else {
                let c = self.factor(true)?;
                if *self.peek() != Tok::Star {
                    return self.syntax("`*` before a term");
                }
                self.bump();
                if !self.starts_term() {
                    return self.syntax("term");
                }
                Some(c)
            };
            let term = self.term(stage)?;
            items.push(Item { negate, coef, term });
            match self.peek() {
                Tok::Plus => negate = false,
                Tok::Minus => negate = true,
                _ => return Ok(items),
            }
            self.bump();
        }
    }

    fn enter(&mut self) -> Result<(), DslError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.syntax("shallower expression nesting");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.enter()?;
        let mut lhs = self.factor(false)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let pos = self.bump().pos;
            let rhs = self.factor(false)?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    /// Product level. As a coefficient, stops before a `*` that introduces a
    /// term.
    fn factor(&mut self, coefficient: bool) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            if coefficient && op == BinOp::Mul && self.starts_term_tok(self.peek2()) {
                break;
            }
            let pos = self.bump().pos;
            let rhs = self.unary()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        self.enter()?;
        let pos = self.pos();
        let out = match self.peek() {
            Tok::Minus => {
                self.bump();
                let inner = self.unary()?;
                Expr { kind: ExprKind::Neg(Box::new(inner)), pos }
            }
            Tok::Plus => {
                self.bump();
                self.unary()?
            }
            _ => {
                let base = self.atom()?;
                if *self.peek() == Tok::Caret {
                    let pos = self.bump().pos;
                    let exp = self.unary()?;
                    Expr { kind: ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)), pos }
                } else {
                    base
                }
            }
        };
        self.depth -= 1;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                ExprKind::Num(x)
            }
            Tok::Imag(x) => {
                self.bump();
                ExprKind::Imag(x)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Ident(s) if s == "i" => {
                self.bump();
                ExprKind::Imag(1.0)
            }
            Tok::Ident(s) => {
                if let Some(f) = Func::from_name(&s) {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Call(f, Box::new(arg))
                } else if self.params.contains(&s) {
                    self.bump();
                    ExprKind::Param(s)
                } else {
                    return Err(DslError::UndeclaredIdentifier { name: s, line: pos.line, col: pos.col });
                }
            }
            _ => return self.syntax("expression"),
        };
        Ok(Expr { kind, pos })
    }
}

pub fn parse(text: &str) -> Result<NetworkDoc, DslError> {
    let toks = tokenize(text)?;
    Parser {
        toks,
        at: 0,
        depth: 0,
        params: BTreeSet::new(),
        labels: BTreeSet::new(),
        stages: BTreeMap::new(),
    }
    .document()
}

/// Parse a standalone expression that may use the given parameter names.
pub fn parse_expression<'a>(text: &str, params: impl IntoIterator<Item = &'a str>) -> Result<Expr, DslError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        depth: 0,
        params: params.into_iter().map(String::from).collect(),
        labels: BTreeSet::new(),
        stages: BTreeMap::new(),
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.syntax("end of expression");
    }
    Ok(e)
}

/// Like [`parse`], for arbitrary bytes; invalid UTF-8 is a syntax error at
/// the first bad byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<NetworkDoc, DslError> {
    match core::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let good = core::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or("");
            let line = good.matches('\n').count() as u32 + 1;
            let col = good.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            Err(DslError::Syntax { line, col, expected: "UTF-8 text".into(), found: "invalid byte".into() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_expects_declaration() {
        match parse("  # nothing\n") {
            Err(DslError::Syntax { expected, .. }) => assert_eq!(expected, "declaration"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coefficient_stops_before_term() {
        let doc = parse("param a = 2; stage 0 { A, B } source = a * 3 * A B - \"B\";").unwrap();
        let Decl::Source(s) = &doc.decls[2] else { panic!() };
        assert_eq!(s.items.len(), 2);
        assert_eq!(s.items[0].term.detectors.len(), 2);
        assert!(s.items[1].negate && s.items[1].coef.is_none());
        assert!(matches!(s.items[0].coef.as_ref().unwrap().kind, ExprKind::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn undeclared_detector_has_position() {
        let err = parse("stage 0 { A1 }\nstage 1 { A1 }\ntransition 0 -> 1 {\n  A1 -> A9;\n}").unwrap_err();
        assert_eq!(err, DslError::UndeclaredIdentifier { name: "A9".into(), line: 4, col: 9 });
    }

    #[test]
    fn params_must_precede_use() {
        assert!(matches!(parse("param a = b; param b = 1;"), Err(DslError::UndeclaredIdentifier { .. })));
        assert!(matches!(parse("param a = 1; param a = 2;"), Err(DslError::DuplicateDeclaration { .. })));
        assert!(matches!(parse("param A = 1; stage 0 { A }"), Err(DslError::DuplicateDeclaration { .. })));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let mut s = String::from("param a = ");
        for _ in 0..10_000 {
            s.push('(');
        }
        assert!(matches!(parse(&s), Err(DslError::Syntax { .. })));
        let minus = "-".repeat(10_000);
        assert!(parse(&format!("param a = {minus}1;")).is_err());
    }

    #[test]
    fn invalid_utf8_position() {
        let err = parse_bytes(b"stage 0 {\n A\xff }").unwrap_err();
        assert!(matches!(err, DslError::Syntax { line: 2, col: 3, .. }));
    }

    #[test]
    fn header_version_is_checked() {
        assert!(parse("stagelab-network v1\nstage 0 { A }").is_ok());
        assert!(parse("stagelab-network v2\nstage 0 { A }").is_err());
    }
}
