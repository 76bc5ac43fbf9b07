use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::Pos;
use crate::spin::SpinLabel;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Cos,
    Sin,
    Conj,
}

impl Func {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sqrt" => Self::Sqrt,
            "exp" => Self::Exp,
            "cos" => Self::Cos,
            "sin" => Self::Sin,
            "conj" => Self::Conj,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sqrt => "sqrt",
            Self::Exp => "exp",
            Self::Cos => "cos",
            Self::Sin => "sin",
            Self::Conj => "conj",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(f64),
    /// `x i`; the bare unit `i` is `Imag(1.0)`.
    Imag(f64),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Label {
    pub name: String,
    pub pos: Pos,
}

/// `[|ket> @] detector detector ...`; no detectors is the void
/// configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub ket: Option<(Vec<SpinLabel>, Pos)>,
    pub detectors: Vec<Label>,
    pub pos: Pos,
}

/// One summand of a linear combination: `[-] [coef *] term`.
#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub negate: bool,
    pub coef: Option<Expr>,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub input: Term,
    pub output: Vec<Item>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDecl {
    pub lhs: Expr,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageDecl {
    pub index: usize,
    pub slots: usize,
    pub labels: Vec<Label>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDecl {
    pub from: usize,
    pub to: usize,
    pub rules: Vec<Rule>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceDecl {
    pub items: Vec<Item>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Param(ParamDecl),
    Constraint(ConstraintDecl),
    Stage(StageDecl),
    Transition(TransitionDecl),
    Source(SourceDecl),
}

/// Parsed `.sn` document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetworkDoc {
    /// Version from the `stagelab-network vN` header line, when present.
    pub version: Option<u32>,
    pub decls: Vec<Decl>,
}

impl NetworkDoc {
    pub fn params(&self) -> impl Iterator<Item = &ParamDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Param(p) => Some(p),
            _ => None,
        })
    }

    pub fn stages(&self) -> impl Iterator<Item = &StageDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Stage(s) => Some(s),
            _ => None,
        })
    }
}
