//! `.sn` network description language.
//!
//! ```text
//! stagelab-network v1
//! param a = 1/sqrt(2);
//! constraint a^2 + a^2 == 1;
//! stage 0 slots 1 { A1 }
//! stage 1 slots 1 { A1, A2 }
//! transition 0 -> 1 {
//!     |H> @ A1 -> a * |H> @ A1 + a * |H> @ A2;
//! }
//! source = |H> @ A1;
//! ```
//!
//! Grammar:
//!
//! ```text
//! network    ::= header? decl*
//! header     ::= "stagelab-network" "v1"
//! decl       ::= param | constraint | stage | transition | source
//! param      ::= "param" IDENT "=" expr ";"
//! constraint ::= "constraint" expr "==" expr ";"
//! stage      ::= "stage" INT ("slots" INT)? "{" (label ("," label)*)? "}"
//! transition ::= "transition" INT "->" INT "{" rule* "}"
//! rule       ::= term "->" lincomb ";"
//! source     ::= "source" "=" lincomb ";"
//! lincomb    ::= "-"? item (("+" | "-") item)*
//! item       ::= (factor "*")? term
//! term       ::= (KET "@")? (label+ | "void")
//! label      ::= IDENT | STRING
//! expr       ::= factor (("+" | "-") factor)*
//! factor     ::= unary (("*" | "/") unary)*
//! unary      ::= ("-" | "+") unary | power
//! power      ::= atom ("^" unary)?
//! atom       ::= NUMBER | NUMBER "i" | "i" | IDENT | FUNC "(" expr ")" | "(" expr ")"
//! ```
//!
//! `KET` is `|` followed by spin labels from `H V L R + -` and `>`. `FUNC` is
//! one of `sqrt exp cos sin conj`. Comments run from `#` to the end of the
//! line. Identifiers are `[A-Za-z_][A-Za-z0-9_]*`; any other detector label is
//! written as a quoted string such as `"S+2"`. Parameters must be declared
//! before use and share one namespace with detector labels. Stages must be
//! declared before the transitions that use them. In a rule, a leading ket
//! makes the rule act on that spin state only; without one the rule moves
//! signals and carries the spin unchanged.

mod ast;
mod elaborate;
mod expr;
mod lexer;
mod parser;
mod serialize;

use alloc::collections::BTreeMap;
use alloc::string::String;
use thiserror::Error;

pub use ast::*;
pub use elaborate::{elaborate, evaluate_params, load};
pub use expr::eval;
pub use parser::{parse, parse_bytes, parse_expression};
pub use serialize::serialize;

use crate::network::NetworkError;

/// 1-based source position.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Tolerance on `constraint` declarations.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Deepest expression nesting accepted by the parser.
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: u32, col: u32, expected: String, found: String },
    #[error("{line}:{col}: undeclared identifier `{name}`")]
    UndeclaredIdentifier { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: duplicate declaration of `{name}`")]
    DuplicateDeclaration { name: String, line: u32, col: u32 },
    #[error("{line}:{col}: {message}")]
    InvalidStructure { message: String, line: u32, col: u32 },
    #[error("{line}:{col}: constraint violated (residual {residual:.3e})")]
    ConstraintViolated { line: u32, col: u32, residual: f64 },
    #[error("override of unknown parameter `{0}`")]
    UnknownOverride(String),
    #[error("{line}:{col}: expression is not finite")]
    NonFinite { line: u32, col: u32 },
    #[error("{line}:{col}: {source}")]
    Semantic { line: u32, col: u32, source: NetworkError },
}

impl DslError {
    pub(crate) fn structure(pos: Pos, message: impl Into<String>) -> Self {
        DslError::InvalidStructure { message: message.into(), line: pos.line, col: pos.col }
    }

    pub(crate) fn semantic(pos: Pos, source: impl Into<NetworkError>) -> Self {
        DslError::Semantic { line: pos.line, col: pos.col, source: source.into() }
    }
}

/// Parse and evaluate an expression over the parameters in `env`.
pub fn evaluate(text: &str, env: &BTreeMap<String, crate::C64>) -> Result<crate::C64, DslError> {
    eval(&parse_expression(text, env.keys().map(String::as_str))?, env)
}

/// Words that cannot be bare detector labels.
pub const RESERVED: [&str; 13] = [
    "param", "constraint", "stage", "slots", "transition", "source", "void", "i", "sqrt", "exp", "cos",
    "sin", "conj",
];
