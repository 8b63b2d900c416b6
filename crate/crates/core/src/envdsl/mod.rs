//! A small expression language for spatial profiles such as `1 + 0.5*cos(pi*x)`.
//!
//! Profiles are parsed once and evaluated at grid nodes. The grammar covers
//! real literals, the coordinates `x` (and `y` in 2D), the constants `pi` and
//! `e`, the operators `+ - * / ^`, unary negation, and the functions
//! `sin cos exp abs tanh min max`. Piecewise shapes are written with
//! `min`/`max`/`abs`.

mod expr;
mod parser;

use std::fmt;

use thiserror::Error;

pub use expr::{BinOp, Constant, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` at offset {offset} is not available in {dimension}D")]
    WrongDimension {
        offset: usize,
        name: String,
        dimension: u8,
    },
    #[error("empty profile")]
    Empty,
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(u8),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point has {got} coordinates, profile is {expected}D")]
    WrongDimension { expected: u8, got: usize },
}

/// A parsed profile together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    source: String,
    expr: Expr,
    dimension: u8,
}

impl Profile {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    /// Evaluate at a point given as `[x]` or `[x, y]`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dimension as usize {
            return Err(EvalError::WrongDimension {
                expected: self.dimension,
                got: point.len(),
            });
        }
        let y = point.get(1).copied().unwrap_or(0.0);
        self.expr.eval(point[0], y)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parse `text` as a profile over a domain of the given dimension.
pub fn parse(text: &str, dimension: u8) -> Result<Profile, ParseError> {
    if !(1..=2).contains(&dimension) {
        return Err(ParseError::BadDimension(dimension));
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let expr = parser::Parser::new(text, dimension)?.parse_all()?;
    Ok(Profile {
        source: text.to_string(),
        expr,
        dimension,
    })
}

/// Canonical fully-parenthesised rendering of a profile.
pub fn print(profile: &Profile) -> String {
    profile.expr.to_string()
}
