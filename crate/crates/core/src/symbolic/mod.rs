//! Exact coefficient algebra and the observable expression language.

mod complex;
mod expr;
mod poly;
mod ratfun;

pub use complex::{CRat, HbarSeries};
pub use expr::{parse_observable, Expr, Ident, Scalar};
pub use poly::{gcd, rat, Monomial, Poly, Var, NVARS};
pub use ratfun::RatFun;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("syntax error at offset {position}: expected one of {}", expected.join(", "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
    },
    #[error("hbar is a formal grading symbol, not a ring element")]
    HbarInRing,
    #[error("variable `{0}` has no value at this point")]
    Unbound(String),
}
