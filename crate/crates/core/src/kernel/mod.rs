//! Exact rational-function algebra over jet-space atoms.

pub mod atom;
pub mod diff;
pub mod expr;
pub mod poly;
pub mod tree;

use thiserror::Error;

pub use atom::{Atom, AtomKind, MultiIndex};
pub use diff::DiffContext;
pub use expr::{Expr, SubstitutionMap};
pub use poly::{q, qr, Monomial, Poly, Q};
pub use tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("denominator normalizes to zero")]
    DivisionByZeroExpr,
    #[error("constitutive symbol `{0}` has no declaration")]
    UnknownConstitSym(String),
    #[error("unknown independent variable `{0}`")]
    UnknownIndependent(String),
    #[error("denominator contains `{0}`")]
    NotPolynomialInVars(Atom),
    #[error("denominator vanishes at the evaluation point")]
    DenominatorVanishes,
    #[error("no value assigned to `{0}`")]
    MissingAssignment(Atom),
    #[error("derivative operator needs a model context")]
    DerivativeWithoutContext,
}

impl KernelError {
    pub fn code(&self) -> &'static str {
        match self {
            KernelError::DivisionByZeroExpr => "E100",
            KernelError::UnknownConstitSym(_) => "E101",
            KernelError::UnknownIndependent(_) => "E102",
            KernelError::NotPolynomialInVars(_) => "E103",
            KernelError::DenominatorVanishes => "E104",
            KernelError::MissingAssignment(_) => "E105",
            KernelError::DerivativeWithoutContext => "E106",
        }
    }
}
