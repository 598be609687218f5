//! Solution set entropy principle engine.

pub mod cases;
pub mod check;
pub mod dsl;
pub mod kernel;
pub mod liu;
pub mod model;
pub mod oracle;
pub mod solve;
pub mod split;

pub use dsl::{format_model, parse_assumption, parse_expr, parse_model, Diagnostic};
pub use kernel::{
    Atom, AtomKind, DiffContext, Expr, KernelError, Monomial, MultiIndex, Poly, SubstitutionMap, Tree, Q,
};
pub use model::{Classification, ConstitDecl, Equation, Expanded, ModelDef, ModelError};
