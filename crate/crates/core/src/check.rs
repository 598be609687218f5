//! Candidate constitutive functions: bindings files and constraint checks.
//!
//! A bindings file has one directive per line, `#` starts a comment:
//!
//! ```text
//! parameter gamma = 7/5      # scalar, optionally with a rational test value
//! parameter Cv               # left symbolic
//! function F(rho)            # arbitrary helper function of model variables
//! free eta                   # model symbol left arbitrary
//! bind p = (gamma - 1)*rho*eps
//! bind deta/deps = Cv/eps    # partial bindings keep logarithmic entropies rational
//! ```
//!
//! Partials of bound symbols are derived from the closest bound lower derivative.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::lexer::{lex, TokKind};
use crate::dsl::{parse_expr_in, Diagnostic, Scope};
use crate::kernel::{Atom, AtomKind, DiffContext, Expr, MultiIndex, SubstitutionMap, Q};
use crate::model::ModelDef;
use crate::oracle::{random_rational, trial_seed};
use crate::split::{ConstraintSystem, SolutionSetResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("constitutive symbol `{0}` is neither bound nor declared free")]
    UnboundSymbol(String),
    #[error("line {line}: binding leaves the rational-function fragment ({what})")]
    NonRationalBinding { line: usize, what: String },
    #[error("line {line}: {msg}")]
    BadDirective { line: usize, msg: String },
    #[error("line {line}: {diag}")]
    Parse { line: usize, diag: Box<Diagnostic> },
}

impl CheckError {
    pub fn code(&self) -> &'static str {
        match self {
            CheckError::UnboundSymbol(_) => "E601",
            CheckError::NonRationalBinding { .. } => "E602",
            CheckError::BadDirective { .. } => "E603",
            CheckError::Parse { .. } => "E604",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Bindings {
    /// Parameters with their optional test values.
    pub params: BTreeMap<String, Option<Q>>,
    /// Helper functions and their arguments.
    pub functions: Vec<(String, Vec<Atom>)>,
    /// Model symbols left arbitrary.
    pub free: Vec<String>,
    /// Symbol or partial atom to its bound value, in file order.
    pub binds: Vec<(Atom, Expr)>,
}

fn bad(line: usize, msg: impl Into<String>) -> CheckError {
    CheckError::BadDirective { line, msg: msg.into() }
}

/// Rejects calls of undeclared functions and non-integer exponents before parsing.
fn rational_fragment(scope: &Scope, text: &str, line: usize) -> Result<(), CheckError> {
    let Ok(toks) = lex(text) else { return Ok(()) };
    for (i, t) in toks.iter().enumerate() {
        let next = toks.get(i + 1).map(|t| &t.kind);
        match (&t.kind, next) {
            (TokKind::Ident(name), Some(TokKind::Sym('('))) => {
                let derivative = name.strip_prefix('d').is_some_and(|v| scope.indeps.iter().any(|s| s == v));
                if !derivative && !scope.constits.contains_key(name) {
                    return Err(CheckError::NonRationalBinding { line, what: format!("call of `{name}`") });
                }
            }
            (TokKind::Sym('^'), Some(TokKind::Sym('(')) | Some(TokKind::Dec(..)) | Some(TokKind::Ident(_))) => {
                return Err(CheckError::NonRationalBinding { line, what: "non-integer exponent".into() });
            }
            _ => {}
        }
    }
    Ok(())
}

impl Bindings {
    pub fn parse(m: &ModelDef, text: &str) -> Result<Bindings, CheckError> {
        let mut b = Bindings::default();
        let mut scope = Scope::of_model(m);
        let mut ctx = m.ctx();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            let expr = |scope: &Scope, ctx: &DiffContext, s: &str| -> Result<Expr, CheckError> {
                rational_fragment(scope, s, line)?;
                let t =
                    parse_expr_in(scope, s, "<bindings>").map_err(|d| CheckError::Parse { line, diag: Box::new(d) })?;
                t.normalize(Some(ctx)).map_err(|e| bad(line, e.to_string()))
            };
            match kw {
                "parameter" => {
                    let (name, val) = match rest.split_once('=') {
                        Some((n, v)) => (n.trim(), Some(v.trim())),
                        None => (rest, None),
                    };
                    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(bad(line, format!("bad parameter name `{name}`")));
                    }
                    let v = match val {
                        Some(v) => Some(
                            expr(&scope, &ctx, v)?
                                .as_constant()
                                .ok_or_else(|| bad(line, "parameter value must be a rational number"))?,
                        ),
                        None => None,
                    };
                    scope.params.insert(name.to_string());
                    b.params.insert(name.to_string(), v);
                }
                "function" => {
                    let (name, args) = rest
                        .strip_suffix(')')
                        .and_then(|r| r.split_once('('))
                        .ok_or_else(|| bad(line, "expected `function NAME(arg, ...)`"))?;
                    let name = name.trim();
                    if scope.constits.contains_key(name) {
                        return Err(bad(line, format!("`{name}` is already declared")));
                    }
                    let mut atoms = Vec::new();
                    for a in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
                        let e = expr(&scope, &ctx, a)?;
                        match e.as_atom() {
                            Some(x) if x.is_jet() || x.is_indep() => atoms.push(x),
                            _ => return Err(bad(line, format!("function argument `{a}` is not a variable"))),
                        }
                    }
                    scope.constits.insert(name.to_string(), atoms.clone());
                    ctx.declare(name, atoms.clone());
                    b.functions.push((name.to_string(), atoms));
                }
                "free" => {
                    for s in rest.split([',', ' ']).filter(|s| !s.is_empty()) {
                        if m.decl(s).is_none() {
                            return Err(bad(line, format!("`{s}` is not a constitutive symbol of the model")));
                        }
                        b.free.push(s.to_string());
                    }
                }
                "bind" => {
                    let (lhs, rhs) = rest.split_once('=').ok_or_else(|| bad(line, "expected `bind SYMBOL = EXPR`"))?;
                    let target = expr(&scope, &ctx, lhs.trim())?
                        .as_atom()
                        .filter(|a| a.as_constit().is_some_and(|(n, _)| m.decl(n).is_some()))
                        .ok_or_else(|| bad(line, format!("`{}` is not a model symbol or partial", lhs.trim())))?;
                    let v = expr(&scope, &ctx, rhs.trim())?;
                    b.binds.push((target, v));
                }
                other => return Err(bad(line, format!("unknown directive `{other}`"))),
            }
        }
        Ok(b)
    }

    fn ctx(&self, m: &ModelDef) -> DiffContext {
        let mut c = m.ctx();
        for (n, a) in &self.functions {
            c.declare(n, a.clone());
        }
        c
    }

    fn param_values(&self) -> SubstitutionMap {
        SubstitutionMap::from_pairs(
            self.params.iter().filter_map(|(n, v)| v.clone().map(|v| (Atom::constit(n), Expr::constant(v)))),
        )
    }

    /// Value of a model symbol or partial, before parameter values are inserted.
    fn value(&self, m: &ModelDef, ctx: &DiffContext, a: Atom) -> Result<Option<Expr>, CheckError> {
        let Some((name, slots)) = a.as_constit() else { return Ok(None) };
        let Some(decl) = m.decl(name) else { return Ok(None) };
        if self.free.iter().any(|f| f == name) {
            return Ok(None);
        }
        let zero = MultiIndex::zero(decl.args.len());
        let want = slots.cloned().unwrap_or(zero.clone());
        // Closest bound lower derivative: highest order among those dominated by `want`.
        let best = self
            .binds
            .iter()
            .filter_map(|(b, v)| match b.kind() {
                AtomKind::ConstitSym(n) if n == name => Some((zero.clone(), v)),
                AtomKind::ConstitPartial(n, s) if n == name && want.dominates(s) => Some((s.clone(), v)),
                _ => None,
            })
            .max_by_key(|(s, _)| s.order());
        let Some((from, v)) = best else { return Err(CheckError::UnboundSymbol(m.atom_text(a))) };
        let rest = want.minus(&from).expect("dominated");
        let mut e = v.clone();
        for (j, &k) in rest.0.iter().enumerate() {
            for _ in 0..k {
                e = ctx.arg_derivative(&e, decl.args[j]);
            }
        }
        Ok(Some(e))
    }

    /// Replaces every model constitutive atom of `e` by its bound value.
    pub fn apply(&self, m: &ModelDef, e: &Expr) -> Result<Expr, CheckError> {
        let ctx = self.ctx(m);
        let mut sub = SubstitutionMap::new();
        for a in e.atoms() {
            if let Some(v) = self.value(m, &ctx, a)? {
                sub.insert(a, v);
            }
        }
        Ok(e.substitute(&sub).substitute(&self.param_values()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub index: usize,
    pub constraint: String,
    /// Constraint with the bindings inserted, normalized.
    pub value: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub checks: Vec<ConstraintCheck>,
    pub residual: String,
    pub pass: bool,
}

pub fn check_candidate(m: &ModelDef, cs: &ConstraintSystem, b: &Bindings) -> Result<CandidateReport, CheckError> {
    let mut checks = Vec::new();
    for (i, c) in cs.constraints.iter().enumerate() {
        let v = b.apply(m, &c.expr)?;
        checks.push(ConstraintCheck {
            index: i,
            constraint: m.expr_text(&c.expr),
            value: m.expr_text(&v),
            pass: v.is_zero(),
        });
    }
    let residual = m.expr_text(&b.apply(m, &cs.residual)?);
    let pass = checks.iter().all(|c| c.pass);
    Ok(CandidateReport { checks, residual, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductionSample {
    /// Entropy production on solutions with the bindings inserted.
    pub symbolic: String,
    pub identically_zero: bool,
    pub trials: usize,
    pub zero: usize,
    pub negative: usize,
    /// Trials where a denominator vanished.
    pub undefined: usize,
}

/// Samples the entropy production on solutions under the bindings.
pub fn sample_production(
    m: &ModelDef,
    r: &SolutionSetResult,
    b: &Bindings,
    trials: usize,
    seed: u64,
) -> Result<ProductionSample, CheckError> {
    let e = b.apply(m, &r.entropy)?;
    let atoms: Vec<Atom> = e.atoms().into_iter().collect();
    let mut out = ProductionSample {
        symbolic: m.expr_text(&e),
        identically_zero: e.is_zero(),
        trials,
        zero: 0,
        negative: 0,
        undefined: 0,
    };
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let pt: HashMap<Atom, Q> = atoms.iter().map(|&a| (a, random_rational(&mut rng))).collect();
        match e.eval(&pt) {
            Ok(v) if v == Q::default() => out.zero += 1,
            Ok(v) if v < Q::default() => out.negative += 1,
            Ok(_) => {}
            Err(_) => out.undefined += 1,
        }
    }
    Ok(out)
}
