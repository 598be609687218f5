//! Classical Müller-Liu procedure, kept for comparison with the solution set split.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::expr::collect_poly;
use crate::kernel::{Atom, Expr, KernelError, Poly, SubstitutionMap};
use crate::model::{Expanded, ModelDef};
use crate::split::{normal_form, ConstraintSystem, NonzeroSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiuError {
    #[error("extended inequality is not linear in the splitting derivatives (monomial `{0}`)")]
    NonlinearExtendedInequality(String),
    #[error("splitting derivative `{0}` occurs in a denominator")]
    DerivativeInDenominator(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl LiuError {
    pub fn code(&self) -> &'static str {
        match self {
            LiuError::NonlinearExtendedInequality(_) => "E501",
            LiuError::DerivativeInDenominator(_) => "E502",
            LiuError::Kernel(k) => k.code(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extended {
    pub expr: Expr,
    /// One multiplier per equation, in equation order.
    pub multipliers: Vec<Atom>,
    pub dependency: Vec<Atom>,
}

pub fn multiplier_name(label: &str) -> String {
    format!("Lambda_{label}")
}

/// Union of the declared constitutive arguments, in first-seen order.
pub fn default_dependency(m: &ModelDef) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::new();
    for d in &m.constits {
        for &a in &d.args {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

/// Entropy lhs minus Σ Λ_k·(lhs_k − rhs_k).
pub fn liu_extended(m: &ModelDef, x: &Expanded, dependency: Option<Vec<Atom>>) -> Extended {
    let dependency = dependency.unwrap_or_else(|| default_dependency(m));
    let mut e = x.entropy.clone();
    let mut multipliers = Vec::new();
    for (eq, q) in m.equations.iter().zip(&x.equations) {
        let l = Atom::constit(&multiplier_name(&eq.label));
        multipliers.push(l);
        e = e.sub(&q.mul(&Expr::atom(l)));
    }
    Extended { expr: e, multipliers, dependency }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiuResult {
    pub multipliers: Vec<Atom>,
    pub dependency: Vec<Atom>,
    /// Coefficients of the splitting derivatives, in normal form.
    pub identities: Vec<Expr>,
    pub residual: Expr,
    pub splitting: Vec<Atom>,
}

/// Splitting set: derivative jets (order ≥ 1) outside the multiplier dependency.
pub fn splitting_atoms(e: &Expr, dependency: &[Atom]) -> BTreeSet<Atom> {
    e.atoms().into_iter().filter(|a| a.is_jet() && a.order() >= 1 && !dependency.contains(a)).collect()
}

pub fn nonzero_of(x: &Expanded) -> NonzeroSet {
    let mut nz = NonzeroSet::default();
    for a in &x.assumptions {
        nz.add_expr(a);
    }
    nz
}

pub fn liu_split(m: &ModelDef, x: &Expanded, ext: &Extended) -> Result<LiuResult, LiuError> {
    let e = &ext.expr;
    let split = splitting_atoms(e, &ext.dependency);
    if let Some(a) = e.den().atoms().into_iter().find(|a| split.contains(a)) {
        return Err(LiuError::DerivativeInDenominator(m.atom_text(a)));
    }
    let table = collect_poly(e.num(), |a| split.contains(&a));
    let outer: BTreeSet<Atom> = e
        .atoms()
        .into_iter()
        .filter(|a| (a.is_indep() || a.is_jet()) && !split.contains(a) && !ext.dependency.contains(a))
        .collect();
    let nz = nonzero_of(x);
    let mut identities: Vec<Expr> = Vec::new();
    let mut residual = Expr::zero();
    for (mono, c) in table {
        if mono.degree() > 1 {
            let t = Expr::poly(Poly::term(crate::kernel::poly::q(1), mono));
            return Err(LiuError::NonlinearExtendedInequality(m.expr_text(&t)));
        }
        if mono.is_one() {
            residual = Expr::new(c, e.den().clone())?;
            continue;
        }
        // The identities hold for every value of the variables the multipliers do not depend on.
        for (_, cc) in collect_poly(&c, |a| outer.contains(&a)) {
            let (nf, _) = normal_form(&cc, &nz);
            let ex = Expr::poly(nf);
            if !ex.is_zero() && !identities.contains(&ex) {
                identities.push(ex);
            }
        }
    }
    Ok(LiuResult {
        multipliers: ext.multipliers.clone(),
        dependency: ext.dependency.clone(),
        identities,
        residual,
        splitting: split.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    /// Solved multipliers with their values.
    pub solved: Vec<(Atom, Expr)>,
    /// Multipliers no identity could be solved for.
    pub unsolved: Vec<Atom>,
    /// Identities free of multipliers, in normal form.
    pub physical: Vec<Expr>,
    /// Identities that still contain unsolved multipliers.
    pub leftover: Vec<Expr>,
    pub residual: Expr,
    /// Identities forced by reading each multiplier as a generic function of its whole ansatz.
    /// Included in `physical` as well.
    pub generic: Vec<Expr>,
}

/// Whether every factor of `p` is a nonzero rational or in the nonzero set.
fn certified_nonzero(p: &Poly, nz: &NonzeroSet) -> bool {
    if let Some(c) = p.as_constant() {
        return c != crate::kernel::Q::default();
    }
    let (rest, _) = normal_form(p, nz);
    rest.is_constant()
}

/// Greedy linear elimination of the multipliers.
pub fn eliminate_multipliers(x: &Expanded, lr: &LiuResult) -> Elimination {
    let mut nz = nonzero_of(x);
    let mut ids: Vec<Expr> = lr.identities.clone();
    let mut residual = lr.residual.clone();
    let mut solved = Vec::new();
    let mut unsolved: Vec<Atom> = lr.multipliers.clone();
    loop {
        // Prefer identities with fewest other multipliers, then fewest terms.
        let mut hit: Option<((usize, usize), Atom, usize, Expr)> = None;
        for &l in &unsolved {
            for (i, id) in ids.iter().enumerate() {
                let p = id.num();
                if p.degree_in(l) != 1 {
                    continue;
                }
                let cs = p.coeffs_in(l);
                let c1 = &cs[&1];
                if c1.atoms().iter().any(|a| lr.multipliers.contains(a)) || !certified_nonzero(c1, &nz) {
                    continue;
                }
                let others = p.atoms().iter().filter(|a| **a != l && unsolved.contains(a)).count();
                let rank = (others, p.len());
                if hit.as_ref().is_some_and(|h| h.0 <= rank) {
                    continue;
                }
                let c0 = cs.get(&0).cloned().unwrap_or_default();
                let val = Expr::poly(c0.neg()).div(&Expr::poly(c1.clone())).expect("certified nonzero");
                hit = Some((rank, l, i, val));
            }
        }
        let hit = hit.map(|(_, l, i, v)| (l, i, v));
        let Some((l, i, val)) = hit else { break };
        ids.remove(i);
        nz.add_expr(&val.den().clone().into_expr());
        let sub = SubstitutionMap::from_pairs([(l, val.clone())]);
        for id in ids.iter_mut() {
            let v = id.substitute(&sub);
            let (nf, _) = normal_form(v.num(), &nz);
            *id = Expr::poly(nf);
        }
        residual = residual.substitute(&sub);
        for (_, v) in solved.iter_mut() {
            let w: &mut Expr = v;
            *w = w.substitute(&sub);
        }
        solved.push((l, val));
        unsolved.retain(|&u| u != l);
    }
    let mut physical: Vec<Expr> = Vec::new();
    let mut leftover = Vec::new();
    for id in ids {
        if id.is_zero() {
            continue;
        }
        if id.atoms().iter().any(|a| lr.multipliers.contains(a)) {
            leftover.push(id);
        } else if !physical.contains(&id) {
            physical.push(id);
        }
    }
    Elimination { solved, unsolved, physical, leftover, residual, generic: Vec::new() }
}

trait IntoExpr {
    fn into_expr(self) -> Expr;
}

impl IntoExpr for Poly {
    fn into_expr(self) -> Expr {
        Expr::poly(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Identical,
    LiuOverRestricts,
    Incomparable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Identical => "identical",
            Verdict::LiuOverRestricts => "liu-over-restricts",
            Verdict::Incomparable => "incomparable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub verdict: Verdict,
    pub both: Vec<Expr>,
    pub liu_only: Vec<Expr>,
    pub solution_set_only: Vec<Expr>,
    pub elimination: Elimination,
    /// Set when some multiplier could not be eliminated; the comparison used the solved part.
    pub incomplete: bool,
}

/// Row-reduced basis of the rational span of some polynomials, keyed by pivot monomial.
#[derive(Default)]
struct Span {
    rows: Vec<Poly>,
}

impl Span {
    fn reduce(&self, p: &Poly) -> Poly {
        let mut r = p.clone();
        for b in &self.rows {
            let lm = b.leading().expect("nonzero row").0.clone();
            if let Some(c) = r.terms().get(&lm).cloned() {
                r = r.sub(&b.scale(&c));
            }
        }
        r
    }

    fn insert(&mut self, p: &Poly) {
        let r = self.reduce(p);
        if r.is_zero() {
            return;
        }
        let r = r.monic();
        let lm = r.leading().expect("nonzero").0.clone();
        for b in self.rows.iter_mut() {
            if let Some(c) = b.terms().get(&lm).cloned() {
                *b = b.sub(&r.scale(&c));
            }
        }
        self.rows.push(r);
    }

    fn contains(&self, p: &Poly) -> bool {
        self.reduce(p).is_zero()
    }
}

/// `a` follows from `set`: a polynomial multiple of one member, or `a` times a nonzero atom lies in
/// the rational span of the members and their products with nonzero atoms.
fn implied_by(a: &Expr, set: &[Expr], nz: &BTreeSet<Atom>) -> bool {
    if set.iter().any(|b| a == b || a.num().div_exact(b.num()).is_some()) {
        return true;
    }
    let mut sp = Span::default();
    for b in set {
        sp.insert(b.num());
        for &g in nz {
            sp.insert(&b.num().mul(&Poly::atom(g)));
        }
    }
    sp.contains(a.num()) || nz.iter().any(|&g| sp.contains(&a.num().mul(&Poly::atom(g))))
}

fn depends_on(m: &ModelDef, a: Atom, d: Atom) -> bool {
    if a == d {
        return true;
    }
    match a.as_constit() {
        Some((name, _)) => m.decl(name).is_some_and(|c| c.args.contains(&d)),
        None => false,
    }
}

/// Consequences of the multipliers depending on every variable of their ansatz.
///
/// An identity `Λ·c + c0` whose other terms do not involve the ansatz variable `d` differentiates to
/// `∂Λ/∂d · c = 0`. Unless some such `c` is certified nonzero (then `Λ` is free of `d`), the generic
/// multiplier forces `c = 0` and `c0 = 0`.
pub fn generic_multiplier_consequences(m: &ModelDef, x: &Expanded, lr: &LiuResult, el: &Elimination) -> Vec<Expr> {
    let nz = nonzero_of(x);
    let constant: Vec<(Atom, Expr)> = el.solved.iter().filter(|(_, v)| v.atoms().is_empty()).cloned().collect();
    let sub = SubstitutionMap::from_pairs(constant.iter().cloned());
    let ids: Vec<Poly> =
        lr.identities.iter().map(|i| normal_form(i.substitute(&sub).num(), &nz).0).filter(|p| !p.is_zero()).collect();
    let live: Vec<Atom> = lr.multipliers.iter().copied().filter(|l| !constant.iter().any(|(c, _)| c == l)).collect();
    let mut out: Vec<Expr> = Vec::new();
    let push = |p: &Poly, out: &mut Vec<Expr>| {
        let (nf, _) = normal_form(p, &nz);
        let e = Expr::poly(nf);
        if !e.is_zero() && !out.contains(&e) {
            out.push(e);
        }
    };
    for &l in &live {
        for &d in &lr.dependency {
            let hits: Vec<(Poly, Poly)> = ids
                .iter()
                .filter(|p| {
                    let atoms = p.atoms();
                    p.degree_in(l) == 1
                        && atoms.iter().all(|&a| a == l || (!lr.multipliers.contains(&a) && !depends_on(m, a, d)))
                })
                .map(|p| {
                    let cs = p.coeffs_in(l);
                    (cs[&1].clone(), cs.get(&0).cloned().unwrap_or_default())
                })
                .collect();
            if hits.is_empty() || hits.iter().any(|(c, _)| certified_nonzero(c, &nz)) {
                continue;
            }
            for (c, c0) in &hits {
                push(c, &mut out);
                push(c0, &mut out);
            }
        }
    }
    out
}

pub fn compare(m: &ModelDef, x: &Expanded, lr: &LiuResult, cs: &ConstraintSystem) -> Comparison {
    let mut el = eliminate_multipliers(x, lr);
    el.generic = generic_multiplier_consequences(m, x, lr, &el);
    for g in &el.generic {
        if !el.physical.contains(g) {
            el.physical.push(g.clone());
        }
    }
    let ss = cs.exprs();
    let mut nz: BTreeSet<Atom> = nonzero_of(x).atoms;
    nz.extend(cs.nonzero.atoms.iter().copied());
    let mut both = Vec::new();
    let mut liu_only = Vec::new();
    for id in &el.physical {
        if implied_by(id, &ss, &nz) {
            both.push(id.clone());
        } else {
            liu_only.push(id.clone());
        }
    }
    let solution_set_only: Vec<Expr> = ss.iter().filter(|c| !implied_by(c, &el.physical, &nz)).cloned().collect();
    let verdict = match (liu_only.is_empty(), solution_set_only.is_empty()) {
        (true, true) => Verdict::Identical,
        (false, true) => Verdict::LiuOverRestricts,
        _ => Verdict::Incomparable,
    };
    Comparison { verdict, both, liu_only, solution_set_only, incomplete: !el.unsolved.is_empty(), elimination: el }
}

/// Extended inequality and its split with the default multiplier dependency.
pub fn analyze_liu(m: &ModelDef, dependency: Option<Vec<Atom>>) -> Result<(Expanded, LiuResult), LiuError> {
    let x = m.expand()?;
    let ext = liu_extended(m, &x, dependency);
    let lr = liu_split(m, &x, &ext)?;
    Ok((x, lr))
}
