//! Solved form of a model on its solution manifold.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Atom, Expr, KernelError, MultiIndex, Poly, SubstitutionMap};
use crate::model::{Expanded, ModelDef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("equation `{0}` is not linear in the leading derivatives (offending atom `{1}`)")]
    NonlinearInLeading(String, String),
    #[error("the system is singular in the leading derivatives")]
    SingularSystem,
    #[error("consequence `{0}` has order {1}, above the cap {2}")]
    OrderCapExceeded(String, u32, u32),
    #[error("consequence `{0}` cannot be isolated")]
    SingularConsequence(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl SolveError {
    pub fn code(&self) -> &'static str {
        match self {
            SolveError::NonlinearInLeading(..) => "E301",
            SolveError::SingularSystem => "E302",
            SolveError::OrderCapExceeded(..) => "E303",
            SolveError::SingularConsequence(_) => "E304",
            SolveError::Kernel(k) => k.code(),
        }
    }
}

/// A key obtained by differentiating a solved equation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsequenceStep {
    pub key: Atom,
    /// Label of the model equation that was differentiated.
    pub equation: String,
    /// Total differentiation applied to that equation.
    pub by: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedSystem {
    /// Keys in insertion order: leading derivatives, then consequences.
    pub keys: Vec<Atom>,
    pub subst: SubstitutionMap,
    /// Nonzero factors divided by during elimination.
    pub pivots: Vec<Expr>,
    pub log: Vec<ConsequenceStep>,
    /// Equation label and differentiation index for each key; leading derivative k pairs with equation k.
    pub origin: Vec<(String, MultiIndex)>,
}

impl SolvedSystem {
    pub fn rhs(&self, a: Atom) -> Option<&Expr> {
        self.subst.get(a)
    }

    fn insert(&mut self, key: Atom, value: Expr, label: String, by: MultiIndex) {
        for v in self.subst.pairs.values_mut() {
            if v.contains_atom(key) {
                *v = v.substitute(&SubstitutionMap::from_pairs([(key, value.clone())]));
            }
        }
        self.subst.insert(key, value);
        self.keys.push(key);
        self.origin.push((label, by));
    }
}

/// Splits a numerator as Σ coeff_j·L_j + rest; fails if not linear in the leading atoms.
fn linear_parts(p: &Poly, lead: &[Atom], label: &str, m: &ModelDef) -> Result<(Vec<Poly>, Poly), SolveError> {
    let mut coeffs = vec![Poly::zero(); lead.len()];
    let mut rest = Poly::zero();
    for (mono, c) in p.terms() {
        let mut hit = None;
        for (j, l) in lead.iter().enumerate() {
            let k = mono.degree_in(*l);
            if k == 0 {
                continue;
            }
            if k > 1 || hit.is_some() {
                return Err(SolveError::NonlinearInLeading(label.into(), m.atom_text(*l)));
            }
            hit = Some(j);
        }
        match hit {
            None => rest.add_term(mono.clone(), c.clone()),
            Some(j) => {
                let (r, _) = mono.without(lead[j]);
                coeffs[j].add_term(r, c.clone());
            }
        }
    }
    Ok((coeffs, rest))
}

/// Distinct nonconstant factors: monomial atoms and the remaining non-monomial part.
pub fn pivot_factors(p: &Poly) -> Vec<Poly> {
    let mut out = Vec::new();
    let content = p.monomial_content();
    for a in content.atoms() {
        out.push(Poly::atom(a));
    }
    let rest = p.div_monomial(&content).expect("content divides");
    if !rest.is_constant() {
        out.push(rest.monic());
    }
    out
}

pub fn solve_leading(m: &ModelDef) -> Result<SolvedSystem, SolveError> {
    let x = m.expand()?;
    solve_expanded(m, &x, &[])
}

/// Solves with the given atoms set to zero beforehand.
pub fn solve_with_zeroed(m: &ModelDef, zeroed: &[Atom]) -> Result<SolvedSystem, SolveError> {
    let x = m.expand()?;
    solve_expanded(m, &x, zeroed)
}

#[allow(clippy::needless_range_loop)]
pub fn solve_expanded(m: &ModelDef, x: &Expanded, zeroed: &[Atom]) -> Result<SolvedSystem, SolveError> {
    let lead = &m.leading;
    let n = lead.len();
    if x.equations.len() != n {
        return Err(SolveError::SingularSystem);
    }
    let zero_map = SubstitutionMap::from_pairs(zeroed.iter().map(|&a| (a, Expr::zero())));
    let mut rows: Vec<Vec<Poly>> = Vec::with_capacity(n);
    for (e, eq) in x.equations.iter().zip(&m.equations) {
        let e = e.try_substitute(&zero_map)?;
        if let Some(l) = lead.iter().find(|l| e.den().contains_atom(**l)) {
            return Err(SolveError::NonlinearInLeading(eq.label.clone(), m.atom_text(*l)));
        }
        let (mut coeffs, rest) = linear_parts(e.num(), lead, &eq.label, m)?;
        coeffs.push(rest.neg());
        rows.push(coeffs);
    }

    // fraction-free elimination, rows and columns in declaration order
    let mut prev = Poly::one();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let r = (k..n).find(|&r| !rows[r][k].is_zero()).ok_or(SolveError::SingularSystem)?;
        rows.swap(k, r);
        let pk = rows[k][k].clone();
        for i in k + 1..n {
            let a = rows[i][k].clone();
            for j in k + 1..=n {
                let v = pk.mul(&rows[i][j]).sub(&a.mul(&rows[k][j]));
                rows[i][j] = v.div_exact(&prev).expect("Bareiss division is exact");
            }
            rows[i][k] = Poly::zero();
        }
        diag.push(pk.clone());
        prev = pk;
    }

    let mut sol: Vec<Expr> = vec![Expr::zero(); n];
    for k in (0..n).rev() {
        let mut acc = Expr::poly(rows[k][n].clone());
        for j in k + 1..n {
            if !rows[k][j].is_zero() {
                acc = acc.sub(&Expr::poly(rows[k][j].clone()).mul(&sol[j]));
            }
        }
        sol[k] = acc.div(&Expr::poly(rows[k][k].clone()))?;
    }

    let mut pivots: Vec<Expr> = Vec::new();
    for d in &diag {
        for f in pivot_factors(d) {
            let e = Expr::poly(f);
            if !pivots.contains(&e) {
                pivots.push(e);
            }
        }
    }
    let mut s =
        SolvedSystem { keys: Vec::new(), subst: SubstitutionMap::new(), pivots, log: Vec::new(), origin: Vec::new() };
    for (k, v) in sol.into_iter().enumerate() {
        s.keys.push(lead[k]);
        s.subst.pairs.insert(lead[k], v);
        s.origin.push((m.equations[k].label.clone(), MultiIndex::zero(m.n())));
    }
    s.subst.triangular = s.subst.check_triangular();
    Ok(s)
}

fn dominated_nonkeys(m: &ModelDef, s: &SolvedSystem, e: &Expr, out: &mut BTreeSet<(u32, Atom)>) {
    for a in e.atoms() {
        if a.is_jet() && m.is_leading_or_consequence(a) && s.subst.get(a).is_none() {
            out.insert((a.order(), a));
        }
    }
}

/// Extends `s` with the differential consequences needed to eliminate every leading
/// derivative consequence from `target` and from the right-hand sides.
pub fn close_consequences(m: &ModelDef, mut s: SolvedSystem, target: &Expr) -> Result<SolvedSystem, SolveError> {
    let ctx = m.ctx();
    let cap = m.max_order();
    loop {
        let mut need = BTreeSet::new();
        dominated_nonkeys(m, &s, &target.substitute(&s.subst), &mut need);
        for v in s.subst.pairs.values() {
            dominated_nonkeys(m, &s, v, &mut need);
        }
        let Some(&(_, beta)) = need.iter().next() else { break };
        let (field, bidx) = beta.as_jet().expect("jet");
        // nearest key on the same field below beta
        let base = s
            .keys
            .iter()
            .enumerate()
            .filter_map(|(i, k)| {
                let (f, idx) = k.as_jet()?;
                (f == field && bidx.strictly_dominates(idx)).then_some((idx.order(), *k, i))
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .expect("dominated atoms have a key below them");
        let (_, kappa, ki) = base;
        let kidx = kappa.as_jet().unwrap().1;
        let d = (0..m.n()).find(|&i| bidx.0[i] > kidx.0[i]).expect("strict domination");
        let nidx = kidx.incremented(d);
        let nu = Atom::jet(field, nidx.clone());
        if nidx.order() > cap {
            return Err(SolveError::OrderCapExceeded(m.atom_text(nu), nidx.order(), cap));
        }
        let rhs = s.subst.get(kappa).expect("key").clone();
        let mut val = ctx.total_derivative_at(&rhs, d)?.substitute(&s.subst);
        if val.contains_atom(nu) {
            // val = a·nu + b with a, b free of nu
            let num = val.num().clone();
            let den = val.den().clone();
            if den.contains_atom(nu) || num.degree_in(nu) > 1 {
                return Err(SolveError::SingularConsequence(m.atom_text(nu)));
            }
            let parts = num.coeffs_in(nu);
            let a = Expr::new(parts.get(&1).cloned().unwrap_or_default(), den.clone())?;
            let b = Expr::new(parts.get(&0).cloned().unwrap_or_default(), den)?;
            let one_minus = Expr::one().sub(&a);
            if one_minus.is_zero() {
                return Err(SolveError::SingularConsequence(m.atom_text(nu)));
            }
            val = b.div(&one_minus)?;
        }
        let (label, by0) = s.origin[ki].clone();
        let by = by0.incremented(d);
        s.log.push(ConsequenceStep { key: nu, equation: label.clone(), by: by.clone() });
        s.insert(nu, val, label, by);
    }
    s.subst.triangular = s.subst.check_triangular();
    Ok(s)
}

/// Residue of one equation or consequence after substitution.
#[derive(Clone, Debug, Serialize)]
pub struct Residue {
    pub equation: String,
    pub by: MultiIndex,
    pub residue: Expr,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub nonzero: Vec<Residue>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.nonzero.is_empty()
    }
}

pub fn verify_solved(m: &ModelDef, s: &SolvedSystem) -> Result<VerifyReport, SolveError> {
    let x = m.expand()?;
    let ctx = m.ctx();
    let mut checked = 0;
    let mut nonzero = Vec::new();
    let mut check = |label: &str, by: &MultiIndex, e: &Expr| {
        checked += 1;
        let r = e.substitute(&s.subst);
        if !r.is_zero() {
            nonzero.push(Residue { equation: label.into(), by: by.clone(), residue: r });
        }
    };
    for (e, eq) in x.equations.iter().zip(&m.equations) {
        check(&eq.label, &MultiIndex::zero(m.n()), e);
    }
    for step in &s.log {
        let i = m.equations.iter().position(|q| q.label == step.equation).expect("logged label exists");
        let d = ctx.total_multi(&x.equations[i], &step.by)?;
        check(&step.equation, &step.by, &d);
    }
    Ok(VerifyReport { checked, nonzero })
}

/// No right-hand side contains a key or a leading derivative consequence.
pub fn is_triangular(m: &ModelDef, s: &SolvedSystem) -> bool {
    s.subst
        .pairs
        .values()
        .all(|v| !v.contains_any(|a| s.subst.pairs.contains_key(&a) || (a.is_jet() && m.is_leading_or_consequence(a))))
}

/// Solves and closes with respect to the expanded entropy.
pub fn solve_for_entropy(m: &ModelDef) -> Result<(Expanded, SolvedSystem), SolveError> {
    let x = m.expand()?;
    let s = solve_expanded(m, &x, &[])?;
    let s = close_consequences(m, s, &x.entropy)?;
    Ok((x, s))
}
