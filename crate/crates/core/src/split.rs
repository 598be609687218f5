//! Entropy inequality on solutions, split over the free elements.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::expr::collect_poly;
use crate::kernel::{Atom, Expr, KernelError, Monomial, MultiIndex, Poly};
use crate::model::{Expanded, ModelDef};
use crate::solve::{pivot_factors, solve_for_entropy, SolveError, SolvedSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("entropy denominator contains the free element `{0}`")]
    NotPolynomialInFreeElements(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl SplitError {
    pub fn code(&self) -> &'static str {
        match self {
            SplitError::NotPolynomialInFreeElements(_) => "E401",
            SplitError::Solve(e) => e.code(),
            SplitError::Kernel(k) => k.code(),
        }
    }
}

/// Expressions known to be nonzero, split into atoms and non-monomial factors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NonzeroSet {
    pub atoms: BTreeSet<Atom>,
    pub polys: Vec<Poly>,
}

impl NonzeroSet {
    pub fn add_poly(&mut self, p: &Poly) {
        for f in pivot_factors(p) {
            match f.as_atom() {
                Some(a) => {
                    self.atoms.insert(a);
                }
                None => {
                    if !self.polys.contains(&f) {
                        self.polys.push(f);
                    }
                }
            }
        }
    }

    pub fn add_expr(&mut self, e: &Expr) {
        self.add_poly(e.num());
        self.add_poly(e.den());
    }

    pub fn as_exprs(&self) -> Vec<Expr> {
        self.atoms.iter().map(|&a| Expr::atom(a)).chain(self.polys.iter().map(|p| Expr::poly(p.clone()))).collect()
    }

    pub fn contains_poly(&self, p: &Poly) -> bool {
        match p.as_atom() {
            Some(a) => self.atoms.contains(&a),
            None => self.polys.contains(&p.monic()),
        }
    }
}

/// Removes nonzero factors and scales to leading coefficient 1; returns the removed factors.
pub fn normal_form(p: &Poly, nz: &NonzeroSet) -> (Poly, Vec<Poly>) {
    let mut removed = Vec::new();
    let content = p.monomial_content();
    let mut cancel = Vec::new();
    for &(a, k) in content.factors() {
        if nz.atoms.contains(&a) {
            cancel.push((a, k));
            for _ in 0..k {
                removed.push(Poly::atom(a));
            }
        }
    }
    let mut r = p.div_monomial(&Monomial::from_factors(cancel)).expect("content divides");
    for s in &nz.polys {
        while r.len() >= s.len() && !r.is_constant() {
            match r.div_exact(s) {
                Some(q) => {
                    r = q;
                    removed.push(s.clone());
                }
                None => break,
            }
        }
    }
    (r.monic(), removed)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSource {
    /// Coefficient of this free-element monomial.
    Coefficient { monomial: Vec<(Atom, u32)> },
    /// Symmetrization of a declared symmetric argument pair.
    Symmetry { symbol: String, slots: (usize, usize) },
    /// Residual numerator required to vanish.
    Residual,
    /// User assumption of the zero polarity.
    Assumption,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub expr: Expr,
    pub sources: Vec<ConstraintSource>,
    pub cancelled: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
    /// Free-element independent part of the entropy, divided by the cleared denominator.
    pub residual: Expr,
    /// The residual is nonnegative where this is positive and nonpositive where it is negative.
    pub residual_den: Expr,
    pub side_conditions: Vec<Expr>,
    pub nonzero: NonzeroSet,
    pub free: Vec<Atom>,
    /// Raw coefficient table of the cleared numerator.
    pub table: Vec<(Monomial, Poly)>,
    pub denominator: Poly,
    /// Constraints dropped as polynomial multiples of a retained one: (dropped, retained).
    pub implied: Vec<(Expr, Expr)>,
}

impl ConstraintSystem {
    pub fn exprs(&self) -> Vec<Expr> {
        self.constraints.iter().map(|c| c.expr.clone()).collect()
    }

    /// Σ monomial·coefficient of the retained table.
    pub fn reconstruct(&self) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.table {
            p.add_assign_scaled(c, &num_traits::One::one(), m);
        }
        p
    }

    pub fn push_constraint(&mut self, p: &Poly, src: ConstraintSource) -> bool {
        let (nf, removed) = normal_form(p, &self.nonzero);
        if nf.is_zero() {
            return false;
        }
        let e = Expr::poly(nf);
        if let Some(c) = self.constraints.iter_mut().find(|c| c.expr == e) {
            c.sources.push(src);
            return false;
        }
        self.constraints.push(Constraint {
            expr: e,
            sources: vec![src],
            cancelled: removed.into_iter().map(Expr::poly).collect(),
        });
        true
    }

    /// Drops every constraint that is a nonconstant polynomial multiple of another retained constraint.
    pub fn prune_multiples(&mut self) {
        let mut order: Vec<usize> = (0..self.constraints.len()).collect();
        order.sort_by_key(|&i| self.constraints[i].expr.num().len());
        let mut keep: Vec<usize> = Vec::new();
        let mut dropped = vec![false; self.constraints.len()];
        for &i in &order {
            let p = self.constraints[i].expr.num();
            let by = keep.iter().copied().find(|&j| {
                let d = self.constraints[j].expr.num();
                p.total_degree() > d.total_degree() && p.div_exact(d).is_some()
            });
            match by {
                Some(j) => {
                    dropped[i] = true;
                    self.implied.push((self.constraints[i].expr.clone(), self.constraints[j].expr.clone()));
                }
                None => keep.push(i),
            }
        }
        let mut k = 0;
        self.constraints.retain(|_| {
            k += 1;
            !dropped[k - 1]
        });
    }
}

/// Atoms the split runs over: independent variables and non-dependency jet variables.
pub fn split_atoms(m: &ModelDef, e: &Expr) -> BTreeSet<Atom> {
    let deps = m.dependency_atoms();
    e.atoms().into_iter().filter(|a| a.is_indep() || (a.is_jet() && !deps.contains(a))).collect()
}

pub fn entropy_on_solutions(x: &Expanded, s: &SolvedSystem) -> Expr {
    x.entropy.substitute(&s.subst)
}

pub fn symmetry_constraints(m: &ModelDef) -> Vec<(Poly, ConstraintSource)> {
    let mut out = Vec::new();
    for d in &m.constits {
        for &(i, j) in &d.symmetric {
            let n = d.args.len();
            let a = Atom::partial(&d.name, MultiIndex::unit(n, i));
            let b = Atom::partial(&d.name, MultiIndex::unit(n, j));
            out.push((
                Poly::atom(a).sub(&Poly::atom(b)),
                ConstraintSource::Symmetry { symbol: d.name.clone(), slots: (i, j) },
            ));
        }
    }
    out
}

pub fn split(m: &ModelDef, x: &Expanded, s: &SolvedSystem, e: &Expr) -> Result<ConstraintSystem, SplitError> {
    let vars = split_atoms(m, e);
    if let Some(a) = e.den().atoms().into_iter().find(|a| vars.contains(a)) {
        return Err(SplitError::NotPolynomialInFreeElements(m.atom_text(a)));
    }
    let mut nonzero = NonzeroSet::default();
    for a in &x.assumptions {
        nonzero.add_expr(a);
    }
    for p in &s.pivots {
        nonzero.add_expr(p);
    }
    nonzero.add_poly(e.den());

    let table: Vec<(Monomial, Poly)> = collect_poly(e.num(), |a| vars.contains(&a)).into_iter().collect();
    let constant = table.iter().find(|(mm, _)| mm.is_one()).map(|(_, c)| c.clone()).unwrap_or_default();
    let residual = Expr::new(constant, e.den().clone())?;
    let residual_den = Expr::poly(residual.den().clone());

    let mut free: BTreeSet<Atom> = m.classify_atoms(&[&x.entropy]).free;
    free.extend(vars.iter().copied());
    let mut side: Vec<Expr> = Vec::new();
    for c in x.assumptions.iter().chain(&s.pivots).chain(nonzero.as_exprs().iter()) {
        if !side.contains(c) {
            side.push(c.clone());
        }
    }
    let mut cs = ConstraintSystem {
        constraints: Vec::new(),
        residual,
        residual_den,
        side_conditions: side,
        nonzero,
        free: free.into_iter().collect(),
        table: table.clone(),
        denominator: e.den().clone(),
        implied: Vec::new(),
    };
    for (mono, coeff) in &table {
        if mono.is_one() {
            continue;
        }
        cs.push_constraint(coeff, ConstraintSource::Coefficient { monomial: mono.factors().to_vec() });
    }
    for (p, src) in symmetry_constraints(m) {
        cs.push_constraint(&p, src);
    }
    cs.prune_multiples();
    Ok(cs)
}

/// Full solution set pipeline.
#[derive(Clone, Debug)]
pub struct SolutionSetResult {
    pub expanded: Expanded,
    pub solved: SolvedSystem,
    pub entropy: Expr,
    pub system: ConstraintSystem,
}

pub fn analyze_solution_set(m: &ModelDef) -> Result<SolutionSetResult, SplitError> {
    let (x, s) = solve_for_entropy(m)?;
    let e = entropy_on_solutions(&x, &s);
    let cs = split(m, &x, &s, &e)?;
    Ok(SolutionSetResult { expanded: x, solved: s, entropy: e, system: cs })
}
