//! Case splitting of a constraint system on the vanishing of pivots.
//!
//! The reducer only performs linear eliminations of one constitutive atom whose coefficient is
//! certified nonzero, closes the solved atoms under argument differentiation and adds the
//! integrability conditions between solved atoms of the same symbol. A constraint whose leading
//! coefficient is not certified contributes that coefficient as a pivot.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::{Atom, AtomKind, DiffContext, Expr, MultiIndex, Poly, SubstitutionMap};
use crate::model::ModelDef;
use crate::solve::pivot_factors;
use crate::split::{normal_form, ConstraintSystem, NonzeroSet};

/// Reductions per node before the branch is reported open.
const STEP_CAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Zero,
    Nonzero,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assumption {
    pub expr: Expr,
    pub polarity: Polarity,
}

impl Assumption {
    pub fn zero(e: Expr) -> Self {
        Assumption { expr: e, polarity: Polarity::Zero }
    }
    pub fn nonzero(e: Expr) -> Self {
        Assumption { expr: e, polarity: Polarity::Nonzero }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Open,
    ClosedInconsistent,
    Leaf,
}

/// One reduction step: which constraint was solved for which atom, dividing by which factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub solved: Atom,
    pub constraint: Expr,
    pub divisor: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduced {
    /// Solved atoms with their values, in solving order.
    pub solved: Vec<(Atom, Expr)>,
    /// Constraints with an uncertified leading coefficient.
    pub pending: Vec<Expr>,
    pub nonzero: NonzeroSet,
    pub certificates: Vec<Certificate>,
    /// Set when the step cap was hit.
    pub truncated: bool,
}

impl Reduced {
    /// The system as a list of expressions that vanish: `L − value` for solved atoms, then pending.
    pub fn constraints(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.solved.iter().map(|(a, v)| Expr::atom(*a).sub(v)).collect();
        out.extend(self.pending.iter().cloned());
        out
    }

    /// Solved atoms whose value is zero.
    pub fn vanishing(&self) -> BTreeSet<Atom> {
        self.solved.iter().filter(|(_, v)| v.is_zero()).map(|(a, _)| *a).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Consistent(Reduced),
    Inconsistent(String),
}

/// Ranking of constitutive atoms: unknown symbols above classifying ones, then by order.
#[derive(Clone, Debug)]
pub struct Ranking {
    pub classifying: BTreeSet<String>,
}

impl Ranking {
    pub fn for_model(m: &ModelDef) -> Self {
        let classifying: BTreeSet<String> = if m.classify.is_empty() {
            let mut s = BTreeSet::new();
            m.entropy.visit_atoms(&mut |a| {
                if let Some((n, _)) = a.as_constit() {
                    s.insert(n.to_string());
                }
            });
            s
        } else {
            m.classify.iter().cloned().collect()
        };
        Ranking { classifying }
    }

    fn key(&self, a: Atom) -> (bool, u32, String, Vec<u32>) {
        match a.kind() {
            AtomKind::ConstitSym(n) => (!self.classifying.contains(n), 0, n.clone(), Vec::new()),
            AtomKind::ConstitPartial(n, s) => (!self.classifying.contains(n), s.order(), n.clone(), s.0.clone()),
            _ => (false, 0, String::new(), Vec::new()),
        }
    }

    pub fn leader(&self, p: &Poly) -> Option<Atom> {
        p.atoms().into_iter().filter(|a| a.is_constitutive()).max_by_key(|&a| self.key(a))
    }
}

fn symbol_slots(a: Atom) -> Option<(&'static str, Option<&'static MultiIndex>)> {
    match a.kind() {
        AtomKind::ConstitSym(n) => Some((n.as_str(), None)),
        AtomKind::ConstitPartial(n, s) => Some((n.as_str(), Some(s))),
        _ => None,
    }
}

struct Reducer<'a> {
    ctx: &'a DiffContext,
    rank: &'a Ranking,
    args: &'a BTreeMap<String, Vec<Atom>>,
    solved: Vec<(Atom, Expr)>,
    nz: NonzeroSet,
    certs: Vec<Certificate>,
    steps: usize,
}

fn slots_of(a: Atom, n: usize) -> MultiIndex {
    match symbol_slots(a) {
        Some((_, Some(s))) => s.clone(),
        _ => MultiIndex::zero(n),
    }
}

impl<'a> Reducer<'a> {
    fn arity(&self, name: &str) -> usize {
        self.args.get(name).map(|v| v.len()).unwrap_or(0)
    }

    /// Differentiates `e` by the argument multi-index `alpha` of symbol `name`.
    fn arg_multi(&self, e: &Expr, name: &str, alpha: &MultiIndex) -> Expr {
        let args = &self.args[name];
        let mut r = e.clone();
        for (j, &k) in alpha.0.iter().enumerate() {
            for _ in 0..k {
                r = self.ctx.arg_derivative(&r, args[j]);
            }
        }
        r
    }

    /// Solved atom of which `a` is an argument derivative, with the remaining index.
    fn dominating(&self, a: Atom) -> Option<(usize, MultiIndex)> {
        let (name, _) = symbol_slots(a)?;
        let n = self.arity(name);
        if n == 0 {
            return self.solved.iter().position(|(l, _)| *l == a).map(|i| (i, MultiIndex::zero(0)));
        }
        let sa = slots_of(a, n);
        self.solved.iter().enumerate().find_map(|(i, (l, _))| {
            let (ln, _) = symbol_slots(*l)?;
            if ln != name {
                return None;
            }
            let sl = slots_of(*l, n);
            sa.minus(&sl).map(|d| (i, d))
        })
    }

    /// Replaces solved atoms and their derivatives until none remain.
    fn reduce(&self, e: &Expr) -> Expr {
        let mut cur = e.clone();
        let mut cache: HashMap<Atom, Expr> = HashMap::new();
        loop {
            let mut sub = SubstitutionMap::new();
            for a in cur.atoms() {
                if let Some((i, rest)) = self.dominating(a) {
                    let v = cache.entry(a).or_insert_with(|| {
                        let (l, rhs) = &self.solved[i];
                        let name = symbol_slots(*l).expect("constitutive").0;
                        self.arg_multi(rhs, name, &rest)
                    });
                    sub.insert(a, v.clone());
                }
            }
            if sub.is_empty() {
                return cur;
            }
            match cur.try_substitute(&sub) {
                Ok(n) => cur = n,
                Err(_) => return cur,
            }
        }
    }

    /// Nonzero as a function: a nonzero constant, a polynomial in coordinates only, or a product
    /// of asserted nonzero factors.
    fn certified(&self, p: &Poly) -> bool {
        let (rest, _) = normal_form(p, &self.nz);
        if rest.is_constant() {
            return !rest.is_zero();
        }
        pivot_factors(&rest).iter().all(|f| !f.atoms().iter().any(|a| a.is_constitutive()) || self.nz.contains_poly(f))
    }

    /// Strips nonzero and coordinate-only factors; `None` if nothing is left to vanish.
    fn strip(&self, p: &Poly) -> Option<Poly> {
        let (r, _) = normal_form(p, &self.nz);
        if r.is_zero() {
            return Some(r);
        }
        let content = r.monomial_content();
        let coord: Vec<(Atom, u32)> = content.factors().iter().filter(|(a, _)| !a.is_constitutive()).cloned().collect();
        let r = r.div_monomial(&crate::kernel::Monomial::from_factors(coord)).expect("content divides");
        if r.is_constant() || !r.atoms().iter().any(|a| a.is_constitutive()) {
            None
        } else {
            Some(r.monic())
        }
    }

    fn insert_solved(&mut self, l: Atom, v: Expr) {
        let one = SubstitutionMap::from_pairs([(l, v.clone())]);
        let mut updated = Vec::new();
        for (a, rhs) in &self.solved {
            let r = if rhs.contains_atom(l) { rhs.substitute(&one) } else { rhs.clone() };
            updated.push((*a, r));
        }
        updated.push((l, v));
        self.solved = updated;
        // Derivatives of l inside earlier values.
        let snapshot = self.solved.clone();
        for (i, (_, rhs)) in snapshot.iter().enumerate() {
            let r = self.reduce(rhs);
            self.solved[i].1 = r;
        }
    }

    fn integrability(&self, l: Atom) -> Vec<Expr> {
        let Some((name, _)) = symbol_slots(l) else { return Vec::new() };
        let n = self.arity(name);
        if n == 0 {
            return Vec::new();
        }
        let sl = slots_of(l, n);
        let rl = &self.solved.iter().find(|(a, _)| *a == l).expect("just solved").1;
        let mut out = Vec::new();
        for (k, rk) in &self.solved {
            if *k == l || symbol_slots(*k).map(|s| s.0) != Some(name) {
                continue;
            }
            let sk = slots_of(*k, n);
            if sk.dominates(&sl) || sl.dominates(&sk) {
                continue;
            }
            let g = MultiIndex(sl.0.iter().zip(&sk.0).map(|(a, b)| *a.max(b)).collect());
            let d1 = self.arg_multi(rl, name, &g.minus(&sl).expect("lcm dominates"));
            let d2 = self.arg_multi(rk, name, &g.minus(&sk).expect("lcm dominates"));
            out.push(d1.sub(&d2));
        }
        out
    }

    /// Runs to a fixpoint.
    fn run(&mut self, mut work: Vec<Expr>) -> Outcome {
        let mut pending: Vec<Expr> = Vec::new();
        loop {
            let mut progress = false;
            work.append(&mut pending);
            let mut next: Vec<Expr> = Vec::new();
            while let Some(e) = work.pop() {
                self.steps += 1;
                if self.steps > STEP_CAP {
                    next.push(e);
                    next.append(&mut work);
                    return Outcome::Consistent(self.finish(next, true));
                }
                let r = self.reduce(&e);
                let Some(p) = self.strip(r.num()) else {
                    return Outcome::Inconsistent(format!(
                        "nonzero expression forced to vanish: {}",
                        crate::kernel::tree::expr_text(&r, self.ctx)
                    ));
                };
                if p.is_zero() {
                    continue;
                }
                let l = self.rank.leader(&p).expect("stripped constraint has a constitutive atom");
                if p.degree_in(l) == 1 {
                    let cs = p.coeffs_in(l);
                    let c1 = cs[&1].clone();
                    if self.certified(&c1) {
                        let c0 = cs.get(&0).cloned().unwrap_or_default();
                        let v = Expr::poly(c0.neg()).div(&Expr::poly(c1.clone())).expect("certified");
                        self.certs.push(Certificate {
                            solved: l,
                            constraint: Expr::poly(p.clone()),
                            divisor: Expr::poly(c1),
                        });
                        self.insert_solved(l, v);
                        work.extend(self.integrability(l));
                        work.append(&mut next);
                        progress = true;
                        continue;
                    }
                }
                next.push(Expr::poly(p));
            }
            pending = next;
            if !progress {
                break;
            }
        }
        let mut seen = Vec::new();
        for p in pending {
            let r = self.reduce(&p);
            if let Some(s) = self.strip(r.num()) {
                let e = Expr::poly(s);
                if !e.is_zero() && !seen.contains(&e) {
                    seen.push(e);
                }
            }
        }
        Outcome::Consistent(self.finish(seen, false))
    }

    fn finish(&self, pending: Vec<Expr>, truncated: bool) -> Reduced {
        Reduced {
            solved: self.solved.clone(),
            pending,
            nonzero: self.nz.clone(),
            certificates: self.certs.clone(),
            truncated,
        }
    }
}

/// Reduces a constraint system under assumptions.
pub fn apply_assumptions(m: &ModelDef, cs: &ConstraintSystem, assumptions: &[Assumption]) -> Outcome {
    apply_to(m, &Ranking::for_model(m), &cs.exprs(), &cs.nonzero, assumptions)
}

pub fn apply_to(
    m: &ModelDef,
    rank: &Ranking,
    constraints: &[Expr],
    nz: &NonzeroSet,
    assumptions: &[Assumption],
) -> Outcome {
    let ctx = m.ctx();
    let args = m.symbol_args();
    let mut nz = nz.clone();
    let mut work: Vec<Expr> = Vec::new();
    for a in assumptions {
        match a.polarity {
            Polarity::Nonzero => nz.add_expr(&a.expr),
            Polarity::Zero => work.push(a.expr.clone()),
        }
    }
    for a in assumptions.iter().filter(|a| a.polarity == Polarity::Zero) {
        if nz.contains_poly(&a.expr.num().monic()) || a.expr.as_constant().is_some_and(|c| c != Default::default()) {
            return Outcome::Inconsistent(format!("{} asserted both zero and nonzero", m.expr_text(&a.expr)));
        }
    }
    // Constraints last, so zero assumptions are solved first.
    let mut all: Vec<Expr> = constraints.iter().rev().cloned().collect();
    all.extend(work);
    let mut r = Reducer { ctx: &ctx, rank, args: &args, solved: Vec::new(), nz, certs: Vec::new(), steps: 0 };
    let out = r.run(all);
    // A nonzero assumption that reduces to zero contradicts the system.
    if let Outcome::Consistent(red) = &out {
        for a in assumptions.iter().filter(|a| a.polarity == Polarity::Nonzero) {
            if r.reduce(&a.expr).is_zero() {
                return Outcome::Inconsistent(format!("{} asserted nonzero but reduces to 0", m.expr_text(&a.expr)));
            }
        }
        let _ = red;
    }
    out
}

/// Uncertified leading coefficients of the pending constraints, most frequent first.
pub fn pending_pivots(m: &ModelDef, rank: &Ranking, red: &Reduced) -> Vec<Expr> {
    let mut count: BTreeMap<Poly, usize> = BTreeMap::new();
    let mut first: Vec<Poly> = Vec::new();
    let _ = m;
    for e in &red.pending {
        let p = e.num();
        let Some(l) = rank.leader(p) else { continue };
        let d = p.degree_in(l);
        let c = p.coeffs_in(l).remove(&d).unwrap_or_default();
        let (c, _) = normal_form(&c, &red.nonzero);
        for f in pivot_factors(&c) {
            if !f.atoms().iter().any(|a| a.is_constitutive()) || red.nonzero.contains_poly(&f) {
                continue;
            }
            if !first.contains(&f) {
                first.push(f.clone());
            }
            *count.entry(f).or_default() += 1;
        }
    }
    let mut ranked: Vec<(usize, usize, Poly)> =
        first.into_iter().enumerate().map(|(i, f)| (usize::MAX - count[&f], i, f)).collect();
    ranked.sort();
    ranked.into_iter().map(|(_, _, f)| Expr::poly(f)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseNode {
    pub assumptions: Vec<Assumption>,
    pub status: NodeStatus,
    /// Reduced system (consistent nodes only).
    pub system: Option<Reduced>,
    pub contradiction: Option<String>,
    /// Pivot this node branches on.
    pub pivot: Option<Expr>,
    pub children: Vec<CaseNode>,
    /// Branches dropped as inconsistent or equal to a sibling.
    pub pruned: Vec<String>,
    pub depth_cap_hit: bool,
}

impl CaseNode {
    pub fn leaves(&self) -> Vec<&CaseNode> {
        if self.children.is_empty() {
            return if self.status == NodeStatus::ClosedInconsistent { Vec::new() } else { vec![self] };
        }
        self.children.iter().flat_map(|c| c.leaves()).collect()
    }

    /// Pivots branched on anywhere in the tree, in first-use order.
    pub fn pivots(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            if let Some(p) = &n.pivot {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

fn node(m: &ModelDef, rank: &Ranking, cons: &[Expr], nz: &NonzeroSet, path: Vec<Assumption>, depth: usize) -> CaseNode {
    let mut n = CaseNode {
        assumptions: path.clone(),
        status: NodeStatus::Leaf,
        system: None,
        contradiction: None,
        pivot: None,
        children: Vec::new(),
        pruned: Vec::new(),
        depth_cap_hit: false,
    };
    let red = match apply_to(m, rank, cons, nz, &path) {
        Outcome::Inconsistent(why) => {
            n.status = NodeStatus::ClosedInconsistent;
            n.contradiction = Some(why);
            return n;
        }
        Outcome::Consistent(r) => r,
    };
    let pivots = pending_pivots(m, rank, &red);
    if red.truncated {
        n.status = NodeStatus::Open;
    }
    n.system = Some(red);
    let Some(p) = pivots.into_iter().next() else { return n };
    if depth == 0 {
        n.depth_cap_hit = true;
        n.status = NodeStatus::Open;
        return n;
    }
    n.pivot = Some(p.clone());
    let branches = [Assumption::nonzero(p.clone()), Assumption::zero(p)];
    let kids: Vec<CaseNode> = branches
        .par_iter()
        .map(|a| {
            let mut q = path.clone();
            q.push(a.clone());
            node(m, rank, cons, nz, q, depth - 1)
        })
        .collect();
    for k in kids {
        if k.status == NodeStatus::ClosedInconsistent {
            n.pruned.push(format!(
                "{}: {}",
                assumption_text(m, k.assumptions.last().unwrap()),
                k.contradiction.clone().unwrap_or_default()
            ));
            continue;
        }
        let dup = n
            .children
            .iter()
            .any(|c| c.system.as_ref().map(|s| s.constraints()) == k.system.as_ref().map(|s| s.constraints()));
        if dup {
            n.pruned.push(format!("{}: same system as sibling", assumption_text(m, k.assumptions.last().unwrap())));
            continue;
        }
        n.children.push(k);
    }
    if n.children.len() == 1 {
        // The surviving branch replaces the split.
        let only = n.children.pop().unwrap();
        let pruned = std::mem::take(&mut n.pruned);
        let mut only = only;
        only.pruned.splice(0..0, pruned);
        return only;
    }
    n.status = NodeStatus::Open;
    if n.children.is_empty() {
        n.status = NodeStatus::ClosedInconsistent;
    }
    n
}

pub fn assumption_text(m: &ModelDef, a: &Assumption) -> String {
    let op = match a.polarity {
        Polarity::Zero => "=",
        Polarity::Nonzero => "!=",
    };
    format!("{} {op} 0", m.expr_text(&a.expr))
}

/// Binary case tree over the pivots found along each branch.
pub fn build_tree(m: &ModelDef, cs: &ConstraintSystem, root: &[Assumption], depth: usize) -> CaseNode {
    let rank = Ranking::for_model(m);
    node(m, &rank, &cs.exprs(), &cs.nonzero, root.to_vec(), depth)
}

/// Pivots used by the default tree.
pub fn pivot_candidates(m: &ModelDef, cs: &ConstraintSystem) -> Vec<Expr> {
    build_tree(m, cs, &[], 4).pivots()
}

/// Adds the residual numerator to the constraints (adiabatic mode).
pub fn force_residual_zero(cs: &ConstraintSystem) -> ConstraintSystem {
    let mut c = cs.clone();
    if !c.residual.is_zero() {
        let num = c.residual.num().clone();
        c.push_constraint(&num, crate::split::ConstraintSource::Residual);
        c.residual = Expr::zero();
    }
    c
}
