//! Model definition: variables, constitutive declarations, equations and the entropy inequality.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{Atom, AtomKind, DiffContext, Expr, KernelError, MultiIndex, Tree};

pub const DEFAULT_MAX_ORDER: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstitDecl {
    pub name: String,
    pub args: Vec<Atom>,
    /// Pairs of argument slots whose mixed dependence is symmetrized.
    pub symmetric: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub label: String,
    pub left: Tree,
    pub right: Tree,
}

impl Equation {
    pub fn tree(&self) -> Tree {
        match &self.right {
            Tree::Num(c) if num_traits::Zero::is_zero(c) => self.left.clone(),
            r => Tree::Sub(Box::new(self.left.clone()), Box::new(r.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDef {
    pub indeps: Vec<String>,
    pub fields: Vec<String>,
    pub constits: Vec<ConstitDecl>,
    pub equations: Vec<Equation>,
    /// Left side of `entropy >= 0`.
    pub entropy: Tree,
    pub leading: Vec<Atom>,
    pub assumptions: Vec<Tree>,
    pub max_order: Option<u32>,
    /// Optional classifying functions for case analysis.
    pub classify: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{0} leading derivatives for {1} equations")]
    LeadingCount(usize, usize),
    #[error("leading derivative `{0}` does not occur in any expanded equation")]
    LeadingAbsent(String),
    #[error("leading derivative `{0}` is a derivative of leading derivative `{1}`")]
    LeadingDependent(String, String),
    #[error("leading derivative `{0}` is not a derivative of a declared field")]
    LeadingNotJet(String),
    #[error("constitutive symbol `{0}` has repeated arguments")]
    RepeatedArgument(String),
    #[error("argument of `{0}` is not a derivative of a declared field")]
    BadArgument(String),
    #[error("symmetric pair of `{0}` references an invalid slot")]
    BadSymmetricPair(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::LeadingCount(..) => "E210",
            ModelError::LeadingAbsent(_) => "E211",
            ModelError::LeadingDependent(..) => "E212",
            ModelError::LeadingNotJet(_) => "E213",
            ModelError::RepeatedArgument(_) => "E214",
            ModelError::BadArgument(_) => "E215",
            ModelError::BadSymmetricPair(_) => "E216",
            ModelError::Kernel(k) => k.code(),
        }
    }
}

/// Chain-expanded model expressions.
#[derive(Clone, Debug)]
pub struct Expanded {
    pub equations: Vec<Expr>,
    pub entropy: Expr,
    pub assumptions: Vec<Expr>,
}

/// Partition of the atoms of a model.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Classification {
    pub leading: BTreeSet<Atom>,
    pub dependency: BTreeSet<Atom>,
    /// Basis of free elements: independent variables and jet variables up to the model order
    /// that are neither dependencies nor leading derivatives or their consequences.
    pub free: BTreeSet<Atom>,
    pub excluded: BTreeSet<Atom>,
    /// Dependency arguments that are also leading (or consequences of one).
    pub conflicts: BTreeSet<Atom>,
}

impl ModelDef {
    pub fn new(indeps: &[&str], fields: &[&str]) -> Self {
        ModelDef {
            indeps: indeps.iter().map(|s| s.to_string()).collect(),
            fields: fields.iter().map(|s| s.to_string()).collect(),
            constits: Vec::new(),
            equations: Vec::new(),
            entropy: Tree::Num(num_traits::Zero::zero()),
            leading: Vec::new(),
            assumptions: Vec::new(),
            max_order: None,
            classify: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.indeps.len()
    }

    pub fn max_order(&self) -> u32 {
        self.max_order.unwrap_or(DEFAULT_MAX_ORDER)
    }

    pub fn field(&self, name: &str) -> Atom {
        Atom::jet(name, MultiIndex::zero(self.n()))
    }

    /// `field` differentiated by the named independent variables.
    pub fn jet(&self, name: &str, by: &[&str]) -> Atom {
        let mut idx = MultiIndex::zero(self.n());
        for v in by {
            let i = self.indeps.iter().position(|s| s == v).expect("unknown independent variable");
            idx = idx.incremented(i);
        }
        Atom::jet(name, idx)
    }

    pub fn decl(&self, name: &str) -> Option<&ConstitDecl> {
        self.constits.iter().find(|d| d.name == name)
    }

    /// Partial derivative atom of `name` by the given argument atoms.
    pub fn partial(&self, name: &str, by: &[Atom]) -> Option<Atom> {
        let d = self.decl(name)?;
        let mut s = MultiIndex::zero(d.args.len());
        for a in by {
            s = s.incremented(d.args.iter().position(|x| x == a)?);
        }
        Some(Atom::partial(name, s))
    }

    pub fn ctx(&self) -> DiffContext {
        let mut c = DiffContext::new(self.indeps.clone());
        for d in &self.constits {
            c.declare(&d.name, d.args.clone());
        }
        c
    }

    pub fn expand(&self) -> Result<Expanded, KernelError> {
        let ctx = self.ctx();
        let equations = self.equations.iter().map(|e| e.tree().normalize(Some(&ctx))).collect::<Result<Vec<_>, _>>()?;
        let entropy = self.entropy.normalize(Some(&ctx))?;
        let assumptions = self.assumptions.iter().map(|t| t.normalize(Some(&ctx))).collect::<Result<Vec<_>, _>>()?;
        Ok(Expanded { equations, entropy, assumptions })
    }

    /// Structural checks that need no expansion, then those that do.
    pub fn validate(&self) -> Vec<ModelError> {
        let mut errs = Vec::new();
        let n = self.n();
        for d in &self.constits {
            let set: BTreeSet<Atom> = d.args.iter().copied().collect();
            if set.len() != d.args.len() {
                errs.push(ModelError::RepeatedArgument(d.name.clone()));
            }
            for a in &d.args {
                match a.as_jet() {
                    Some((f, idx)) if self.fields.iter().any(|x| x == f) && idx.len() == n => {}
                    _ => errs.push(ModelError::BadArgument(d.name.clone())),
                }
            }
            for &(i, j) in &d.symmetric {
                if i >= d.args.len() || j >= d.args.len() || i == j {
                    errs.push(ModelError::BadSymmetricPair(d.name.clone()));
                }
            }
        }
        if self.leading.len() != self.equations.len() {
            errs.push(ModelError::LeadingCount(self.leading.len(), self.equations.len()));
        }
        for a in &self.leading {
            match a.as_jet() {
                Some((f, idx)) if self.fields.iter().any(|x| x == f) && idx.len() == n && !idx.is_zero() => {}
                _ => errs.push(ModelError::LeadingNotJet(a.to_string())),
            }
        }
        for a in &self.leading {
            for b in &self.leading {
                if let (Some((fa, ia)), Some((fb, ib))) = (a.as_jet(), b.as_jet()) {
                    if fa == fb && ia.strictly_dominates(ib) {
                        let ctx = self.ctx();
                        errs.push(ModelError::LeadingDependent(
                            crate::kernel::tree::jet_short(*a, &ctx),
                            crate::kernel::tree::jet_short(*b, &ctx),
                        ));
                    }
                }
            }
        }
        if !errs.is_empty() {
            return errs;
        }
        match self.expand() {
            Err(e) => errs.push(e.into()),
            Ok(x) => {
                let ctx = self.ctx();
                for a in &self.leading {
                    if !x.equations.iter().any(|e| e.contains_atom(*a)) {
                        errs.push(ModelError::LeadingAbsent(crate::kernel::tree::jet_short(*a, &ctx)));
                    }
                }
            }
        }
        errs
    }

    /// Whether a jet variable is a leading derivative or one of its differential consequences.
    pub fn is_leading_or_consequence(&self, a: Atom) -> bool {
        let Some((f, idx)) = a.as_jet() else { return false };
        self.leading.iter().any(|l| {
            let (g, li) = l.as_jet().expect("leading derivatives are jet variables");
            g == f && idx.dominates(li)
        })
    }

    pub fn dependency_atoms(&self) -> BTreeSet<Atom> {
        self.constits.iter().flat_map(|d| d.args.iter().copied()).collect()
    }

    /// Partition of the atoms in `exprs`; the free basis covers all jet orders up to the highest
    /// one occurring.
    pub fn classify_atoms(&self, exprs: &[&Expr]) -> Classification {
        let mut atoms = BTreeSet::new();
        for e in exprs {
            atoms.extend(e.atoms());
        }
        let deps = self.dependency_atoms();
        let mut c = Classification::default();
        let mut k = 0;
        for &a in &atoms {
            match a.kind() {
                AtomKind::IndepVar(_) => {
                    c.free.insert(a);
                }
                AtomKind::JetVar(_, idx) => {
                    k = k.max(idx.order());
                    if self.is_leading_or_consequence(a) {
                        c.leading.insert(a);
                        if deps.contains(&a) {
                            c.conflicts.insert(a);
                        }
                    } else if deps.contains(&a) {
                        c.dependency.insert(a);
                    } else {
                        c.free.insert(a);
                    }
                }
                _ => {
                    c.excluded.insert(a);
                }
            }
        }
        for d in &deps {
            if self.is_leading_or_consequence(*d) {
                c.conflicts.insert(*d);
            }
        }
        for v in &self.indeps {
            c.free.insert(Atom::indep(v));
        }
        for f in &self.fields {
            for idx in multi_indices(self.n(), k) {
                let a = Atom::jet(f, idx);
                if !deps.contains(&a) && !self.is_leading_or_consequence(a) {
                    c.free.insert(a);
                }
            }
        }
        c
    }

    /// Human labels used in text output.
    pub fn atom_text(&self, a: Atom) -> String {
        crate::kernel::tree::atom_text(a, &self.ctx())
    }

    pub fn expr_text(&self, e: &Expr) -> String {
        crate::kernel::tree::expr_text(e, &self.ctx())
    }

    /// Every constitutive symbol with its argument list, in declaration order.
    pub fn symbol_args(&self) -> BTreeMap<String, Vec<Atom>> {
        self.constits.iter().map(|d| (d.name.clone(), d.args.clone())).collect()
    }
}

/// All multi-indices of length `n` with total order at most `k`.
pub fn multi_indices(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero(n)];
    let mut frontier = out.clone();
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for m in &frontier {
            for i in 0..n {
                next.insert(m.incremented(i));
            }
        }
        frontier = next.into_iter().collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_enumeration() {
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(2, 1).len(), 3);
    }
}
