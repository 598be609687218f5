use std::collections::HashMap;

use super::atom::{Atom, AtomKind, MultiIndex};
use super::expr::Expr;
use super::poly::Poly;
use super::KernelError;

/// What the chain rule needs to know: independent variables and constitutive arguments.
#[derive(Clone, Debug, Default)]
pub struct DiffContext {
    pub indeps: Vec<String>,
    pub args: HashMap<String, Vec<Atom>>,
}

impl DiffContext {
    pub fn new(indeps: Vec<String>) -> Self {
        DiffContext { indeps, args: HashMap::new() }
    }

    pub fn declare(&mut self, name: &str, args: Vec<Atom>) {
        self.args.insert(name.to_string(), args);
    }

    pub fn indep_index(&self, iv: &str) -> Option<usize> {
        self.indeps.iter().position(|s| s == iv)
    }

    fn args_of(&self, name: &str) -> Result<&[Atom], KernelError> {
        self.args.get(name).map(|v| v.as_slice()).ok_or_else(|| KernelError::UnknownConstitSym(name.to_string()))
    }

    /// D_i of a single atom.
    pub fn total_atom(&self, a: Atom, i: usize) -> Result<Poly, KernelError> {
        Ok(match a.kind() {
            AtomKind::IndepVar(v) => {
                if self.indeps.get(i).is_some_and(|s| s == v) {
                    Poly::one()
                } else {
                    Poly::zero()
                }
            }
            AtomKind::JetVar(f, al) => Poly::atom(Atom::jet(f, al.incremented(i))),
            AtomKind::ConstitSym(name) => {
                let args = self.args_of(name)?;
                self.chain(name, &MultiIndex::zero(args.len()), args, i)?
            }
            AtomKind::ConstitPartial(name, s) => {
                let args = self.args_of(name)?;
                self.chain(name, s, args, i)?
            }
        })
    }

    fn chain(&self, name: &str, s: &MultiIndex, args: &[Atom], i: usize) -> Result<Poly, KernelError> {
        let mut r = Poly::zero();
        for (j, &arg) in args.iter().enumerate() {
            let da = self.total_atom(arg, i)?;
            if da.is_zero() {
                continue;
            }
            let p = Atom::partial(name, s.incremented(j));
            r = r.add(&da.mul(&Poly::atom(p)));
        }
        Ok(r)
    }

    pub fn total_derivative(&self, e: &Expr, iv: &str) -> Result<Expr, KernelError> {
        let i = self.indep_index(iv).ok_or_else(|| KernelError::UnknownIndependent(iv.to_string()))?;
        self.total_derivative_at(e, i)
    }

    pub fn total_derivative_at(&self, e: &Expr, i: usize) -> Result<Expr, KernelError> {
        let mut cache: HashMap<Atom, Poly> = HashMap::new();
        e.derive_with(&mut |a| {
            if let Some(p) = cache.get(&a) {
                return Ok(p.clone());
            }
            let p = self.total_atom(a, i)?;
            cache.insert(a, p.clone());
            Ok(p)
        })
    }

    /// Applies D^alpha.
    pub fn total_multi(&self, e: &Expr, alpha: &MultiIndex) -> Result<Expr, KernelError> {
        let mut r = e.clone();
        for (i, &k) in alpha.0.iter().enumerate() {
            for _ in 0..k {
                r = self.total_derivative_at(&r, i)?;
            }
        }
        Ok(r)
    }

    /// Derivative with respect to an argument atom, seeing constitutive symbols as functions
    /// of their arguments and every other atom as independent of it.
    pub fn arg_atom(&self, a: Atom, wrt: Atom) -> Poly {
        if a == wrt {
            return Poly::one();
        }
        let (name, slots) = match a.kind() {
            AtomKind::ConstitSym(n) => (n, None),
            AtomKind::ConstitPartial(n, s) => (n, Some(s)),
            _ => return Poly::zero(),
        };
        let Some(args) = self.args.get(name) else { return Poly::zero() };
        match args.iter().position(|&x| x == wrt) {
            None => Poly::zero(),
            Some(j) => {
                let s = slots.cloned().unwrap_or_else(|| MultiIndex::zero(args.len()));
                Poly::atom(Atom::partial(name, s.incremented(j)))
            }
        }
    }

    pub fn arg_derivative(&self, e: &Expr, wrt: Atom) -> Expr {
        e.derive_with(&mut |a| Ok(self.arg_atom(a, wrt))).expect("argument derivative is total")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> DiffContext {
        let mut c = DiffContext::new(vec!["t".into(), "x".into()]);
        let rho = Atom::jet("rho", MultiIndex(vec![0, 0]));
        let eps = Atom::jet("eps", MultiIndex(vec![0, 0]));
        c.declare("q1", vec![rho, eps]);
        c
    }

    #[test]
    fn chain_rule_on_flux() {
        let c = ctx();
        let d = c.total_derivative(&Expr::atom(Atom::constit("q1")), "x").unwrap();
        let want = Expr::atom(Atom::partial("q1", MultiIndex(vec![1, 0])))
            .mul(&Expr::atom(Atom::jet("rho", MultiIndex(vec![0, 1]))))
            .add(
                &Expr::atom(Atom::partial("q1", MultiIndex(vec![0, 1])))
                    .mul(&Expr::atom(Atom::jet("eps", MultiIndex(vec![0, 1])))),
            );
        assert_eq!(d, want);
    }

    #[test]
    fn leibniz_simple() {
        let c = ctx();
        let rho = Expr::atom(Atom::jet("rho", MultiIndex(vec![0, 0])));
        let u = Expr::atom(Atom::jet("u", MultiIndex(vec![0, 0])));
        let d = c.total_derivative(&rho.mul(&u), "x").unwrap();
        let rx = Expr::atom(Atom::jet("rho", MultiIndex(vec![0, 1])));
        let ux = Expr::atom(Atom::jet("u", MultiIndex(vec![0, 1])));
        assert_eq!(d, rx.mul(&u).add(&rho.mul(&ux)));
    }

    #[test]
    fn unknown_symbol() {
        let c = ctx();
        let e = Expr::atom(Atom::constit("zz"));
        assert_eq!(c.total_derivative(&e, "t"), Err(KernelError::UnknownConstitSym("zz".into())));
    }

    #[test]
    fn time_derivative_through_rate_argument() {
        let mut c = DiffContext::new(vec!["t".into(), "x".into(), "y".into()]);
        let rho = Atom::jet("rho", MultiIndex(vec![0, 0, 0]));
        let rt = Atom::jet("rho", MultiIndex(vec![1, 0, 0]));
        let th = Atom::jet("theta", MultiIndex(vec![0, 0, 0]));
        c.declare("eta", vec![rho, rt, th]);
        let d = c.total_derivative(&Expr::atom(Atom::constit("eta")), "t").unwrap();
        let p = |s: Vec<u32>| Expr::atom(Atom::partial("eta", MultiIndex(s)));
        let want = p(vec![1, 0, 0])
            .mul(&Expr::atom(rt))
            .add(&p(vec![0, 1, 0]).mul(&Expr::atom(Atom::jet("rho", MultiIndex(vec![2, 0, 0])))))
            .add(&p(vec![0, 0, 1]).mul(&Expr::atom(Atom::jet("theta", MultiIndex(vec![1, 0, 0])))));
        assert_eq!(d, want);
    }

    #[test]
    fn argument_derivative() {
        let c = ctx();
        let rho = Atom::jet("rho", MultiIndex(vec![0, 0]));
        let e = Expr::atom(Atom::constit("q1")).mul(&Expr::atom(rho));
        let d = c.arg_derivative(&e, rho);
        let want = Expr::atom(Atom::partial("q1", MultiIndex(vec![1, 0])))
            .mul(&Expr::atom(rho))
            .add(&Expr::atom(Atom::constit("q1")));
        assert_eq!(d, want);
    }
}
