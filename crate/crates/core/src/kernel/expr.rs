use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::atom::Atom;
use super::poly::{Monomial, Poly, Q};
use super::KernelError;

/// Canonical rational function `num / den`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Expr {
        Expr::constant(Q::one())
    }

    pub fn constant(c: Q) -> Expr {
        Expr { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(super::poly::q(n))
    }

    pub fn atom(a: Atom) -> Expr {
        Expr { num: Poly::atom(a), den: Poly::one() }
    }

    pub fn poly(p: Poly) -> Expr {
        Expr { num: p, den: Poly::one() }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Expr, KernelError> {
        if den.is_zero() {
            return Err(KernelError::DivisionByZeroExpr);
        }
        Ok(canonical(num, den))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Equality as rational functions; the stored form cancels only monomial content and exact quotients.
    pub fn equiv(&self, o: &Expr) -> bool {
        self.sub(o).is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        if self.den.is_one() {
            self.num.as_atom()
        } else {
            None
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.num.atoms();
        s.extend(self.den.atoms());
        s
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.num.contains_atom(a) || self.den.contains_atom(a)
    }

    pub fn contains_any(&self, f: impl Fn(Atom) -> bool + Copy) -> bool {
        self.num.contains_any(f) || self.den.contains_any(f)
    }

    pub fn add(&self, o: &Expr) -> Expr {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return canonical(self.num.add(&o.num), self.den.clone());
        }
        if let Some(k) = o.den.div_exact(&self.den) {
            return canonical(self.num.mul(&k).add(&o.num), o.den.clone());
        }
        if let Some(k) = self.den.div_exact(&o.den) {
            return canonical(self.num.add(&o.num.mul(&k)), self.den.clone());
        }
        // common monomial part of the denominators is shared once
        let g = self.den.monomial_content().gcd(&o.den.monomial_content());
        let a = self.den.div_monomial(&g).expect("content divides");
        let b = o.den.div_monomial(&g).expect("content divides");
        let num = self.num.mul(&b).add(&o.num.mul(&a));
        canonical(num, a.mul(&b).mul_monomial(&g, &Q::one()))
    }

    pub fn neg(&self) -> Expr {
        Expr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Expr { num: self.num.mul(&o.num), den: Poly::one() };
        }
        // cross-cancel exact factors before multiplying out
        let (mut n1, mut d1) = (self.num.clone(), self.den.clone());
        let (mut n2, mut d2) = (o.num.clone(), o.den.clone());
        if !d2.is_one() {
            if let Some(k) = n1.div_exact(&d2) {
                n1 = k;
                d2 = Poly::one();
            }
        }
        if !d1.is_one() {
            if let Some(k) = n2.div_exact(&d1) {
                n2 = k;
                d1 = Poly::one();
            }
        }
        canonical(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, c: &Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Expr, KernelError> {
        Expr::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Expr) -> Result<Expr, KernelError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn pow(&self, k: i64) -> Result<Expr, KernelError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Ok(Expr { num: base.num.pow(e), den: base.den.pow(e) })
    }

    /// Formal partial derivative in a single atom.
    pub fn partial_diff(&self, a: Atom) -> Expr {
        let dn = self.num.diff(a);
        if self.den.is_one() {
            return Expr::poly(dn);
        }
        let dd = self.den.diff(a);
        if dd.is_zero() {
            return canonical(dn, self.den.clone());
        }
        canonical(dn.mul(&self.den).sub(&self.num.mul(&dd)), self.den.mul(&self.den))
    }

    /// Applies a derivation given by its values on atoms.
    pub fn derive_with(&self, d: &mut impl FnMut(Atom) -> Result<Poly, KernelError>) -> Result<Expr, KernelError> {
        let dn = derive_poly(&self.num, d)?;
        if self.den.is_one() {
            return Ok(Expr::poly(dn));
        }
        let dd = derive_poly(&self.den, d)?;
        if dd.is_zero() {
            return Ok(canonical(dn, self.den.clone()));
        }
        Ok(canonical(dn.mul(&self.den).sub(&self.num.mul(&dd)), self.den.mul(&self.den)))
    }

    pub fn eval(&self, assignment: &HashMap<Atom, Q>) -> Result<Q, KernelError> {
        self.eval_with(&|a| assignment.get(&a).cloned())
    }

    pub fn eval_with(&self, f: &impl Fn(Atom) -> Option<Q>) -> Result<Q, KernelError> {
        let d = self.den.eval(f).map_err(KernelError::MissingAssignment)?;
        if d.is_zero() {
            return Err(KernelError::DenominatorVanishes);
        }
        let n = self.num.eval(f).map_err(KernelError::MissingAssignment)?;
        Ok(n / d)
    }

    /// Replaces atoms by expressions in one pass.
    pub fn substitute(&self, m: &SubstitutionMap) -> Expr {
        if m.is_empty() || !self.contains_any(|a| m.pairs.contains_key(&a)) {
            return self.clone();
        }
        let mut cache = HashMap::new();
        let n = subst_poly(&self.num, m, &mut cache);
        if self.den.is_one() {
            return n;
        }
        let d = subst_poly(&self.den, m, &mut cache);
        n.div(&d).unwrap_or_else(|_| panic!("substitution annihilated a denominator"))
    }

    /// Fallible variant of [`Expr::substitute`].
    pub fn try_substitute(&self, m: &SubstitutionMap) -> Result<Expr, KernelError> {
        if m.is_empty() || !self.contains_any(|a| m.pairs.contains_key(&a)) {
            return Ok(self.clone());
        }
        let mut cache = HashMap::new();
        let n = subst_poly(&self.num, m, &mut cache);
        let d = subst_poly(&self.den, m, &mut cache);
        n.div(&d)
    }

    /// Numerator coefficients of each monomial in `vars`.
    pub fn collect_coefficients(&self, vars: &BTreeSet<Atom>) -> Result<BTreeMap<Monomial, Poly>, KernelError> {
        if let Some(a) = self.den.atoms().into_iter().find(|a| vars.contains(a)) {
            return Err(KernelError::NotPolynomialInVars(a));
        }
        Ok(collect_poly(&self.num, |a| vars.contains(&a)))
    }
}

/// Splits `p` by the monomial part in the selected atoms.
pub fn collect_poly(p: &Poly, sel: impl Fn(Atom) -> bool) -> BTreeMap<Monomial, Poly> {
    let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (key, rest) = m.split_by(&sel);
        out.entry(key).or_default().add_term(rest, c.clone());
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn derive_poly(p: &Poly, d: &mut impl FnMut(Atom) -> Result<Poly, KernelError>) -> Result<Poly, KernelError> {
    let mut r = Poly::zero();
    let mut cache: HashMap<Atom, Poly> = HashMap::new();
    for (m, c) in p.terms() {
        for &(a, k) in m.factors() {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(a) {
                e.insert(d(a)?);
            }
            let da = &cache[&a];
            if da.is_zero() {
                continue;
            }
            let rest = m.div(&Monomial::pow(a, 1)).expect("factor divides");
            r.add_assign_scaled(da, &(c * super::poly::q(k as i64)), &rest);
        }
    }
    Ok(r)
}

fn subst_poly(p: &Poly, m: &SubstitutionMap, cache: &mut HashMap<(Atom, u32), Expr>) -> Expr {
    // group by denominator so that most additions are polynomial
    let mut groups: BTreeMap<Poly, Poly> = BTreeMap::new();
    for (mono, c) in p.terms() {
        let mut kept = Vec::new();
        let mut num = Poly::constant(c.clone());
        let mut den = Poly::one();
        for &(a, k) in mono.factors() {
            match m.pairs.get(&a) {
                None => kept.push((a, k)),
                Some(v) => {
                    let e =
                        cache.entry((a, k)).or_insert_with(|| Expr { num: v.num.pow(k), den: v.den.pow(k) }).clone();
                    num = num.mul(&e.num);
                    if !e.den.is_one() {
                        den = den.mul(&e.den);
                    }
                }
            }
        }
        let shift = Monomial::from_factors(kept);
        let g = groups.entry(den).or_default();
        g.add_assign_scaled(&num, &Q::one(), &shift);
    }
    let mut acc = Expr::zero();
    for (den, num) in groups {
        acc = acc.add(&canonical(num, den));
    }
    acc
}

fn canonical(mut num: Poly, mut den: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    if let Some(c) = den.as_constant() {
        if !c.is_one() {
            num = num.scale(&c.recip());
        }
        return Expr { num, den: Poly::one() };
    }
    let g = num.monomial_content().gcd(&den.monomial_content());
    if !g.is_one() {
        num = num.div_monomial(&g).expect("content divides");
        den = den.div_monomial(&g).expect("content divides");
    }
    if den.len() > 1 {
        if let Some(qq) = num.div_exact(&den) {
            return Expr { num: qq, den: Poly::one() };
        }
    }
    if let Some(c) = den.as_constant() {
        return Expr { num: num.scale(&c.recip()), den: Poly::one() };
    }
    let lc = den.leading_coeff();
    if !lc.is_one() {
        let inv = lc.recip();
        num = num.scale(&inv);
        den = den.scale(&inv);
    }
    Expr { num, den }
}

/// Atom-to-expression replacement table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubstitutionMap {
    pub pairs: BTreeMap<Atom, Expr>,
    pub triangular: bool,
}

impl SubstitutionMap {
    pub fn new() -> Self {
        SubstitutionMap { pairs: BTreeMap::new(), triangular: true }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, Expr)>) -> Self {
        let mut m = SubstitutionMap { pairs: pairs.into_iter().collect(), triangular: false };
        m.triangular = m.check_triangular();
        m
    }

    pub fn insert(&mut self, a: Atom, e: Expr) {
        self.pairs.insert(a, e);
        self.triangular = self.check_triangular();
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn get(&self, a: Atom) -> Option<&Expr> {
        self.pairs.get(&a)
    }

    pub fn check_triangular(&self) -> bool {
        self.pairs.values().all(|v| !v.contains_any(|a| self.pairs.contains_key(&a)))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ExprRepr {
    num: Vec<(Vec<(Atom, u32)>, String)>,
    den: Vec<(Vec<(Atom, u32)>, String)>,
}

fn poly_repr(p: &Poly) -> Vec<(Vec<(Atom, u32)>, String)> {
    p.terms().iter().map(|(m, c)| (m.factors().to_vec(), c.to_string())).collect()
}

fn poly_from_repr(v: Vec<(Vec<(Atom, u32)>, String)>) -> Result<Poly, String> {
    let mut p = Poly::zero();
    for (f, c) in v {
        let c: Q = c.parse().map_err(|_| format!("bad rational {c}"))?;
        p.add_term(Monomial::from_factors(f), c);
    }
    Ok(p)
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExprRepr { num: poly_repr(&self.num), den: poly_repr(&self.den) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ExprRepr::deserialize(d)?;
        let num = poly_from_repr(r.num).map_err(serde::de::Error::custom)?;
        let den = poly_from_repr(r.den).map_err(serde::de::Error::custom)?;
        Expr::new(num, den).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::atom::MultiIndex;
    use crate::kernel::poly::q;

    fn a(n: &str) -> Expr {
        Expr::atom(Atom::jet(n, MultiIndex(vec![0, 0])))
    }

    #[test]
    fn cancellation() {
        let (rho, u) = (a("rho"), a("u"));
        let e = rho.mul(&u).div(&rho).unwrap();
        assert_eq!(e, u);
        assert_eq!(rho.mul(&u).add(&u.mul(&rho)), rho.mul(&u).scale(&q(2)));
        assert!(rho.mul(&rho).sub(&rho.mul(&rho)).is_zero());
        assert!(rho.sub(&rho).den().is_one());
    }

    #[test]
    fn division_by_zero() {
        let rho = a("rho");
        assert_eq!(rho.div(&rho.sub(&rho)), Err(KernelError::DivisionByZeroExpr));
    }

    #[test]
    fn polynomial_denominator_cancels() {
        let (x, y) = (a("x"), a("y"));
        let s = x.add(&y);
        let e = x.mul(&x).sub(&y.mul(&y)).div(&s).unwrap();
        assert_eq!(e, x.sub(&y));
    }

    #[test]
    fn quotient_rule() {
        let rho = a("rho");
        let ra = rho.as_atom().unwrap();
        let inv = Expr::one().div(&rho).unwrap();
        assert_eq!(inv.partial_diff(ra), Expr::int(-1).div(&rho.pow(2).unwrap()).unwrap());
        let u = a("u");
        assert_eq!(rho.pow(2).unwrap().mul(&u).partial_diff(ra), rho.mul(&u).scale(&q(2)));
    }

    #[test]
    fn substitution_power() {
        let (rho, ux, rt) = (a("rho"), a("ux"), a("rt"));
        let m = SubstitutionMap::from_pairs([(rt.as_atom().unwrap(), rho.mul(&ux).neg())]);
        assert!(m.triangular);
        assert_eq!(rt.pow(2).unwrap().substitute(&m), rho.pow(2).unwrap().mul(&ux.pow(2).unwrap()));
        assert_eq!(rho.substitute(&SubstitutionMap::new()), rho);
    }

    #[test]
    fn collect_and_eval() {
        let (p, qq, c, x, y) = (a("a"), a("b"), a("c"), a("x"), a("y"));
        let e = p.mul(&x).add(&qq.mul(&x).mul(&y)).add(&c);
        let vars: BTreeSet<Atom> = [x.as_atom().unwrap(), y.as_atom().unwrap()].into();
        let t = e.collect_coefficients(&vars).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[&Monomial::one()], Poly::atom(c.as_atom().unwrap()));
        assert!(Expr::zero().collect_coefficients(&vars).unwrap().is_empty());
        let bad = Expr::one().div(&x).unwrap();
        assert!(matches!(bad.collect_coefficients(&vars), Err(KernelError::NotPolynomialInVars(_))));

        let (rho, u) = (a("rho"), a("u"));
        let m: HashMap<Atom, Q> = [(rho.as_atom().unwrap(), q(2)), (u.as_atom().unwrap(), q(3))].into();
        assert_eq!(rho.pow(2).unwrap().mul(&u).eval(&m).unwrap(), q(12));
        let z: HashMap<Atom, Q> = [(rho.as_atom().unwrap(), q(0))].into();
        assert_eq!(Expr::one().div(&rho).unwrap().eval(&z), Err(KernelError::DenominatorVanishes));
    }

    #[test]
    fn json_round_trip() {
        let e = a("x").add(&Expr::constant(super::super::poly::qr(3, 7))).div(&a("y").add(&Expr::int(2))).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
