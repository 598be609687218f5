use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::atom::Atom;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Power product of atoms, kept sorted by atom with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn pow(a: Atom, k: u32) -> Self {
        if k == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, k)])
        }
    }

    pub fn from_factors(mut f: Vec<(Atom, u32)>) -> Self {
        f.retain(|&(_, k)| k > 0);
        f.sort_by_key(|a| a.0);
        let mut out: Vec<(Atom, u32)> = Vec::with_capacity(f.len());
        for (a, k) in f {
            match out.last_mut() {
                Some((b, e)) if *b == a => *e += k,
                _ => out.push((a, k)),
            }
        }
        Monomial(out)
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, k)| k).sum()
    }

    pub fn degree_in(&self, a: Atom) -> u32 {
        self.0.iter().find(|(b, _)| *b == a).map_or(0, |&(_, k)| k)
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.0.iter().map(|&(a, _)| a)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / o` if `o` divides `self`.
    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(a, k) in &self.0 {
            if j < o.0.len() && o.0[j].0 == a {
                let e = o.0[j].1;
                if e > k {
                    return None;
                }
                if k > e {
                    out.push((a, k - e));
                }
                j += 1;
            } else if j < o.0.len() && o.0[j].0 < a {
                return None;
            } else {
                out.push((a, k));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for &(a, k) in &self.0 {
            let e = o.degree_in(a);
            if e > 0 {
                out.push((a, k.min(e)));
            }
        }
        Monomial(out)
    }

    pub fn lcm(&self, o: &Monomial) -> Monomial {
        let g = self.gcd(o);
        self.mul(o).div(&g).expect("gcd divides product")
    }

    /// Removes all powers of `a`, returning the exponent removed.
    pub fn without(&self, a: Atom) -> (Monomial, u32) {
        let k = self.degree_in(a);
        (Monomial(self.0.iter().copied().filter(|(b, _)| *b != a).collect()), k)
    }

    /// Restriction to the atoms satisfying `keep`, and the complementary part.
    pub fn split_by(&self, keep: impl Fn(Atom) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|(x, _)| keep(*x));
        (Monomial(a), Monomial(b))
    }
}

impl Ord for Monomial {
    /// Lexicographic: smaller atoms are more significant.
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b) = (&self.0, &o.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(xa, ea)), Some(&(xb, eb))) => {
                    if xa != xb {
                        return if xa < xb { Ordering::Greater } else { Ordering::Less };
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                }
            }
            i += 1;
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (a, k)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *k == 1 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}^{k}")?;
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Q::one(), Monomial::var(a))
    }

    pub fn term(c: Q, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Q> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Single term `c * m`.
    pub fn as_monomial(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        let (m, c) = self.as_monomial()?;
        match m.factors() {
            [(a, 1)] if c.is_one() => Some(*a),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, o: &Poly, s: &Q, shift: &Monomial) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &o.terms {
            self.add_term(m.mul(shift), c * s);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, c)| (k.mul(m), c * s)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let (a, b) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        let mut r = Poly::zero();
        for (m, c) in &a.terms {
            r.add_assign_scaled(b, c, m);
        }
        r
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one();
        let mut b = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Leading term under the lexicographic order (largest monomial).
    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading().map_or_else(Q::zero, |(_, c)| c.clone())
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return Monomial::one() };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Poly> {
        let mut t = BTreeMap::new();
        for (k, c) in &self.terms {
            t.insert(k.div(m)?, c.clone());
        }
        Some(Poly { terms: t })
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (ld, lc) = d.leading()?;
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.len() == 1 {
            return self.div_monomial(ld).map(|p| p.scale(&lc.recip()));
        }
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        while let Some((lm, c)) = rem.leading() {
            let qm = lm.div(ld)?;
            let qc = c * &lc_inv;
            rem.add_assign_scaled(d, &-qc.clone(), &qm);
            quo.add_term(qm, qc);
        }
        Some(quo)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            s.extend(m.atoms());
        }
        s
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.terms.keys().any(|m| m.degree_in(a) > 0)
    }

    pub fn contains_any(&self, f: impl Fn(Atom) -> bool) -> bool {
        self.terms.keys().any(|m| m.atoms().any(&f))
    }

    pub fn degree_in(&self, a: Atom) -> u32 {
        self.terms.keys().map(|m| m.degree_in(a)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Coefficients of the powers of `a`: self = Σ_k coeff[k] · a^k.
    pub fn coeffs_in(&self, a: Atom) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, k) = m.without(a);
            out.entry(k).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Formal partial derivative in `a`.
    pub fn diff(&self, a: Atom) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let k = m.degree_in(a);
            if k == 0 {
                continue;
            }
            let (rest, _) = m.without(a);
            let nm = rest.mul(&Monomial::pow(a, k - 1));
            r.add_term(nm, c * q(k as i64));
        }
        r
    }

    /// Replaces `a` by the polynomial `v`.
    pub fn subst_atom(&self, a: Atom, v: &Poly) -> Poly {
        if !self.contains_atom(a) {
            return self.clone();
        }
        let mut r = Poly::zero();
        let mut pows: Vec<Poly> = vec![Poly::one()];
        for (k, coeff) in self.coeffs_in(a) {
            while pows.len() <= k as usize {
                let next = pows.last().unwrap().mul(v);
                pows.push(next);
            }
            r = r.add(&coeff.mul(&pows[k as usize]));
        }
        r
    }

    pub fn eval(&self, f: &impl Fn(Atom) -> Option<Q>) -> Result<Q, Atom> {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(a, k) in m.factors() {
                let x = f(a).ok_or(a)?;
                v *= num_traits::pow(x, k as usize);
            }
            total += v;
        }
        Ok(total)
    }

    pub fn is_negative_leading(&self) -> bool {
        self.leading().is_some_and(|(_, c)| c.is_negative())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{m:?}")?;
            } else {
                write!(f, "({c})*{m:?}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::atom::MultiIndex;

    fn v(n: &str) -> Poly {
        Poly::atom(Atom::jet(n, MultiIndex(vec![0])))
    }

    #[test]
    fn lex_order_is_multiplicative() {
        let a = Monomial::var(Atom::indep("a"));
        let b = Monomial::var(Atom::indep("b"));
        let c = Monomial::var(Atom::indep("c"));
        assert!(a > b.mul(&b));
        assert!(a.mul(&c) > b.mul(&c));
        assert!(b > c && c > Monomial::one());
    }

    #[test]
    fn exact_division() {
        let (x, y) = (v("x"), v("y"));
        let f = x.add(&y).mul(&x.sub(&y.scale(&q(3))));
        let g = x.add(&y);
        assert_eq!(f.div_exact(&g), Some(x.sub(&y.scale(&q(3)))));
        assert_eq!(f.add(&Poly::one()).div_exact(&g), None);
    }

    #[test]
    fn content_and_diff() {
        let (x, y) = (v("x"), v("y"));
        let f = x.mul(&x).mul(&y).add(&x.mul(&y).mul(&y));
        assert_eq!(
            f.monomial_content(),
            Monomial::from_factors(vec![
                (Atom::jet("x", MultiIndex(vec![0])), 1),
                (Atom::jet("y", MultiIndex(vec![0])), 1)
            ])
        );
        let xa = Atom::jet("x", MultiIndex(vec![0]));
        assert_eq!(f.diff(xa), x.mul(&y).scale(&q(2)).add(&y.mul(&y)));
    }

    #[test]
    fn substitution_of_atom() {
        let (x, y) = (v("x"), v("y"));
        let f = x.mul(&x).add(&y);
        let xa = Atom::jet("x", MultiIndex(vec![0]));
        assert_eq!(f.subst_atom(xa, &y), y.mul(&y).add(&y));
    }
}
