use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

/// Derivative orders, one entry per independent variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// Componentwise `self >= other` with at least one strict entry.
    pub fn strictly_dominates(&self, other: &MultiIndex) -> bool {
        self.dominates(other) && self != other
    }

    pub fn incremented(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `self` dominates `other`.
    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !self.dominates(other) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }
}

/// Structural content of an atom. The derived ordering is the global atom order:
/// independent variables, then jet variables, then constitutive symbols, then their partials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomKind {
    IndepVar(String),
    JetVar(String, MultiIndex),
    ConstitSym(String),
    ConstitPartial(String, MultiIndex),
}

/// Interned atom handle. Equality is identity; ordering is structural.
#[derive(Clone, Copy)]
pub struct Atom(&'static AtomKind);

type Table = RwLock<HashMap<AtomKind, &'static AtomKind>>;

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(HashMap::new()))
}

impl Atom {
    pub fn intern(kind: AtomKind) -> Atom {
        if let Some(&k) = table().read().expect("atom table poisoned").get(&kind) {
            return Atom(k);
        }
        let mut w = table().write().expect("atom table poisoned");
        if let Some(&k) = w.get(&kind) {
            return Atom(k);
        }
        let leaked: &'static AtomKind = Box::leak(Box::new(kind.clone()));
        w.insert(kind, leaked);
        Atom(leaked)
    }

    pub fn indep(name: &str) -> Atom {
        Atom::intern(AtomKind::IndepVar(name.to_string()))
    }

    pub fn jet(field: &str, idx: MultiIndex) -> Atom {
        Atom::intern(AtomKind::JetVar(field.to_string(), idx))
    }

    pub fn constit(name: &str) -> Atom {
        Atom::intern(AtomKind::ConstitSym(name.to_string()))
    }

    pub fn partial(name: &str, slots: MultiIndex) -> Atom {
        if slots.is_zero() {
            return Atom::constit(name);
        }
        Atom::intern(AtomKind::ConstitPartial(name.to_string(), slots))
    }

    pub fn kind(&self) -> &'static AtomKind {
        self.0
    }

    pub fn is_indep(&self) -> bool {
        matches!(self.0, AtomKind::IndepVar(_))
    }

    pub fn is_jet(&self) -> bool {
        matches!(self.0, AtomKind::JetVar(..))
    }

    /// Constitutive symbol or one of its partials.
    pub fn is_constitutive(&self) -> bool {
        matches!(self.0, AtomKind::ConstitSym(_) | AtomKind::ConstitPartial(..))
    }

    pub fn as_jet(&self) -> Option<(&'static str, &'static MultiIndex)> {
        match self.0 {
            AtomKind::JetVar(f, a) => Some((f.as_str(), a)),
            _ => None,
        }
    }

    /// Name and slot index of a constitutive atom; `None` slots for the bare symbol.
    pub fn as_constit(&self) -> Option<(&'static str, Option<&'static MultiIndex>)> {
        match self.0 {
            AtomKind::ConstitSym(n) => Some((n.as_str(), None)),
            AtomKind::ConstitPartial(n, s) => Some((n.as_str(), Some(s))),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.0 {
            AtomKind::IndepVar(n)
            | AtomKind::JetVar(n, _)
            | AtomKind::ConstitSym(n)
            | AtomKind::ConstitPartial(n, _) => n.as_str(),
        }
    }

    /// Differential order of a jet variable or constitutive partial; 0 otherwise.
    pub fn order(&self) -> u32 {
        match self.0 {
            AtomKind::JetVar(_, a) | AtomKind::ConstitPartial(_, a) => a.order(),
            _ => 0,
        }
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0 as *const AtomKind as usize).hash(state)
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if std::ptr::eq(self.0, other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(other.0)
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            AtomKind::IndepVar(n) | AtomKind::ConstitSym(n) => write!(f, "{n}"),
            AtomKind::JetVar(n, a) if a.is_zero() => write!(f, "{n}"),
            AtomKind::JetVar(n, a) => write!(f, "{n}{:?}", a.0),
            AtomKind::ConstitPartial(n, s) => write!(f, "d{n}{:?}", s.0),
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        AtomKind::deserialize(d).map(Atom::intern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_gives_identity() {
        let a = Atom::jet("rho", MultiIndex(vec![1, 0]));
        let b = Atom::jet("rho", MultiIndex(vec![1, 0]));
        assert_eq!(a, b);
        assert!(std::ptr::eq(a.kind(), b.kind()));
    }

    #[test]
    fn kind_order() {
        let t = Atom::indep("zz");
        let j = Atom::jet("a", MultiIndex(vec![0]));
        let c = Atom::constit("a");
        let p = Atom::partial("a", MultiIndex(vec![1]));
        assert!(t < j && j < c && c < p);
    }

    #[test]
    fn zero_partial_is_symbol() {
        assert_eq!(Atom::partial("q", MultiIndex(vec![0, 0])), Atom::constit("q"));
    }

    #[test]
    fn concurrent_interning() {
        let handles: Vec<_> = (0..8)
            .map(|i| {
                std::thread::spawn(move || {
                    (0..200).map(|k| Atom::jet("w", MultiIndex(vec![(k + i) % 50, 1]))).collect::<Vec<_>>()
                })
            })
            .collect();
        let all: Vec<Vec<Atom>> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for v in &all {
            for a in v {
                let (_, idx) = a.as_jet().unwrap();
                assert_eq!(*a, Atom::jet("w", idx.clone()));
            }
        }
    }

    #[test]
    fn dominance() {
        let a = MultiIndex(vec![1, 0, 0]);
        let b = MultiIndex(vec![1, 1, 0]);
        assert!(b.strictly_dominates(&a));
        assert!(!a.dominates(&b));
        assert!(!a.strictly_dominates(&a));
        assert_eq!(b.minus(&a), Some(MultiIndex(vec![0, 1, 0])));
    }
}
