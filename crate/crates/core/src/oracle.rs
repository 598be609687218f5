//! Exact numeric spot checks of a constraint system.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::poly::{q, qr};
use crate::kernel::{Atom, Expr, Poly, Q};
use crate::model::ModelDef;
use crate::split::SolutionSetResult;

const MAX_DRAWS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleFailure {
    pub trial: usize,
    pub check: String,
    /// Atom text to value, for the failing point.
    pub point: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub constraint: usize,
    pub varied: String,
    pub entropy: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub trials: usize,
    pub seed: u64,
    pub identity_pass: usize,
    pub variety_pass: usize,
    /// Trials where no constitutive atom could be solved for some constraint.
    pub variety_skipped: usize,
    pub rejected_draws: usize,
    pub failures: Vec<OracleFailure>,
    /// One entry per constraint for which a negative entropy point was constructed.
    pub witnesses: Vec<Witness>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.identity_pass == self.trials
    }
}

/// Per-trial seed; trials are independent of scheduling order.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_rational(rng: &mut impl Rng) -> Q {
    let p: i64 = rng.random_range(-12..=12);
    let q: i64 = rng.random_range(1..=6);
    qr(p, q)
}

fn nonzero_rational(rng: &mut impl Rng) -> Q {
    loop {
        let v = random_rational(rng);
        if v != Q::default() {
            return v;
        }
    }
}

struct Sampler<'a> {
    r: &'a SolutionSetResult,
    atoms: Vec<Atom>,
    side: Vec<Expr>,
}

impl<'a> Sampler<'a> {
    fn new(r: &'a SolutionSetResult) -> Self {
        let cs = &r.system;
        let mut atoms: BTreeSet<Atom> = r.entropy.atoms();
        for (_, c) in &cs.table {
            atoms.extend(c.atoms());
        }
        for s in &cs.side_conditions {
            atoms.extend(s.atoms());
        }
        atoms.extend(cs.residual.atoms());
        Sampler { r, atoms: atoms.into_iter().collect(), side: cs.side_conditions.clone() }
    }

    fn respects_side(&self, pt: &HashMap<Atom, Q>) -> bool {
        self.side.iter().all(|s| matches!(s.eval(pt), Ok(v) if v != Q::default()))
    }

    /// Draws a point off every nonzero condition; returns the number of rejected draws too.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (HashMap<Atom, Q>, usize) {
        let mut rejected = 0;
        loop {
            let pt: HashMap<Atom, Q> = self.atoms.iter().map(|&a| (a, nonzero_rational(rng))).collect();
            if self.respects_side(&pt) || rejected >= MAX_DRAWS {
                return (pt, rejected);
            }
            rejected += 1;
        }
    }

    /// Moves the point onto the variety along a peeling order; false where a solved-for
    /// coefficient vanishes.
    fn project(&self, pt: &mut HashMap<Atom, Q>, order: &[(usize, Atom)]) -> bool {
        let zero = Q::default();
        for &(i, a) in order {
            let p = self.r.system.constraints[i].expr.num();
            let cs = p.coeffs_in(a);
            let c0 = cs.get(&0).cloned().unwrap_or_default();
            let ev = |q: &Poly| q.eval(&|b| pt.get(&b).cloned()).ok();
            let (Some(v1), Some(v0)) = (ev(&cs[&1]), ev(&c0)) else { return false };
            if v1 == zero {
                return false;
            }
            pt.insert(a, -v0 / v1);
        }
        true
    }

    /// Peels constraints (except `skip`) owning a linear constitutive atom that no other constraint
    /// has; solving in reverse peel order leaves earlier solutions intact. None if peeling stalls.
    fn order(&self, skip: Option<usize>) -> Option<Vec<(usize, Atom)>> {
        let cons = &self.r.system.constraints;
        let mut remaining: Vec<usize> = (0..cons.len()).filter(|&i| Some(i) != skip).collect();
        let atoms: Vec<BTreeSet<Atom>> = cons.iter().map(|c| c.expr.atoms()).collect();
        let mut count: HashMap<Atom, usize> = HashMap::new();
        for &i in &remaining {
            for &a in &atoms[i] {
                *count.entry(a).or_default() += 1;
            }
        }
        if let Some(k) = skip {
            for &a in &atoms[k] {
                *count.entry(a).or_default() += 1;
            }
        }
        let mut peeled = Vec::new();
        while !remaining.is_empty() {
            let found = remaining.iter().enumerate().find_map(|(pos, &i)| {
                let p = cons[i].expr.num();
                atoms[i]
                    .iter()
                    .rev()
                    .find(|&&a| a.is_constitutive() && count[&a] == 1 && p.degree_in(a) == 1)
                    .map(|&a| (pos, i, a))
            })?;
            let (pos, i, a) = found;
            remaining.swap_remove(pos);
            for b in &atoms[i] {
                *count.get_mut(b).unwrap() -= 1;
            }
            peeled.push((i, a));
        }
        peeled.reverse();
        Some(peeled)
    }
}

fn point_text(m: &ModelDef, pt: &HashMap<Atom, Q>) -> BTreeMap<String, String> {
    pt.iter().map(|(a, v)| (m.atom_text(*a), v.to_string())).collect()
}

#[derive(Default)]
struct TrialResult {
    identity: bool,
    variety: Option<bool>,
    rejected: usize,
    failures: Vec<OracleFailure>,
}

fn run_trial(m: &ModelDef, s: &Sampler, order: Option<&[(usize, Atom)]>, trial: usize, seed: u64) -> TrialResult {
    let cs = &s.r.system;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
    let (mut pt, rejected) = s.draw(&mut rng);
    let mut out = TrialResult { rejected, ..Default::default() };
    let f = |a: Atom| pt.get(&a).cloned();
    let lhs = s.r.entropy.num().eval(&f);
    let mut rhs = Some(Q::default());
    for (mono, c) in &cs.table {
        let mv = Poly::term(q(1), mono.clone()).eval(&f);
        rhs = match (rhs, mv, c.eval(&f)) {
            (Some(acc), Ok(a), Ok(b)) => Some(acc + a * b),
            _ => None,
        };
    }
    out.identity = rhs.is_some() && lhs.ok() == rhs;
    if !out.identity {
        out.failures.push(OracleFailure { trial, check: "identity".into(), point: point_text(m, &pt) });
    }
    if order.is_some_and(|o| s.project(&mut pt, o)) && s.respects_side(&pt) {
        let e = s.r.entropy.eval(&pt);
        let r = cs.residual.eval(&pt);
        let pass = e.is_ok() && e == r;
        out.variety = Some(pass);
        if !pass {
            out.failures.push(OracleFailure { trial, check: "on-variety".into(), point: point_text(m, &pt) });
        }
    }
    out
}

/// Tries to violate constraint `k` alone and find a point where the entropy is negative.
fn witness(m: &ModelDef, s: &Sampler, k: usize, seed: u64) -> Option<Witness> {
    let cs = &s.r.system;
    let vars = crate::split::split_atoms(m, &s.r.entropy);
    let num = s.r.entropy.num();
    let order = s.order(Some(k))?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed ^ 0x5157, k));
    for _ in 0..MAX_DRAWS {
        let (mut pt, _) = s.draw(&mut rng);
        if !s.project(&mut pt, &order) || !s.respects_side(&pt) {
            continue;
        }
        match cs.constraints[k].expr.eval(&pt) {
            Ok(v) if v != Q::default() => {}
            _ => continue,
        }
        for &x in &vars {
            if num.degree_in(x) != 1 {
                continue;
            }
            let at = |v: Q, pt: &mut HashMap<Atom, Q>| {
                pt.insert(x, v);
                s.r.entropy.eval(pt).ok()
            };
            let (Some(e0), Some(e1)) = (at(Q::default(), &mut pt), at(q(1), &mut pt)) else {
                continue;
            };
            let slope = e1 - e0.clone();
            if slope == Q::default() {
                continue;
            }
            let xv = (q(-1) - e0) / slope;
            if let Some(e) = at(xv, &mut pt) {
                if e < Q::default() {
                    return Some(Witness { constraint: k, varied: m.atom_text(x), entropy: e.to_string() });
                }
            }
        }
        for _ in 0..MAX_DRAWS {
            for &x in &vars {
                let scale: i64 = rng.random_range(1..=50);
                pt.insert(x, random_rational(&mut rng) * q(scale));
            }
            if let Ok(e) = s.r.entropy.eval(&pt) {
                if e < Q::default() {
                    return Some(Witness { constraint: k, varied: "*".into(), entropy: e.to_string() });
                }
            }
        }
    }
    None
}

pub fn numeric_oracle(m: &ModelDef, r: &SolutionSetResult, trials: usize, seed: u64) -> OracleReport {
    let s = Sampler::new(r);
    let order = s.order(None);
    let results: Vec<TrialResult> =
        (0..trials).into_par_iter().map(|t| run_trial(m, &s, order.as_deref(), t, seed)).collect();
    let mut rep = OracleReport { trials, seed, ..Default::default() };
    for t in results {
        rep.identity_pass += t.identity as usize;
        match t.variety {
            Some(true) => rep.variety_pass += 1,
            Some(false) => {}
            None => rep.variety_skipped += 1,
        }
        rep.rejected_draws += t.rejected;
        rep.failures.extend(t.failures);
    }
    rep.witnesses = (0..r.system.constraints.len()).into_par_iter().filter_map(|k| witness(m, &s, k, seed)).collect();
    rep
}
