use num_traits::{One, Signed};

use super::atom::{Atom, AtomKind};
use super::diff::DiffContext;
use super::expr::Expr;
use super::poly::{Poly, Q};
use super::KernelError;

/// Unnormalized expression as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Num(Q),
    Atom(Atom),
    Neg(Box<Tree>),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, i64),
    /// Total derivative by the independent variable with this index.
    Deriv(usize, Box<Tree>),
}

impl Tree {
    pub fn normalize(&self, ctx: Option<&DiffContext>) -> Result<Expr, KernelError> {
        Ok(match self {
            Tree::Num(c) => Expr::constant(c.clone()),
            Tree::Atom(a) => Expr::atom(*a),
            Tree::Neg(x) => x.normalize(ctx)?.neg(),
            Tree::Add(a, b) => a.normalize(ctx)?.add(&b.normalize(ctx)?),
            Tree::Sub(a, b) => a.normalize(ctx)?.sub(&b.normalize(ctx)?),
            Tree::Mul(a, b) => a.normalize(ctx)?.mul(&b.normalize(ctx)?),
            Tree::Div(a, b) => a.normalize(ctx)?.div(&b.normalize(ctx)?)?,
            Tree::Pow(a, k) => a.normalize(ctx)?.pow(*k)?,
            Tree::Deriv(i, x) => {
                let c = ctx.ok_or(KernelError::DerivativeWithoutContext)?;
                c.total_derivative_at(&x.normalize(ctx)?, *i)?
            }
        })
    }

    /// Visits every atom, including those under derivative operators.
    pub fn visit_atoms(&self, f: &mut impl FnMut(Atom)) {
        match self {
            Tree::Num(_) => {}
            Tree::Atom(a) => f(*a),
            Tree::Neg(x) | Tree::Pow(x, _) | Tree::Deriv(_, x) => x.visit_atoms(f),
            Tree::Add(a, b) | Tree::Sub(a, b) | Tree::Mul(a, b) | Tree::Div(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Tree::Add(..) | Tree::Sub(..) => 1,
            Tree::Mul(..) | Tree::Div(..) => 2,
            Tree::Neg(_) => 3,
            Tree::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Source text; re-parsing it yields the same tree.
    pub fn render(&self, ctx: &DiffContext) -> String {
        let wrap = |t: &Tree, min: u8| {
            let s = t.render(ctx);
            if t.prec() < min {
                format!("({s})")
            } else {
                s
            }
        };
        match self {
            Tree::Num(c) => render_rational(c),
            Tree::Atom(a) => atom_source(*a, ctx),
            Tree::Neg(x) => format!("-{}", wrap(x, 3)),
            Tree::Add(a, b) => format!("{} + {}", wrap(a, 1), wrap(b, 2)),
            Tree::Sub(a, b) => format!("{} - {}", wrap(a, 1), wrap(b, 2)),
            Tree::Mul(a, b) => format!("{}*{}", wrap(a, 2), wrap(b, 3)),
            Tree::Div(a, b) => format!("{}/{}", wrap(a, 2), wrap(b, 3)),
            Tree::Pow(a, k) => format!("{}^{}", wrap(a, 5), k),
            Tree::Deriv(i, x) => format!("d{}({})", ctx.indeps[*i], x.render(ctx)),
        }
    }
}

fn render_rational(c: &Q) -> String {
    if c.is_integer() && !c.is_negative() {
        c.to_string()
    } else {
        format!("({c})")
    }
}

/// Jet variable as nested derivative operators, e.g. `dt(dx(rho))`.
pub fn jet_source(a: Atom, ctx: &DiffContext) -> String {
    let Some((f, idx)) = a.as_jet() else { return a.to_string() };
    let mut s = f.to_string();
    for (i, &k) in idx.0.iter().enumerate().rev() {
        for _ in 0..k {
            s = format!("d{}({s})", ctx.indeps[i]);
        }
    }
    s
}

/// Subscript shorthand for jet variables, e.g. `rho_tx`.
pub fn jet_short(a: Atom, ctx: &DiffContext) -> String {
    let Some((f, idx)) = a.as_jet() else { return a.to_string() };
    if idx.is_zero() {
        return f.to_string();
    }
    let mut s = format!("{f}_");
    for (i, &k) in idx.0.iter().enumerate() {
        for _ in 0..k {
            s.push_str(&ctx.indeps[i]);
        }
    }
    s
}

/// Partial derivative symbol, e.g. `dq1/drho/deps`.
pub fn partial_source(a: Atom, ctx: &DiffContext) -> String {
    let AtomKind::ConstitPartial(name, s) = a.kind() else { return a.to_string() };
    let mut out = format!("d{name}");
    let args = ctx.args.get(name.as_str());
    for (j, &k) in s.0.iter().enumerate() {
        let arg = args.and_then(|v| v.get(j)).map_or_else(|| format!("#{j}"), |&x| jet_short(x, ctx));
        for _ in 0..k {
            out.push_str("/d");
            out.push_str(&arg);
        }
    }
    out
}

pub fn atom_source(a: Atom, ctx: &DiffContext) -> String {
    match a.kind() {
        AtomKind::JetVar(..) => jet_source(a, ctx),
        AtomKind::ConstitPartial(..) => partial_source(a, ctx),
        _ => a.name().to_string(),
    }
}

/// Compact display name: `rho_x`, `dq1/drho`.
pub fn atom_text(a: Atom, ctx: &DiffContext) -> String {
    match a.kind() {
        AtomKind::JetVar(..) => jet_short(a, ctx),
        AtomKind::ConstitPartial(..) => partial_source(a, ctx),
        _ => a.name().to_string(),
    }
}

pub fn poly_text(p: &Poly, ctx: &DiffContext) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts: Vec<String> = Vec::new();
        if !mag.is_one() || m.is_one() {
            parts.push(if mag.is_integer() { mag.to_string() } else { format!("({mag})") });
        }
        for &(a, k) in m.factors() {
            let n = atom_text(a, ctx);
            parts.push(if k == 1 { n } else { format!("{n}^{k}") });
        }
        out.push_str(&parts.join("*"));
    }
    out
}

pub fn expr_text(e: &Expr, ctx: &DiffContext) -> String {
    if e.den().is_one() {
        return poly_text(e.num(), ctx);
    }
    let n = poly_text(e.num(), ctx);
    let n = if e.num().len() > 1 { format!("({n})") } else { n };
    let d = poly_text(e.den(), ctx);
    let d = if e.den().len() > 1 || d.contains('/') || e.den().as_monomial().is_some_and(|(m, _)| m.degree() > 1) {
        format!("({d})")
    } else {
        d
    };
    format!("{n}/{d}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::atom::MultiIndex;
    use crate::kernel::poly::{q, qr};

    #[test]
    fn render_precedence() {
        let ctx = DiffContext::new(vec!["t".into(), "x".into()]);
        let a = || Box::new(Tree::Atom(Atom::jet("a", MultiIndex(vec![0, 0]))));
        let b = || Box::new(Tree::Atom(Atom::jet("b", MultiIndex(vec![0, 0]))));
        let t = Tree::Mul(Box::new(Tree::Add(a(), b())), Box::new(Tree::Neg(b())));
        assert_eq!(t.render(&ctx), "(a + b)*-b");
        let t = Tree::Sub(a(), Box::new(Tree::Sub(a(), b())));
        assert_eq!(t.render(&ctx), "a - (a - b)");
        let t = Tree::Neg(Box::new(Tree::Pow(a(), 2)));
        assert_eq!(t.render(&ctx), "-a^2");
        let t = Tree::Pow(Box::new(Tree::Neg(a())), 2);
        assert_eq!(t.render(&ctx), "(-a)^2");
        assert_eq!(Tree::Num(qr(1, 2)).render(&ctx), "(1/2)");
        assert_eq!(Tree::Num(q(3)).render(&ctx), "3");
        let j = Atom::jet("rho", MultiIndex(vec![1, 2]));
        assert_eq!(jet_source(j, &ctx), "dt(dx(dx(rho)))");
        assert_eq!(jet_short(j, &ctx), "rho_txx");
    }

    #[test]
    fn normalize_needs_context_for_derivatives() {
        let t = Tree::Deriv(0, Box::new(Tree::Atom(Atom::jet("a", MultiIndex(vec![0])))));
        assert_eq!(t.normalize(None), Err(KernelError::DerivativeWithoutContext));
        let ctx = DiffContext::new(vec!["t".into()]);
        assert_eq!(t.normalize(Some(&ctx)).unwrap(), Expr::atom(Atom::jet("a", MultiIndex(vec![1]))));
    }
}
