//! LaTeX rendering of expressions and standalone documents.

use entropik_core::kernel::{Atom, AtomKind, Expr, Monomial, Poly, Q};
use entropik_core::ModelDef;
use num_traits::{One, Signed};

const GREEK: [&str; 24] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa", "lambda", "mu", "nu", "xi",
    "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega", "Phi", "Lambda",
];

/// `Phi1` → `\Phi_{1}`, `Lambda_mass` → `\Lambda^{\mathrm{mass}}`, `eps` → `\epsilon`.
pub fn name(s: &str) -> String {
    if let Some((base, tag)) = s.split_once('_') {
        return format!("{}^{{\\mathrm{{{}}}}}", name(base), tag.replace('_', "\\_"));
    }
    let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (base, digits) = s.split_at(cut);
    let base = match base {
        "eps" => "\\epsilon".to_string(),
        "theta" => "\\vartheta".to_string(),
        b if GREEK.contains(&b) || ["Gamma", "Delta", "Theta", "Psi", "Omega", "Pi", "Sigma"].contains(&b) => {
            format!("\\{b}")
        }
        b if b.chars().count() == 1 => b.to_string(),
        b => format!("\\mathrm{{{b}}}"),
    };
    if digits.is_empty() {
        base
    } else {
        format!("{base}_{{{digits}}}")
    }
}

pub fn atom(m: &ModelDef, a: Atom) -> String {
    match a.kind() {
        AtomKind::IndepVar(n) => name(n),
        AtomKind::JetVar(f, idx) => {
            let sub: String = idx
                .0
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat_n(m.indeps[i].as_str(), k as usize))
                .collect();
            if sub.is_empty() {
                name(f)
            } else {
                format!("{{{}}}_{{{sub}}}", name(f))
            }
        }
        AtomKind::ConstitSym(n) => name(n),
        AtomKind::ConstitPartial(n, slots) => {
            let Some(d) = m.decl(n) else { return format!("\\partial {}", name(n)) };
            let order = slots.order();
            let head = if order == 1 { "\\partial".to_string() } else { format!("\\partial^{{{order}}}") };
            let mut below = Vec::new();
            for (j, &k) in slots.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v = atom(m, d.args[j]);
                below.push(if k == 1 { format!("\\partial {v}") } else { format!("\\partial {v}^{{{k}}}") });
            }
            format!("\\frac{{{head} {}}}{{{}}}", name(n), below.join("\\,"))
        }
    }
}

fn rational(c: &Q) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("\\tfrac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn monomial(m: &ModelDef, mono: &Monomial) -> String {
    mono.factors()
        .iter()
        .map(|&(a, k)| if k == 1 { atom(m, a) } else { format!("{{{}}}^{{{k}}}", atom(m, a)) })
        .collect::<Vec<_>>()
        .join("\\,")
}

pub fn poly(m: &ModelDef, p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (mono, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mono.is_one() {
            out.push_str(&rational(&a));
        } else {
            if !a.is_one() {
                out.push_str(&rational(&a));
                out.push_str("\\,");
            }
            out.push_str(&monomial(m, mono));
        }
    }
    out
}

pub fn expr(m: &ModelDef, e: &Expr) -> String {
    if e.den().is_one() {
        poly(m, e.num())
    } else {
        format!("\\frac{{{}}}{{{}}}", poly(m, e.num()), poly(m, e.den()))
    }
}

pub enum Block {
    /// One displayed equation per entry.
    Math(Vec<String>),
    Text(String),
}

fn escape(s: &str) -> String {
    let mut o = String::new();
    for c in s.chars() {
        match c {
            '\\' => o.push_str("\\textbackslash{}"),
            '{' | '}' | '_' | '#' | '%' | '&' | '$' => {
                o.push('\\');
                o.push(c);
            }
            '^' => o.push_str("\\^{}"),
            '~' => o.push_str("\\~{}"),
            _ => o.push(c),
        }
    }
    o
}

/// Standalone article with one section per entry.
pub fn document(title: &str, sections: &[(String, Block)]) -> String {
    let mut o =
        String::from("\\documentclass{article}\n\\usepackage{amsmath}\n\\allowdisplaybreaks\n\\begin{document}\n");
    o.push_str(&format!("\\section*{{{}}}\n", escape(title)));
    for (head, b) in sections {
        o.push_str(&format!("\\subsection*{{{}}}\n", escape(head)));
        match b {
            Block::Math(lines) if lines.is_empty() => o.push_str("None.\n"),
            Block::Math(lines) => {
                o.push_str("\\begin{align*}\n");
                o.push_str(&lines.join(" \\\\\n"));
                o.push_str("\n\\end{align*}\n");
            }
            Block::Text(t) => {
                o.push_str(&escape(t));
                o.push('\n');
            }
        }
    }
    o.push_str("\\end{document}\n");
    o
}

/// True when every brace is matched, ignoring escaped ones.
pub fn balanced(s: &str) -> bool {
    let mut depth: i64 = 0;
    let mut esc = false;
    for c in s.chars() {
        if esc {
            esc = false;
            continue;
        }
        match c {
            '\\' => esc = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(name("Phi1"), "\\Phi_{1}");
        assert_eq!(name("T12"), "T_{12}");
        assert_eq!(name("Lambda_mass"), "\\Lambda^{\\mathrm{mass}}");
        assert_eq!(name("Cv"), "\\mathrm{Cv}");
    }

    #[test]
    fn balance() {
        assert!(balanced("\\frac{a}{b} \\{"));
        assert!(!balanced("{a}}"));
    }
}
