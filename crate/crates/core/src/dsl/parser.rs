// Diagnostics are large but only built on the error path.

#![allow(clippy::result_large_err)]
use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::diag::{codes, Diagnostic, SourceSpan};
use super::lexer::{lex, Tok, TokKind};
use crate::kernel::{Atom, MultiIndex, Tree, Q};
use crate::model::{ConstitDecl, Equation, ModelDef, ModelError};

/// Names visible to the expression grammar.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub indeps: Vec<String>,
    pub fields: Vec<String>,
    pub constits: HashMap<String, Vec<Atom>>,
    pub params: BTreeSet<String>,
}

impl Scope {
    pub fn of_model(m: &ModelDef) -> Scope {
        Scope {
            indeps: m.indeps.clone(),
            fields: m.fields.clone(),
            constits: m.constits.iter().map(|d| (d.name.clone(), d.args.clone())).collect(),
            params: BTreeSet::new(),
        }
    }

    fn n(&self) -> usize {
        self.indeps.len()
    }

    /// `rho`, or the shorthand `rho_tx`.
    pub fn resolve_jet(&self, name: &str) -> Option<Atom> {
        if self.fields.iter().any(|f| f == name) {
            return Some(Atom::jet(name, MultiIndex::zero(self.n())));
        }
        for f in &self.fields {
            let Some(rest) = name.strip_prefix(f.as_str()).and_then(|r| r.strip_prefix('_')) else { continue };
            if rest.is_empty() {
                continue;
            }
            let mut idx = MultiIndex::zero(self.n());
            let mut r = rest;
            'outer: while !r.is_empty() {
                let mut order: Vec<(usize, &String)> = self.indeps.iter().enumerate().collect();
                order.sort_by_key(|(_, s)| std::cmp::Reverse(s.len()));
                for (i, v) in order {
                    if let Some(t) = r.strip_prefix(v.as_str()) {
                        idx = idx.incremented(i);
                        r = t;
                        continue 'outer;
                    }
                }
                break;
            }
            if r.is_empty() {
                return Some(Atom::jet(f, idx));
            }
        }
        None
    }

    fn deriv_index(&self, ident: &str) -> Option<usize> {
        let v = ident.strip_prefix('d')?;
        self.indeps.iter().position(|s| s == v)
    }

    fn is_known(&self, name: &str) -> bool {
        self.indeps.iter().any(|s| s == name)
            || self.constits.contains_key(name)
            || self.params.contains(name)
            || self.resolve_jet(name).is_some()
    }
}

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct ExprParser<'a> {
    pub toks: &'a [Tok],
    pub pos: usize,
    pub scope: &'a Scope,
    pub file: &'a str,
    pub line: usize,
}

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [Tok], scope: &'a Scope, file: &'a str, line: usize) -> Self {
        ExprParser { toks, pos: 0, scope, file, line }
    }

    fn span(&self, t: Option<&Tok>) -> SourceSpan {
        let (s, e) = match t {
            Some(t) => (t.col, t.end),
            None => match self.toks.last() {
                Some(t) => (t.end, t.end + 1),
                None => (1, 2),
            },
        };
        SourceSpan { file: self.file.into(), line: self.line, col_start: s, col_end: e }
    }

    fn err(&self, code: &str, msg: impl Into<String>, t: Option<&Tok>) -> Diagnostic {
        Diagnostic::error(code, msg, self.span(t))
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k)
    }

    pub fn at_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok { kind: TokKind::Sym(x), .. }) if *x == c)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.at_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(codes::SYNTAX, format!("expected `{c}`"), self.peek()))
        }
    }

    pub fn expect_end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err(codes::SYNTAX, "unexpected trailing input", self.peek()))
        }
    }

    pub fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok { kind: TokKind::Ident(s), .. }) => {
                self.pos += 1;
                Ok(s.clone())
            }
            t => Err(self.err(codes::SYNTAX, "expected a name", t)),
        }
    }

    pub fn expr(&mut self) -> PResult<Tree> {
        let mut l = self.term()?;
        loop {
            if self.at_sym('+') {
                self.pos += 1;
                l = Tree::Add(Box::new(l), Box::new(self.term()?));
            } else if self.at_sym('-') {
                self.pos += 1;
                l = Tree::Sub(Box::new(l), Box::new(self.term()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn term(&mut self) -> PResult<Tree> {
        let mut l = self.unary()?;
        loop {
            if self.at_sym('*') {
                self.pos += 1;
                l = Tree::Mul(Box::new(l), Box::new(self.unary()?));
            } else if self.at_sym('/') {
                self.pos += 1;
                l = Tree::Div(Box::new(l), Box::new(self.unary()?));
            } else {
                return Ok(l);
            }
        }
    }

    fn unary(&mut self) -> PResult<Tree> {
        if self.at_sym('-') {
            self.pos += 1;
            return Ok(Tree::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Tree> {
        let base = self.primary()?;
        if !self.at_sym('^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.at_sym('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(t @ Tok { kind: TokKind::Int(k), .. }) => {
                self.pos += 1;
                let k: i64 = k.try_into().map_err(|_| self.err(codes::BAD_NUMBER, "exponent too large", Some(t)))?;
                Ok(Tree::Pow(Box::new(base), if neg { -k } else { k }))
            }
            t => Err(self.err(codes::SYNTAX, "exponent must be an integer", t)),
        }
    }

    fn number(&self, t: &Tok) -> Option<Q> {
        match &t.kind {
            TokKind::Int(v) => Some(BigRational::from_integer(v.clone())),
            TokKind::Dec(a, b) => {
                let num: BigInt = format!("{a}{b}").parse().ok()?;
                let den = num_traits::pow(BigInt::from(10), b.len());
                Some(BigRational::new(num, den))
            }
            _ => None,
        }
    }

    /// `( [-] n [/ m] )` read as a single rational literal.
    fn try_rational_literal(&mut self) -> Option<PResult<Tree>> {
        let mut k = 1;
        let neg = matches!(self.peek_at(k), Some(Tok { kind: TokKind::Sym('-'), .. }));
        if neg {
            k += 1;
        }
        let n = self.number(self.peek_at(k)?)?;
        k += 1;
        let mut val = n;
        if matches!(self.peek_at(k), Some(Tok { kind: TokKind::Sym('/'), .. })) {
            let d = match self.peek_at(k + 1) {
                Some(Tok { kind: TokKind::Int(d), .. }) => d.clone(),
                _ => return None,
            };
            k += 2;
            if d.is_zero() {
                return Some(Err(self.err(codes::BAD_NUMBER, "zero denominator", self.peek_at(k - 1))));
            }
            val /= BigRational::from_integer(d);
        }
        if !matches!(self.peek_at(k), Some(Tok { kind: TokKind::Sym(')'), .. })) {
            return None;
        }
        self.pos += k + 1;
        Some(Ok(Tree::Num(if neg { -val } else { val })))
    }

    fn primary(&mut self) -> PResult<Tree> {
        let Some(t) = self.peek() else {
            return Err(self.err(codes::SYNTAX, "unexpected end of expression", None));
        };
        if let Some(v) = self.number(t) {
            self.pos += 1;
            return Ok(Tree::Num(v));
        }
        match &t.kind {
            TokKind::Sym('(') => {
                if let Some(r) = self.try_rational_literal() {
                    return r;
                }
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            TokKind::Ident(name) => {
                self.pos += 1;
                self.named(name, t)
            }
            _ => Err(self.err(codes::SYNTAX, "expected an expression", Some(t))),
        }
    }

    fn named(&mut self, name: &str, t: &Tok) -> PResult<Tree> {
        let sc = self.scope;
        if self.at_sym('(') {
            if let Some(args) = sc.constits.get(name) {
                self.pos += 1;
                let mut n = 0;
                if !self.at_sym(')') {
                    loop {
                        self.expr()?;
                        n += 1;
                        if self.at_sym(',') {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect_sym(')')?;
                if n != args.len() {
                    return Err(self
                        .err(
                            codes::ARITY,
                            format!("arity mismatch: `{name}` takes {} arguments, {n} given", args.len()),
                            Some(t),
                        )
                        .with_hint(format!("declared at its `constitutive {name}(...)` line")));
                }
                return Ok(Tree::Atom(Atom::constit(name)));
            }
            if let Some(i) = sc.deriv_index(name) {
                if !sc.is_known(name) {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(match inner {
                        Tree::Atom(a) if a.is_jet() => {
                            let (f, idx) = a.as_jet().unwrap();
                            Tree::Atom(Atom::jet(f, idx.incremented(i)))
                        }
                        other => Tree::Deriv(i, Box::new(other)),
                    });
                }
            }
            return Err(self.err(codes::UNKNOWN_IDENT, format!("unknown function `{name}`"), Some(t)));
        }
        if let Some(p) = self.try_partial(name)? {
            return Ok(Tree::Atom(p));
        }
        if sc.indeps.iter().any(|s| s == name) {
            return Ok(Tree::Atom(Atom::indep(name)));
        }
        if let Some(a) = sc.resolve_jet(name) {
            return Ok(Tree::Atom(a));
        }
        if sc.constits.contains_key(name) || sc.params.contains(name) {
            return Ok(Tree::Atom(Atom::constit(name)));
        }
        let mut d = self.err(codes::UNKNOWN_IDENT, format!("unknown identifier `{name}`"), Some(t));
        if let Some(s) = name.strip_prefix('d') {
            if sc.constits.contains_key(s) {
                d = d.with_hint(format!("partial derivatives are written d{s}/d<argument>"));
            }
        }
        Err(d)
    }

    /// `dpsi/darg[/darg...]` after the leading identifier has been consumed.
    fn try_partial(&mut self, name: &str) -> PResult<Option<Atom>> {
        let Some(sym) = name.strip_prefix('d') else { return Ok(None) };
        if self.scope.is_known(name) {
            return Ok(None);
        }
        let Some(args) = self.scope.constits.get(sym) else { return Ok(None) };
        let mut slots = MultiIndex::zero(args.len());
        while let (Some(Tok { kind: TokKind::Sym('/'), .. }), Some(Tok { kind: TokKind::Ident(a), .. })) =
            (self.peek(), self.peek_at(1))
        {
            let Some(arg) = a.strip_prefix('d').and_then(|s| self.scope.resolve_jet(s)) else { break };
            let Some(j) = args.iter().position(|x| *x == arg) else {
                return Err(self.err(
                    codes::UNKNOWN_IDENT,
                    format!("`{sym}` does not depend on `{}`", &a[1..]),
                    self.peek_at(1),
                ));
            };
            slots = slots.incremented(j);
            self.pos += 2;
        }
        if slots.is_zero() {
            return Ok(None);
        }
        Ok(Some(Atom::partial(sym, slots)))
    }
}

struct Line {
    no: usize,
    toks: Vec<Tok>,
}

fn line_span(file: &str, l: &Line) -> SourceSpan {
    let end = l.toks.last().map_or(2, |t| t.end);
    SourceSpan { file: file.into(), line: l.no, col_start: 1, col_end: end }
}

fn tok_span(file: &str, line: usize, t: &Tok) -> SourceSpan {
    SourceSpan { file: file.into(), line, col_start: t.col, col_end: t.end }
}

fn keyword(l: &Line) -> Option<&str> {
    match l.toks.first() {
        Some(Tok { kind: TokKind::Ident(s), .. }) => Some(s.as_str()),
        _ => None,
    }
}

/// Parses a model file. Never panics on malformed input.
pub fn parse_model(text: &str, file: &str) -> Result<ModelDef, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        match lex(body) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => lines.push(Line { no: i + 1, toks }),
            Err((col, c)) => diags.push(Diagnostic::error(
                codes::SYNTAX,
                format!("unexpected character `{c}`"),
                SourceSpan { file: file.into(), line: i + 1, col_start: col, col_end: col + 1 },
            )),
        }
    }

    let mut m = ModelDef::new(&[], &[]);
    let mut seen_names: HashMap<String, usize> = HashMap::new();

    // declarations of variables first, so that later lines may appear in any order
    for l in &lines {
        let kw = keyword(l);
        if kw != Some("independent") && kw != Some("field") {
            continue;
        }
        if l.toks.len() < 2 {
            diags.push(Diagnostic::error(codes::SYNTAX, "expected at least one name", line_span(file, l)));
        }
        for t in &l.toks[1..] {
            let TokKind::Ident(name) = &t.kind else {
                diags.push(Diagnostic::error(codes::SYNTAX, "expected a name", tok_span(file, l.no, t)));
                continue;
            };
            if let Some(prev) = seen_names.get(name) {
                diags.push(
                    Diagnostic::error(
                        codes::DUPLICATE,
                        format!("duplicate declaration of `{name}`"),
                        tok_span(file, l.no, t),
                    )
                    .with_hint(format!("first declared on line {prev}")),
                );
                continue;
            }
            seen_names.insert(name.clone(), l.no);
            if kw == Some("independent") {
                m.indeps.push(name.clone());
            } else {
                m.fields.push(name.clone());
            }
        }
    }
    if m.indeps.is_empty() {
        diags.push(Diagnostic::error(
            codes::BAD_DECL,
            "model requires an `independent` line",
            SourceSpan { file: file.into(), line: 1, col_start: 1, col_end: 2 },
        ));
    }
    if m.fields.is_empty() {
        diags.push(Diagnostic::error(
            codes::BAD_DECL,
            "model requires a `field` line",
            SourceSpan { file: file.into(), line: 1, col_start: 1, col_end: 2 },
        ));
    }

    let mut scope = Scope::of_model(&m);
    for l in &lines {
        if keyword(l) != Some("constitutive") {
            continue;
        }
        match constitutive_line(l, &scope, file) {
            Ok(d) => {
                if let Some(prev) = seen_names.get(&d.name) {
                    diags.push(
                        Diagnostic::error(
                            codes::DUPLICATE,
                            format!("duplicate declaration of `{}`", d.name),
                            tok_span(file, l.no, &l.toks[1]),
                        )
                        .with_hint(format!("first declared on line {prev}")),
                    );
                    continue;
                }
                seen_names.insert(d.name.clone(), l.no);
                scope.constits.insert(d.name.clone(), d.args.clone());
                m.constits.push(d);
            }
            Err(d) => diags.push(d),
        }
    }

    let mut entropy_lines = Vec::new();
    let mut leading_line: Option<usize> = None;
    let mut labels: HashMap<String, usize> = HashMap::new();
    for l in &lines {
        let kw = keyword(l).unwrap_or("");
        let r = match kw {
            "independent" | "field" | "constitutive" => Ok(()),
            "equation" => equation_line(l, &scope, file, &mut labels).map(|e| m.equations.push(e)),
            "entropy" => {
                entropy_lines.push(l.no);
                entropy_line(l, &scope, file).map(|t| m.entropy = t)
            }
            "leading" => {
                if let Some(prev) = leading_line {
                    Err(Diagnostic::error(codes::DUPLICATE, "duplicate `leading:` line", line_span(file, l))
                        .with_hint(format!("first given on line {prev}")))
                } else {
                    leading_line = Some(l.no);
                    list_line(l, &scope, file, 1).and_then(|v| {
                        for (t, tok) in v {
                            match t {
                                Tree::Atom(a) if a.is_jet() => m.leading.push(a),
                                _ => {
                                    return Err(Diagnostic::error(
                                        codes::BAD_DECL,
                                        "leading derivatives must be derivatives of fields",
                                        tok_span(file, l.no, &tok),
                                    ))
                                }
                            }
                        }
                        Ok(())
                    })
                }
            }
            "assume" => assume_line(l, &scope, file).map(|v| m.assumptions.extend(v)),
            "max_order" => max_order_line(l, file).map(|k| m.max_order = Some(k)),
            "classify" => classify_line(l, &scope, file).map(|v| m.classify = v),
            _ => Err(Diagnostic::error(
                codes::UNKNOWN_KEYWORD,
                format!("unknown line keyword `{kw}`"),
                tok_span(file, l.no, &l.toks[0]),
            )
            .with_hint("expected one of: independent, field, constitutive, equation, entropy, leading, assume, max_order, classify")),
        };
        if let Err(d) = r {
            diags.push(d);
        }
    }

    if entropy_lines.len() != 1 {
        let line = entropy_lines.get(1).copied().unwrap_or(1);
        diags.push(Diagnostic::error(
            codes::ENTROPY_COUNT,
            "model requires exactly one entropy inequality",
            SourceSpan { file: file.into(), line, col_start: 1, col_end: 2 },
        ));
    }
    if leading_line.is_none() {
        diags.push(
            Diagnostic::error(
                codes::MISSING_LEADING,
                "model requires a `leading:` line",
                SourceSpan { file: file.into(), line: 1, col_start: 1, col_end: 2 },
            )
            .with_hint("list one leading derivative per equation, e.g. `leading: dt(rho), dt(u)`"),
        );
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let errs = m.validate();
    if !errs.is_empty() {
        let line = leading_line.unwrap_or(1);
        return Err(errs
            .into_iter()
            .map(|e| {
                let ln = match e {
                    ModelError::LeadingCount(..)
                    | ModelError::LeadingAbsent(_)
                    | ModelError::LeadingDependent(..)
                    | ModelError::LeadingNotJet(_) => line,
                    _ => 1,
                };
                Diagnostic::error(
                    e.code(),
                    e.to_string(),
                    SourceSpan { file: file.into(), line: ln, col_start: 1, col_end: 2 },
                )
            })
            .collect());
    }
    Ok(m)
}

fn parser<'a>(l: &'a Line, scope: &'a Scope, file: &'a str, skip: usize) -> ExprParser<'a> {
    let mut p = ExprParser::new(&l.toks, scope, file, l.no);
    p.pos = skip;
    p
}

fn constitutive_line(l: &Line, scope: &Scope, file: &str) -> PResult<ConstitDecl> {
    let mut p = parser(l, scope, file, 1);
    let name = p.ident()?;
    p.expect_sym('(')?;
    let mut args = Vec::new();
    loop {
        args.push(arg_atom(&mut p)?);
        if p.at_sym(',') {
            p.pos += 1;
        } else {
            break;
        }
    }
    p.expect_sym(')')?;
    let mut symmetric = Vec::new();
    if !p.at_end() {
        let t = p.peek();
        if p.ident()? != "symmetric" {
            return Err(p.err(codes::SYNTAX, "expected `symmetric`", t));
        }
        while p.at_sym('(') {
            p.pos += 1;
            let t1 = p.peek();
            let a = arg_atom(&mut p)?;
            p.expect_sym(',')?;
            let t2 = p.peek();
            let b = arg_atom(&mut p)?;
            p.expect_sym(')')?;
            let i = args
                .iter()
                .position(|x| *x == a)
                .ok_or_else(|| p.err(codes::BAD_DECL, format!("`{name}` does not depend on this argument"), t1))?;
            let j = args
                .iter()
                .position(|x| *x == b)
                .ok_or_else(|| p.err(codes::BAD_DECL, format!("`{name}` does not depend on this argument"), t2))?;
            symmetric.push((i, j));
        }
        if symmetric.is_empty() {
            return Err(p.err(codes::SYNTAX, "expected `(` after `symmetric`", p.peek()));
        }
    }
    p.expect_end()?;
    let set: BTreeSet<Atom> = args.iter().copied().collect();
    if set.len() != args.len() {
        return Err(Diagnostic::error(codes::DUPLICATE, format!("repeated argument in `{name}`"), line_span(file, l)));
    }
    Ok(ConstitDecl { name, args, symmetric })
}

fn arg_atom(p: &mut ExprParser) -> PResult<Atom> {
    let t = p.peek();
    match p.expr()? {
        Tree::Atom(a) if a.is_jet() => Ok(a),
        _ => Err(p.err(codes::BAD_DECL, "constitutive arguments must be fields or field derivatives", t)),
    }
}

fn equation_line(l: &Line, scope: &Scope, file: &str, labels: &mut HashMap<String, usize>) -> PResult<Equation> {
    let mut p = parser(l, scope, file, 1);
    let lt = p.peek();
    let label = p.ident()?;
    if let Some(prev) = labels.get(&label) {
        return Err(p
            .err(codes::DUPLICATE, format!("duplicate equation label `{label}`"), lt)
            .with_hint(format!("first used on line {prev}")));
    }
    labels.insert(label.clone(), l.no);
    p.expect_sym(':')?;
    let left = p.expr()?;
    p.expect_sym('=')?;
    let right = p.expr()?;
    p.expect_end()?;
    Ok(Equation { label, left, right })
}

fn entropy_line(l: &Line, scope: &Scope, file: &str) -> PResult<Tree> {
    let mut p = parser(l, scope, file, 1);
    p.expect_sym(':')?;
    let left = p.expr()?;
    if !matches!(p.peek(), Some(Tok { kind: TokKind::Ge, .. })) {
        return Err(p.err(codes::SYNTAX, "expected `>=`", p.peek()));
    }
    p.pos += 1;
    let right = p.expr()?;
    p.expect_end()?;
    Ok(match right {
        Tree::Num(c) if c.is_zero() => left,
        r => Tree::Sub(Box::new(left), Box::new(r)),
    })
}

fn list_line(l: &Line, scope: &Scope, file: &str, skip: usize) -> PResult<Vec<(Tree, Tok)>> {
    let mut p = parser(l, scope, file, skip);
    p.expect_sym(':')?;
    let mut out = Vec::new();
    loop {
        let t = p.peek().cloned().ok_or_else(|| p.err(codes::SYNTAX, "expected an expression", None))?;
        out.push((p.expr()?, t));
        if p.at_sym(',') {
            p.pos += 1;
        } else {
            break;
        }
    }
    p.expect_end()?;
    Ok(out)
}

fn assume_line(l: &Line, scope: &Scope, file: &str) -> PResult<Vec<Tree>> {
    let mut p = parser(l, scope, file, 1);
    let t = p.peek();
    if p.ident()? != "nonzero" {
        return Err(p.err(codes::SYNTAX, "expected `assume nonzero:`", t));
    }
    Ok(list_line(l, scope, file, 2)?.into_iter().map(|(t, _)| t).collect())
}

fn max_order_line(l: &Line, file: &str) -> PResult<u32> {
    let bad = || Diagnostic::error(codes::SYNTAX, "expected `max_order: <integer>`", line_span(file, l));
    match l.toks.as_slice() {
        [_, Tok { kind: TokKind::Sym(':'), .. }, t @ Tok { kind: TokKind::Int(k), .. }] => u32::try_from(k)
            .map_err(|_| Diagnostic::error(codes::BAD_NUMBER, "max_order out of range", tok_span(file, l.no, t))),
        _ => Err(bad()),
    }
}

fn classify_line(l: &Line, scope: &Scope, file: &str) -> PResult<Vec<String>> {
    let mut p = parser(l, scope, file, 1);
    p.expect_sym(':')?;
    let mut out = Vec::new();
    loop {
        let t = p.peek();
        let n = p.ident()?;
        if !scope.constits.contains_key(&n) {
            return Err(p.err(codes::UNKNOWN_IDENT, format!("`{n}` is not a constitutive symbol"), t));
        }
        out.push(n);
        if p.at_sym(',') {
            p.pos += 1;
        } else {
            break;
        }
    }
    p.expect_end()?;
    Ok(out)
}

/// Parses a standalone expression against a model's names.
pub fn parse_expr(m: &ModelDef, text: &str) -> Result<Tree, Diagnostic> {
    parse_expr_in(&Scope::of_model(m), text, "<expr>")
}

pub fn parse_expr_in(scope: &Scope, text: &str, file: &str) -> Result<Tree, Diagnostic> {
    let toks = lex(text).map_err(|(col, c)| {
        Diagnostic::error(
            codes::SYNTAX,
            format!("unexpected character `{c}`"),
            SourceSpan { file: file.into(), line: 1, col_start: col, col_end: col + 1 },
        )
    })?;
    let mut p = ExprParser::new(&toks, scope, file, 1);
    let t = p.expr()?;
    p.expect_end()?;
    Ok(t)
}

/// `expr = 0` or `expr != 0`; the flag is true for the nonzero polarity.
pub fn parse_assumption(m: &ModelDef, text: &str) -> Result<(Tree, bool), Diagnostic> {
    let scope = Scope::of_model(m);
    let file = "<assume>";
    let toks = lex(text).map_err(|(col, c)| {
        Diagnostic::error(
            codes::SYNTAX,
            format!("unexpected character `{c}`"),
            SourceSpan { file: file.into(), line: 1, col_start: col, col_end: col + 1 },
        )
    })?;
    let mut p = ExprParser::new(&toks, &scope, file, 1);
    let left = p.expr()?;
    let nonzero = match p.peek() {
        Some(Tok { kind: TokKind::Ne, .. }) => true,
        Some(Tok { kind: TokKind::Sym('='), .. }) => false,
        t => return Err(p.err(codes::SYNTAX, "expected `= <expr>` or `!= <expr>`", t)),
    };
    p.pos += 1;
    let right = p.expr()?;
    p.expect_end()?;
    let t = match right {
        Tree::Num(c) if c.is_zero() => left,
        r => Tree::Sub(Box::new(left), Box::new(r)),
    };
    Ok((t, nonzero))
}
