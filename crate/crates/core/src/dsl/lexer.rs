use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(BigInt),
    /// Decimal literal as (digits, digits after the point).
    Dec(String, String),
    Sym(char),
    Ge,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tok {
    pub kind: TokKind,
    /// 1-based, inclusive start and exclusive end columns.
    pub col: usize,
    pub end: usize,
}

/// Splits one line into tokens; `Err` carries the column of an unexpected character.
pub fn lex(line: &str) -> Result<Vec<Tok>, (usize, char)> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok { kind: TokKind::Ident(chars[s..i].iter().collect()), col, end: i + 1 });
        } else if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int: String = chars[s..i].iter().collect();
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let f = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[f..i].iter().collect();
                out.push(Tok { kind: TokKind::Dec(int, frac), col, end: i + 1 });
            } else {
                let v: BigInt = int.parse().expect("digits parse");
                out.push(Tok { kind: TokKind::Int(v), col, end: i + 1 });
            }
        } else if c == '>' && chars.get(i + 1) == Some(&'=') {
            out.push(Tok { kind: TokKind::Ge, col, end: col + 2 });
            i += 2;
        } else if c == '!' && chars.get(i + 1) == Some(&'=') {
            out.push(Tok { kind: TokKind::Ne, col, end: col + 2 });
            i += 2;
        } else if "+-*/^(),:=".contains(c) {
            out.push(Tok { kind: TokKind::Sym(c), col, end: col + 1 });
            i += 1;
        } else {
            return Err((col, c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_columns() {
        let t = lex("dt(rho) >= 0.5").unwrap();
        assert_eq!(t[0].kind, TokKind::Ident("dt".into()));
        assert_eq!(t[4].kind, TokKind::Ge);
        assert_eq!(t[4].col, 9);
        assert_eq!(t[5].kind, TokKind::Dec("0".into(), "5".into()));
        assert_eq!(lex("a $ b"), Err((3, '$')));
    }
}
