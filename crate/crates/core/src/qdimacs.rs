//! QDIMACS input restricted to one existential block, DIMACS output.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cnf::{CnfError, CnfFormula, EcnfProblem, Lit, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: universal quantification is not supported")]
    UniversalNotSupported { line: usize },
    #[error("line {line}: {source}")]
    Cnf { line: usize, source: CnfError },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses `p cnf <vars> <clauses>`, an optional `e` line and the clauses.
/// Variables not on the `e` line are free.
pub fn parse_qdimacs(text: &str) -> Result<EcnfProblem, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut x_vars: Option<Vec<Var>> = None;
    let mut formula: Option<CnfFormula> = None;
    let mut pending: Vec<Lit> = Vec::new();
    let mut last_line = 0;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed == "%" {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        let first = tok.next().expect("non-empty line");
        match first {
            "p" => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if tok.next() != Some("cnf") {
                    return Err(syntax(line, "expected `p cnf <vars> <clauses>`"));
                }
                let vars = tok
                    .next()
                    .and_then(|t| t.parse::<u32>().ok())
                    .ok_or_else(|| syntax(line, "bad variable count"))?;
                let clauses = tok
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| syntax(line, "bad clause count"))?;
                if let Some(extra) = tok.next() {
                    return Err(syntax(line, format!("trailing token `{extra}`")));
                }
                header = Some((vars, clauses));
                formula = Some(CnfFormula::new(vars));
            }
            "a" => return Err(ParseError::UniversalNotSupported { line }),
            "e" => {
                let (vars, _) = header.ok_or_else(|| syntax(line, "quantifier before header"))?;
                if x_vars.is_some() {
                    return Err(syntax(line, "more than one quantifier block"));
                }
                if formula.as_ref().is_some_and(|f| !f.is_empty()) || !pending.is_empty() {
                    return Err(syntax(line, "quantifier after clauses"));
                }
                let mut block = Vec::new();
                let mut closed = false;
                for t in tok.by_ref() {
                    let v: u32 = t.parse().map_err(|_| syntax(line, format!("bad variable `{t}`")))?;
                    if v == 0 {
                        closed = true;
                        break;
                    }
                    if v > vars {
                        return Err(syntax(line, format!("variable {v} exceeds header count {vars}")));
                    }
                    block.push(Var::new(v));
                }
                if !closed {
                    return Err(syntax(line, "quantifier block not terminated by 0"));
                }
                if let Some(extra) = tok.next() {
                    return Err(syntax(line, format!("trailing token `{extra}`")));
                }
                x_vars = Some(block);
            }
            _ => {
                let f = formula.as_mut().ok_or_else(|| syntax(line, "clause before header"))?;
                for t in std::iter::once(first).chain(tok) {
                    let v: i32 = t.parse().map_err(|_| syntax(line, format!("bad literal `{t}`")))?;
                    match Lit::from_dimacs(v) {
                        Some(l) => pending.push(l),
                        None => {
                            f.add_clause(pending.drain(..))
                                .map_err(|source| ParseError::Cnf { line, source })?;
                        }
                    }
                }
            }
        }
    }
    let (_, expected) = header.ok_or_else(|| syntax(last_line.max(1), "missing header"))?;
    if !pending.is_empty() {
        return Err(syntax(last_line, "last clause not terminated by 0"));
    }
    let formula = formula.expect("set with header");
    if formula.len() != expected {
        return Err(syntax(
            last_line,
            format!("header announces {expected} clauses, found {}", formula.len()),
        ));
    }
    EcnfProblem::new(formula, x_vars.unwrap_or_default()).map_err(|source| ParseError::Cnf {
        line: last_line,
        source,
    })
}

fn write_clauses(out: &mut String, clauses: &[Vec<i32>]) {
    for c in clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
}

/// The clauses and quantifier block of `prob`, canonically ordered.
pub fn write_qdimacs(prob: &EcnfProblem) -> String {
    let clauses = prob.formula().canonical_clauses();
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", prob.num_vars(), clauses.len());
    if !prob.x_vars().is_empty() {
        out.push('e');
        for v in prob.x_vars() {
            let _ = write!(out, " {}", v.index());
        }
        out.push_str(" 0\n");
    }
    write_clauses(&mut out, &clauses);
    out
}

/// DIMACS text of `f` with clauses sorted by literal sequence, preceded by
/// one `c stat <name> <value>` line per entry of `stats`.
pub fn write_dimacs(f: &CnfFormula, stats: &[(&str, u64)]) -> String {
    let clauses = f.canonical_clauses();
    let mut out = String::new();
    for (name, value) in stats {
        let _ = writeln!(out, "c stat {name} {value}");
    }
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), clauses.len());
    write_clauses(&mut out, &clauses);
    out
}

/// SHA-256 of the canonical QDIMACS rendering of `prob`, in hex.
pub fn fingerprint(prob: &EcnfProblem) -> String {
    let digest = Sha256::digest(write_qdimacs(prob).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_var() {
        let p = parse_qdimacs("p cnf 5 4\ne 1 2 3 0\n1 2 0\n-1 4 0\n1 -3 5 0\n-2 5 0\n").unwrap();
        let expected = EcnfProblem::from_dimacs(5, &[&[1, 2], &[-1, 4], &[1, -3, 5], &[-2, 5]], &[1, 2, 3]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn free_only_and_split_clauses() {
        let p = parse_qdimacs("c hi\np cnf 3 2\n1 -2\n 0 3 0\n").unwrap();
        assert!(p.x_vars().is_empty());
        assert_eq!(p.formula().canonical_clauses(), vec![vec![1, -2], vec![3]]);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            parse_qdimacs("p cnf 2 1\na 1 0\n1 0\n"),
            Err(ParseError::UniversalNotSupported { line: 2 })
        );
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\n1 -1 0\n"),
            Err(ParseError::Cnf { line: 2, .. })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\ne 1 0\ne 2 0\n1 0\n"),
            Err(ParseError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 1\n3 0\n"),
            Err(ParseError::Cnf { line: 2, .. })
        ));
        assert!(matches!(
            parse_qdimacs("p cnf 2 2\n1 0\n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_qdimacs("1 0\n"),
            Err(ParseError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn empty_clause_output() {
        let mut f = CnfFormula::new(2);
        f.add_clause([]).unwrap();
        assert_eq!(write_dimacs(&f, &[("nodes", 1)]), "c stat nodes 1\np cnf 2 1\n0\n");
    }

    #[test]
    fn fingerprint_ignores_clause_order() {
        let a = parse_qdimacs("p cnf 3 2\ne 1 0\n1 2 0\n-3 0\n").unwrap();
        let b = parse_qdimacs("p cnf 3 2\ne 1 0\n-3 0\n1 2 0\n").unwrap();
        let c = parse_qdimacs("p cnf 3 2\ne 2 0\n-3 0\n1 2 0\n").unwrap();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        assert_ne!(fingerprint(&a), fingerprint(&c));
        assert_eq!(fingerprint(&a).len(), 64);
    }
}
