//! DIMACS CNF reader with an assumption-line extension.
//!
//! Besides the standard `p cnf` format, lines of the form `a <lits> 0`
//! contribute assumption literals; several such lines concatenate in order.
//! Clauses may span lines, as usual for DIMACS.

use crate::lits::{Cube, Lit};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {0}: malformed header")]
    BadHeader(usize),
    #[error("line {0}: expected an integer, got `{1}`")]
    BadToken(usize, String),
    #[error("line {0}: literal {1} exceeds declared variable count {2}")]
    OutOfRange(usize, i64, u32),
    #[error("unterminated clause at end of file")]
    UnterminatedClause,
}

#[derive(Debug, Clone)]
pub struct DimacsProblem {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    pub assumptions: Cube,
}

pub fn parse_dimacs(text: &str) -> Result<DimacsProblem, DimacsError> {
    let mut num_vars: Option<u32> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut assumptions: Vec<Lit> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(DimacsError::BadHeader(lineno));
            }
            let v: u32 = fields[1].parse().map_err(|_| DimacsError::BadHeader(lineno))?;
            let _c: u64 = fields[2].parse().map_err(|_| DimacsError::BadHeader(lineno))?;
            num_vars = Some(v);
            continue;
        }
        let nv = num_vars.ok_or(DimacsError::MissingHeader)?;
        let (is_assumption, body) = match line.strip_prefix('a') {
            Some(rest) if rest.starts_with(char::is_whitespace) => (true, rest),
            _ => (false, line),
        };
        for tok in body.split_whitespace() {
            let n: i64 = tok
                .parse()
                .map_err(|_| DimacsError::BadToken(lineno, tok.to_string()))?;
            if n == 0 {
                if !is_assumption {
                    clauses.push(std::mem::take(&mut pending));
                }
                continue;
            }
            if n.unsigned_abs() > u64::from(nv) {
                return Err(DimacsError::OutOfRange(lineno, n, nv));
            }
            let lit = Lit::from_dimacs(n as i32);
            if is_assumption {
                assumptions.push(lit);
            } else {
                pending.push(lit);
            }
        }
    }
    if !pending.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    Ok(DimacsProblem {
        num_vars: num_vars.ok_or(DimacsError::MissingHeader)?,
        clauses,
        assumptions: Cube(assumptions),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_clauses_and_assumptions() {
        let p = parse_dimacs("c demo\np cnf 5 3\n1 -4 -5 0\n3 -4 -5 0\n2\n4 0\na -1 2 0\na 4 0\n")
            .unwrap();
        assert_eq!(p.num_vars, 5);
        assert_eq!(p.clauses.len(), 3);
        assert_eq!(p.clauses[2], vec![Lit::from_dimacs(2), Lit::from_dimacs(4)]);
        assert_eq!(p.assumptions, Cube::from_dimacs(&[-1, 2, 4]));
    }

    #[test]
    fn reports_errors() {
        assert_eq!(parse_dimacs("1 0\n").unwrap_err(), DimacsError::MissingHeader);
        assert_eq!(
            parse_dimacs("p cnf x 1\n").unwrap_err(),
            DimacsError::BadHeader(1)
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n3 0\n").unwrap_err(),
            DimacsError::OutOfRange(2, 3, 2)
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 2\n").unwrap_err(),
            DimacsError::UnterminatedClause
        );
    }
}
