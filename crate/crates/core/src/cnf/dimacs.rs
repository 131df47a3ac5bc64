//! DIMACS CNF reading and writing.

use thiserror::Error;

use super::{Clause, CnfError, CnfFormula, Literal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("input is not ASCII text")]
    NotAscii,
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: second header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds declared count {declared}")]
    VariableOutOfRange { line: usize, var: u64, declared: usize },
    #[error("line {line}: empty clause (clause {index})")]
    EmptyClause { line: usize, index: usize },
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("line {line}: {source}")]
    Clause { line: usize, source: CnfError },
}

/// Parses DIMACS CNF text. `c` lines are comments; a line starting with `%`
/// ends the clause section (SATLIB convention).
pub fn parse_dimacs(text: impl AsRef<[u8]>) -> Result<CnfFormula, DimacsError> {
    let bytes = text.as_ref();
    if !bytes.is_ascii() {
        return Err(DimacsError::NotAscii);
    }
    // ASCII is valid UTF-8.
    let text = std::str::from_utf8(bytes).map_err(|_| DimacsError::NotAscii)?;

    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<Literal> = Vec::new();
    let mut pending_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line: line_no });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let (n, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| DimacsError::InvalidToken { line: line_no, token: token.to_string() })?;
            if value == 0 {
                if pending.is_empty() {
                    return Err(DimacsError::EmptyClause { line: line_no, index: clauses.len() + 1 });
                }
                let clause = Clause::new(pending.drain(..))
                    .map_err(|source| DimacsError::Clause { line: line_no, source })?;
                clauses.push(clause);
                continue;
            }
            let var = value.unsigned_abs();
            if var > n as u64 {
                return Err(DimacsError::VariableOutOfRange { line: line_no, var, declared: n });
            }
            if pending.is_empty() {
                pending_line = line_no;
            }
            // var >= 1 here, fits usize since it is bounded by n
            pending.push(Literal::new(var as usize - 1, value > 0));
        }
    }

    let (n, m) = header.ok_or(DimacsError::MissingHeader)?;
    if !pending.is_empty() {
        // tolerate a final clause without its terminating 0
        let clause = Clause::new(pending.drain(..))
            .map_err(|source| DimacsError::Clause { line: pending_line, source })?;
        clauses.push(clause);
    }
    if clauses.len() != m {
        return Err(DimacsError::ClauseCountMismatch { declared: m, found: clauses.len() });
    }
    CnfFormula::new(n, clauses).map_err(|source| DimacsError::Clause { line: 0, source })
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), DimacsError> {
    let malformed = |reason: &str| DimacsError::MalformedHeader { line: line_no, reason: reason.to_string() };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("p") {
        return Err(malformed("expected `p`"));
    }
    if parts.next() != Some("cnf") {
        return Err(malformed("format must be `cnf`"));
    }
    let n = parts
        .next()
        .ok_or_else(|| malformed("missing variable count"))?
        .parse::<usize>()
        .map_err(|_| malformed("variable count is not a non-negative integer"))?;
    let m = parts
        .next()
        .ok_or_else(|| malformed("missing clause count"))?
        .parse::<usize>()
        .map_err(|_| malformed("clause count is not a non-negative integer"))?;
    if parts.next().is_some() {
        return Err(malformed("trailing tokens"));
    }
    Ok((n, m))
}

/// Serializes a formula: header, then one `0`-terminated clause per line.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_variables(), f.num_clauses());
    for clause in f.clauses() {
        out.push_str(&clause.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::tests::example;

    #[test]
    fn parses_simple() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0").unwrap();
        assert_eq!(f.num_variables(), 2);
        assert_eq!(f.clauses()[0].literals(), &[Literal::pos(0), Literal::neg(1)]);
    }

    #[test]
    fn skips_comments() {
        let f = parse_dimacs("c comment\np cnf 1 1\n1 0").unwrap();
        assert_eq!(f.num_clauses(), 1);
        assert_eq!(f.clauses()[0].literals(), &[Literal::pos(0)]);
    }

    #[test]
    fn satlib_trailer() {
        let f = parse_dimacs("p cnf 3 2\n 1 -2 3 0\n-1 2 0\n%\n0\n\n").unwrap();
        assert_eq!(f.num_clauses(), 2);
    }

    #[test]
    fn clause_spanning_lines() {
        let f = parse_dimacs("p cnf 3 1\n1 -2\n3 0\n").unwrap();
        assert_eq!(f.clauses()[0].len(), 3);
    }

    #[test]
    fn errors_are_distinct() {
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 0"),
            Err(DimacsError::ClauseCountMismatch { declared: 2, found: 1 })
        );
        assert!(matches!(parse_dimacs("p dnf 2 1\n1 0"), Err(DimacsError::MalformedHeader { .. })));
        assert!(matches!(parse_dimacs("p cnf x 1\n1 0"), Err(DimacsError::MalformedHeader { .. })));
        assert_eq!(parse_dimacs("1 0\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs(""), Err(DimacsError::MissingHeader));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 3 0"),
            Err(DimacsError::VariableOutOfRange { var: 3, declared: 2, .. })
        ));
        assert!(matches!(parse_dimacs("p cnf 2 2\n1 0\n0\n"), Err(DimacsError::EmptyClause { index: 2, .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 a 0"), Err(DimacsError::InvalidToken { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\np cnf 2 1\n1 0"), Err(DimacsError::DuplicateHeader { .. })));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 -1 0"),
            Err(DimacsError::Clause { source: CnfError::Tautology(0), .. })
        ));
    }

    #[test]
    fn writes_exact_text() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, -2]]).unwrap();
        assert_eq!(write_dimacs(&f), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn example_round_trip() {
        let f = example();
        assert_eq!(parse_dimacs(write_dimacs(&f)).unwrap(), f);
    }
}
