//! DIMACS CNF reader and writer, restricted to 3-literal clauses.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generators::SatInstance;

/// Parses a `p cnf` document. Clauses may span lines and end with `0`;
/// `c` lines and `%` trailers are ignored.
pub fn parse_dimacs(text: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<[i32; 3]> = Vec::new();
    let mut cur: Vec<i32> = Vec::new();
    let mut cur_line = 0;
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
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(Error::Parse { line: line_no, msg: "duplicate problem line".into() });
            }
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::Parse { line: line_no, msg: "expected `p cnf <vars> <clauses>`".into() });
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line: line_no, msg: format!("bad count {s:?}") });
            header = Some((num(parts[2])?, num(parts[3])?));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(Error::Parse { line: line_no, msg: "clause before problem line".into() });
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| Error::Parse { line: line_no, msg: format!("bad literal {tok:?}") })?;
            if lit == 0 {
                let c: [i32; 3] = cur.as_slice().try_into().map_err(|_| Error::Parse {
                    line: cur_line.max(line_no),
                    msg: format!("clause {} has {} literals, expected 3", clauses.len() + 1, cur.len()),
                })?;
                clauses.push(c);
                cur.clear();
                continue;
            }
            if lit.unsigned_abs() as usize > vars {
                return Err(Error::Parse { line: line_no, msg: format!("literal {lit} exceeds {vars} variables") });
            }
            if cur.is_empty() {
                cur_line = line_no;
            }
            cur.push(lit);
        }
    }
    let Some((vars, count)) = header else {
        return Err(Error::Parse { line: 0, msg: "missing problem line".into() });
    };
    if !cur.is_empty() {
        return Err(Error::Parse { line: cur_line, msg: "unterminated clause".into() });
    }
    if clauses.len() != count {
        return Err(Error::Parse { line: 0, msg: format!("header declares {count} clauses, found {}", clauses.len()) });
    }
    let inst = SatInstance { vars, clauses };
    inst.check().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok(inst)
}

pub fn to_dimacs(inst: &SatInstance) -> String {
    let mut s = format!("p cnf {} {}\n", inst.vars, inst.clauses.len());
    for c in &inst.clauses {
        let _ = writeln!(s, "{} {} {} 0", c[0], c[1], c[2]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let inst = SatInstance::new(4, vec![[1, -2, 3], [-4, 2, 1]]).unwrap();
        assert_eq!(parse_dimacs(&to_dimacs(&inst)).unwrap(), inst);
    }

    #[test]
    fn multi_line_clause_and_comments() {
        let text = "c hello\np cnf 3 1\n1 -2\n3 0\n";
        assert_eq!(parse_dimacs(text).unwrap().clauses, vec![[1, -2, 3]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_dimacs("p cnf 3 1\n1 2 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_dimacs("1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 3 2\n1 2 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 3 1\n1 1 2 0\n").is_err());
    }
}
