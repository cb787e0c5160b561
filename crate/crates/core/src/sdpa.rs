//! Sparse SDPA (`.dat-s`) export and import for the problems built by the
//! model module, so third-party conic solvers can serve as oracles.
//!
//! The file encodes: maximize ⟨F₀, X⟩ subject to ⟨F_i, X⟩ = c_i with X in a
//! product of PSD blocks (positive block sizes) and a diagonal nonnegative
//! block (negative size). Entries are written once per upper triangle with
//! the usual implicit-symmetry convention. Floats are printed in Rust's
//! shortest round-trip form, so write → read reproduces the problem
//! bit-exactly.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ConeBlock, Constraint, CoeffEntry, FormulationTag, SdpProblem};

#[derive(Debug, Error)]
pub enum SdpaError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("entry references matrix {0} but mDIM is {1}")]
    MatrixIndexOutOfRange(usize, usize),
    #[error("file ended before all sections were read")]
    Truncated,
}

pub fn write_sdpa(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"{}\"", p.name);
    let _ = writeln!(out, "{}", p.constraints.len());
    let _ = writeln!(out, "{}", p.blocks.len());
    let sizes: Vec<String> = p
        .blocks
        .iter()
        .map(|b| match b {
            ConeBlock::Psd(d) => format!("{d}"),
            ConeBlock::NonNeg(d) => format!("-{d}"),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.constraints.iter().map(|c| fmt_f64(c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let write_entries = |matno: usize, entries: &[CoeffEntry], out: &mut String| {
        for e in entries {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                matno,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                fmt_f64(e.value)
            );
        }
    };
    write_entries(0, &p.objective, &mut out);
    for (i, c) in p.constraints.iter().enumerate() {
        write_entries(i + 1, &c.entries, &mut out);
    }
    out
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that parses back to the same f64
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Reads a problem written by [`write_sdpa`] (also accepts the common `*`
/// comment-line variant). The ESC registry and formulation tag are not part
/// of the format; imported problems carry an empty registry.
pub fn read_sdpa(text: &str) -> Result<SdpProblem, SdpaError> {
    let mut name = String::from("sdpa-import");
    let mut lines = text.lines().enumerate().filter_map(|(idx, raw)| {
        let t = raw.trim();
        if t.is_empty() {
            return None;
        }
        Some((idx + 1, t.to_string()))
    });
    // leading comment lines: "..." or lines starting with '*'
    let mut header = None;
    for (idx, line) in lines.by_ref() {
        if line.starts_with('"') {
            name = line.trim_matches('"').to_string();
        } else if line.starts_with('*') {
            continue;
        } else {
            header = Some((idx, line));
            break;
        }
    }
    let (idx, m_line) = header.ok_or(SdpaError::Truncated)?;
    let m: usize = first_token(&m_line)
        .parse()
        .map_err(|_| SdpaError::Malformed(idx, "bad mDIM".into()))?;
    let (idx, nblocks_line) = lines.next().ok_or(SdpaError::Truncated)?;
    let nblocks: usize = first_token(&nblocks_line)
        .parse()
        .map_err(|_| SdpaError::Malformed(idx, "bad nBLOCK".into()))?;
    let (idx, sizes_line) = lines.next().ok_or(SdpaError::Truncated)?;
    let sizes: Vec<i64> = split_numbers(&sizes_line)
        .map_err(|t| SdpaError::Malformed(idx, format!("bad block size {t:?}")))?;
    if sizes.len() != nblocks {
        return Err(SdpaError::Malformed(idx, "block count mismatch".into()));
    }
    let blocks: Vec<ConeBlock> = sizes
        .iter()
        .map(|&s| {
            if s < 0 {
                ConeBlock::NonNeg((-s) as usize)
            } else {
                ConeBlock::Psd(s as usize)
            }
        })
        .collect();
    let (idx, rhs_line) = lines.next().ok_or(SdpaError::Truncated)?;
    let rhs: Vec<f64> = rhs_line
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| SdpaError::Malformed(idx, "bad rhs vector".into()))?;
    if rhs.len() != m {
        return Err(SdpaError::Malformed(idx, "rhs length mismatch".into()));
    }
    let mut objective = Vec::new();
    let mut constraints: Vec<Constraint> = rhs
        .into_iter()
        .map(|r| Constraint {
            entries: Vec::new(),
            rhs: r,
        })
        .collect();
    for (idx, line) in lines {
        let toks: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if toks.len() != 5 {
            return Err(SdpaError::Malformed(idx, "expected 5 fields".into()));
        }
        let matno: usize = toks[0]
            .parse()
            .map_err(|_| SdpaError::Malformed(idx, "bad matrix index".into()))?;
        let block: usize = toks[1]
            .parse()
            .map_err(|_| SdpaError::Malformed(idx, "bad block index".into()))?;
        let row: usize = toks[2]
            .parse()
            .map_err(|_| SdpaError::Malformed(idx, "bad row".into()))?;
        let col: usize = toks[3]
            .parse()
            .map_err(|_| SdpaError::Malformed(idx, "bad col".into()))?;
        let value: f64 = toks[4]
            .parse()
            .map_err(|_| SdpaError::Malformed(idx, "bad value".into()))?;
        if matno > m {
            return Err(SdpaError::MatrixIndexOutOfRange(matno, m));
        }
        let entry = CoeffEntry {
            block: block - 1,
            row: row - 1,
            col: col - 1,
            value,
        };
        if matno == 0 {
            objective.push(entry);
        } else {
            constraints[matno - 1].entries.push(entry);
        }
    }
    Ok(SdpProblem {
        name,
        blocks,
        objective,
        constraints,
        formulation: FormulationTag::ThetaTrace,
        escs: Vec::new(),
    })
}

fn first_token(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

fn split_numbers(line: &str) -> Result<Vec<i64>, String> {
    line.split(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')' || c == '{' || c == '}')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| t.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, Graph, VertexSubset};
    use crate::model::{add_escs, build_theta_n, build_theta_nplus1, EscSelection};

    fn problems_equal(a: &SdpProblem, b: &SdpProblem) -> bool {
        a.blocks == b.blocks
            && a.objective == b.objective
            && a.constraints.len() == b.constraints.len()
            && a.constraints
                .iter()
                .zip(&b.constraints)
                .all(|(x, y)| x.rhs == y.rhs && x.entries == y.entries)
    }

    #[test]
    fn round_trip_theta_trace() {
        let p = build_theta_n(&Graph::cycle(5));
        let back = read_sdpa(&write_sdpa(&p)).unwrap();
        assert!(problems_equal(&p, &back));
        assert_eq!(back.name, p.name);
    }

    #[test]
    fn round_trip_with_escs() {
        let g = erdos_renyi(7, 0.4, 3).unwrap();
        let base = build_theta_nplus1(&g);
        let p = add_escs(
            &base,
            &g,
            &EscSelection::lambda(vec![VertexSubset::new([1, 2, 3])]),
        )
        .unwrap();
        let back = read_sdpa(&write_sdpa(&p)).unwrap();
        assert!(problems_equal(&p, &back));
    }

    #[test]
    fn imported_problem_solves_identically() {
        let g = erdos_renyi(8, 0.5, 11).unwrap();
        let p = build_theta_n(&g);
        let back = read_sdpa(&write_sdpa(&p)).unwrap();
        let settings = crate::solver::SolverSettings::default();
        let a = crate::solver::solve(&p, &settings).unwrap();
        let b = crate::solver::solve(&back, &settings).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_sdpa("").is_err());
        assert!(read_sdpa("\"x\"\n2\n1\n3\n1.0").is_err()); // rhs too short
        assert!(read_sdpa("\"x\"\n1\n1\n3\n1.0\n0 1 1").is_err()); // short entry
    }
}
