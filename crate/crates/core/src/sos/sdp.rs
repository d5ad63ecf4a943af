//! Block-diagonal SDP in the primal form `max tr(CX)` s.t. `tr(A_k X) = a_k`,
//! `X ⪰ 0`, with sparse SDPA text export and solution import.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use super::program::{DecisionVar, SosProgram};
use super::SosError;

/// One matrix entry; blocks and indices are 1-based with `i ≤ j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    /// Positive sizes are dense symmetric blocks, negative sizes diagonal blocks.
    pub block_sizes: Vec<i64>,
    pub rhs: Vec<f64>,
    pub objective: Vec<Entry>,
    pub constraints: Vec<Vec<Entry>>,
    pub comment: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Partial,
    Failed,
}

impl SolverStatus {
    /// Exit-code convention shared by CSDP and the bundled adapter.
    pub fn from_exit_code(code: i32) -> Self {
        match code {
            0 => SolverStatus::Optimal,
            1 => SolverStatus::PrimalInfeasible,
            2 => SolverStatus::DualInfeasible,
            3 => SolverStatus::Partial,
            _ => SolverStatus::Failed,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SolverStatus::Optimal | SolverStatus::Partial)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SolverStatus,
    pub y: Vec<f64>,
    /// Primal blocks; diagonal blocks are stored as diagonal matrices.
    pub x: Vec<DMatrix<f64>>,
}

impl SdpProblem {
    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    /// Residual `tr(A_k X) − a_k` per constraint.
    pub fn residuals(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints
            .iter()
            .zip(&self.rhs)
            .map(|(row, a)| {
                row.iter()
                    .map(|e| {
                        let m = &x[e.block - 1];
                        let v = m[(e.i - 1, e.j - 1)];
                        if e.i == e.j {
                            e.value * v
                        } else {
                            2.0 * e.value * v
                        }
                    })
                    .sum::<f64>()
                    - a
            })
            .collect()
    }
}

/// Converts `prog` to SDP form. Gram block `b` becomes SDP block `b + 1`;
/// free variables are split as `x⁺ − x⁻` in a final diagonal block. The
/// objective is `−regularization · Σ(x⁺ + x⁻)`.
pub fn to_sdp(prog: &SosProgram, regularization: f64) -> SdpProblem {
    let ord = prog.free_ordinals();
    let nfree = ord.len();
    let free_block = prog.blocks.len() + 1;
    let mut block_sizes: Vec<i64> = prog.blocks.iter().map(|b| b.basis.len() as i64).collect();
    if nfree > 0 {
        block_sizes.push(-2 * nfree as i64);
    }
    let mut rhs = Vec::with_capacity(prog.equalities.len());
    let mut constraints = Vec::with_capacity(prog.equalities.len());
    for eq in &prog.equalities {
        let mut row: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (&k, &c) in &eq.expr.terms {
            match &prog.decision[k] {
                DecisionVar::Free { .. } => {
                    let f = ord[&k];
                    *row.entry((free_block, 2 * f + 1, 2 * f + 1)).or_insert(0.0) += c;
                    *row.entry((free_block, 2 * f + 2, 2 * f + 2)).or_insert(0.0) -= c;
                }
                DecisionVar::Gram { block, i, j } => {
                    let v = if i == j { c } else { 0.5 * c };
                    *row.entry((block + 1, i + 1, j + 1)).or_insert(0.0) += v;
                }
            }
        }
        rhs.push(-eq.expr.constant + 0.0);
        constraints.push(
            row.into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|((block, i, j), value)| Entry { block, i, j, value })
                .collect(),
        );
    }
    let objective = if regularization != 0.0 {
        (1..=2 * nfree)
            .map(|i| Entry {
                block: free_block,
                i,
                j: i,
                value: -regularization,
            })
            .collect()
    } else {
        Vec::new()
    };
    SdpProblem {
        block_sizes,
        rhs,
        objective,
        constraints,
        comment: format!(
            "{} gram blocks, {} free variables, {} equalities",
            prog.blocks.len(),
            nfree,
            prog.equalities.len()
        ),
    }
}

/// Sparse SDPA (`.dat-s`) text. Deterministic for a given problem.
pub fn export_sdpa(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* {}", p.comment.replace('\n', " "));
    let _ = writeln!(out, "{}", p.rhs.len());
    let _ = writeln!(out, "{}", p.block_sizes.len());
    let sizes: Vec<String> = p.block_sizes.iter().map(i64::to_string).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.rhs.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for e in &p.objective {
        let _ = writeln!(out, "0 {} {} {} {}", e.block, e.i, e.j, e.value);
    }
    for (k, row) in p.constraints.iter().enumerate() {
        for e in row {
            let _ = writeln!(out, "{} {} {} {} {}", k + 1, e.block, e.i, e.j, e.value);
        }
    }
    out
}

fn blank_blocks(p: &SdpProblem) -> Vec<DMatrix<f64>> {
    p.block_sizes
        .iter()
        .map(|&s| DMatrix::zeros(s.unsigned_abs() as usize, s.unsigned_abs() as usize))
        .collect()
}

fn malformed(line: usize, msg: impl Into<String>) -> SosError {
    SosError::MalformedSolution {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, SosError> {
    tok.trim()
        .replace(['D', 'd'], "e")
        .parse::<f64>()
        .map_err(|_| malformed(line, format!("bad number '{tok}'")))
}

/// Reads a CSDP solution file (`y` line, then `matno block i j value`,
/// `matno = 2` for `X`) or SDPA output (the `yMat` section holds `X`).
pub fn import_solution(text: &str, p: &SdpProblem) -> Result<SdpSolution, SosError> {
    if text.contains("yMat") {
        import_sdpa_output(text, p)
    } else {
        import_csdp(text, p)
    }
}

fn import_csdp(text: &str, p: &SdpProblem) -> Result<SdpSolution, SosError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| malformed(1, "empty solution"))?;
    let y: Vec<f64> = first
        .split_whitespace()
        .map(|t| parse_f64(t, 1))
        .collect::<Result<_, _>>()?;
    if y.len() != p.num_constraints() {
        return Err(SosError::Dimension {
            expected: p.num_constraints(),
            found: y.len(),
        });
    }
    let mut x = blank_blocks(p);
    for (idx, l) in lines {
        let line = idx + 1;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(malformed(line, "expected 'matno block i j value'"));
        }
        let ints: Vec<usize> = toks[..4]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| malformed(line, format!("bad index '{t}'")))
            })
            .collect::<Result<_, _>>()?;
        let v = parse_f64(toks[4], line)?;
        if ints[0] != 2 {
            continue;
        }
        let (b, i, j) = (ints[1], ints[2], ints[3]);
        let m = x
            .get_mut(b.wrapping_sub(1))
            .ok_or_else(|| malformed(line, format!("block {b} out of range")))?;
        let n = m.nrows();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(malformed(
                line,
                format!("entry ({i}, {j}) outside block {b} of size {n}"),
            ));
        }
        m[(i - 1, j - 1)] = v;
        m[(j - 1, i - 1)] = v;
    }
    Ok(SdpSolution {
        status: SolverStatus::Optimal,
        y,
        x,
    })
}

#[derive(Debug)]
enum Nested {
    Num(f64),
    List(Vec<Nested>),
}

fn parse_nested(chars: &[char], pos: &mut usize, line: usize) -> Result<Nested, SosError> {
    while *pos < chars.len() && (chars[*pos].is_whitespace() || chars[*pos] == ',') {
        *pos += 1;
    }
    if chars.get(*pos) == Some(&'{') {
        *pos += 1;
        let mut items = Vec::new();
        loop {
            while *pos < chars.len() && (chars[*pos].is_whitespace() || chars[*pos] == ',') {
                *pos += 1;
            }
            match chars.get(*pos) {
                None => return Err(malformed(line, "unterminated '{'")),
                Some('}') => {
                    *pos += 1;
                    return Ok(Nested::List(items));
                }
                _ => items.push(parse_nested(chars, pos, line)?),
            }
        }
    }
    let start = *pos;
    while *pos < chars.len()
        && !matches!(chars[*pos], ',' | '}' | '{')
        && !chars[*pos].is_whitespace()
    {
        *pos += 1;
    }
    let tok: String = chars[start..*pos].iter().collect();
    Ok(Nested::Num(parse_f64(&tok, line)?))
}

fn numbers(n: &Nested) -> Option<Vec<f64>> {
    match n {
        Nested::List(items) => items
            .iter()
            .map(|i| match i {
                Nested::Num(v) => Some(*v),
                Nested::List(_) => None,
            })
            .collect(),
        Nested::Num(_) => None,
    }
}

fn import_sdpa_output(text: &str, p: &SdpProblem) -> Result<SdpSolution, SosError> {
    let status = text
        .lines()
        .find(|l| l.trim_start().starts_with("phase.value"))
        .map(|l| {
            let v = l.split('=').nth(1).unwrap_or("").trim();
            match v {
                "pdOPT" => SolverStatus::Optimal,
                "pINF_dFEAS" | "dUNBD" | "pdINF" => SolverStatus::PrimalInfeasible,
                "pFEAS_dINF" | "pUNBD" => SolverStatus::DualInfeasible,
                "pdFEAS" | "pFEAS" | "dFEAS" => SolverStatus::Partial,
                _ => SolverStatus::Failed,
            }
        })
        .unwrap_or(SolverStatus::Partial);
    let y = match text.find("xVec") {
        Some(at) => {
            let line = text[..at].lines().count();
            let chars: Vec<char> = text[at..].chars().skip_while(|c| *c != '{').collect();
            let mut pos = 0;
            numbers(&parse_nested(&chars, &mut pos, line)?)
                .ok_or_else(|| malformed(line, "xVec is not a vector"))?
        }
        None => Vec::new(),
    };
    let at = text.find("yMat").expect("checked by caller");
    let line = text[..at].lines().count();
    let chars: Vec<char> = text[at..].chars().skip_while(|c| *c != '{').collect();
    let mut pos = 0;
    let Nested::List(blocks) = parse_nested(&chars, &mut pos, line)? else {
        return Err(malformed(line, "yMat is not a list"));
    };
    if blocks.len() != p.block_sizes.len() {
        return Err(SosError::Dimension {
            expected: p.block_sizes.len(),
            found: blocks.len(),
        });
    }
    let mut x = blank_blocks(p);
    for (b, (blk, &size)) in blocks.iter().zip(&p.block_sizes).enumerate() {
        let n = size.unsigned_abs() as usize;
        if size < 0 {
            let d = numbers(blk)
                .ok_or_else(|| malformed(line, format!("diagonal block {} malformed", b + 1)))?;
            if d.len() != n {
                return Err(SosError::Dimension {
                    expected: n,
                    found: d.len(),
                });
            }
            for (i, v) in d.into_iter().enumerate() {
                x[b][(i, i)] = v;
            }
        } else {
            let Nested::List(rows) = blk else {
                return Err(malformed(line, format!("block {} malformed", b + 1)));
            };
            if rows.len() != n {
                return Err(SosError::Dimension {
                    expected: n,
                    found: rows.len(),
                });
            }
            for (i, r) in rows.iter().enumerate() {
                let vals = numbers(r).ok_or_else(|| {
                    malformed(line, format!("row {} of block {} malformed", i + 1, b + 1))
                })?;
                if vals.len() != n {
                    return Err(SosError::Dimension {
                        expected: n,
                        found: vals.len(),
                    });
                }
                for (j, v) in vals.into_iter().enumerate() {
                    x[b][(i, j)] = v;
                }
            }
        }
    }
    Ok(SdpSolution { status, y, x })
}

/// Decision values recovered from primal blocks.
pub fn decision_values(prog: &SosProgram, sol: &SdpSolution) -> Result<Vec<f64>, SosError> {
    let ord = prog.free_ordinals();
    let expected = prog.blocks.len() + usize::from(!ord.is_empty());
    if sol.x.len() != expected {
        return Err(SosError::Dimension {
            expected,
            found: sol.x.len(),
        });
    }
    for (b, blk) in prog.blocks.iter().enumerate() {
        if sol.x[b].nrows() != blk.basis.len() {
            return Err(SosError::Dimension {
                expected: blk.basis.len(),
                found: sol.x[b].nrows(),
            });
        }
    }
    Ok(prog
        .decision
        .iter()
        .enumerate()
        .map(|(k, d)| match d {
            DecisionVar::Free { .. } => {
                let f = ord[&k];
                let m = &sol.x[prog.blocks.len()];
                m[(2 * f, 2 * f)] - m[(2 * f + 1, 2 * f + 1)]
            }
            DecisionVar::Gram { block, i, j } => sol.x[*block][(*i, *j)],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SdpProblem {
        SdpProblem {
            block_sizes: vec![2],
            rhs: vec![1.0],
            objective: vec![
                Entry {
                    block: 1,
                    i: 1,
                    j: 1,
                    value: -1.0,
                },
                Entry {
                    block: 1,
                    i: 2,
                    j: 2,
                    value: -1.0,
                },
            ],
            constraints: vec![vec![Entry {
                block: 1,
                i: 1,
                j: 1,
                value: 1.0,
            }]],
            comment: "toy".into(),
        }
    }

    #[test]
    fn toy_export() {
        assert_eq!(
            export_sdpa(&toy()),
            "* toy\n1\n1\n2\n1\n0 1 1 1 -1\n0 1 2 2 -1\n1 1 1 1 1\n"
        );
    }

    #[test]
    fn imports_both_formats() {
        let p = toy();
        let csdp = "0.5\n1 1 1 1 0.5\n2 1 1 1 1.0\n2 1 1 2 0.25\n";
        let s = import_solution(csdp, &p).unwrap();
        assert_eq!(s.x[0][(0, 0)], 1.0);
        assert_eq!(s.x[0][(1, 0)], 0.25);
        let sdpa = "phase.value = pdOPT\nxVec = \n{-1.0}\nxMat = \n{\n{ {1,0}, {0,1} }\n}\nyMat = \n{\n{ {1.0,2.5e-1}, {0.25,0} }\n}\n";
        let s = import_solution(sdpa, &p).unwrap();
        assert_eq!(s.status, SolverStatus::Optimal);
        assert_eq!(s.y, vec![-1.0]);
        assert_eq!(s.x[0][(0, 1)], 0.25);
        assert!(p.residuals(&s.x)[0].abs() < 1e-15);
    }

    #[test]
    fn malformed_solutions() {
        let p = toy();
        assert!(matches!(
            import_solution("", &p),
            Err(SosError::MalformedSolution { .. })
        ));
        assert!(matches!(
            import_solution("1 2\n", &p),
            Err(SosError::Dimension { .. })
        ));
        assert!(matches!(
            import_solution("1\n2 1 3 3 1\n", &p),
            Err(SosError::MalformedSolution { .. })
        ));
    }
}
