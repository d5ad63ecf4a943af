use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::program::{SosProgram, StrategyUnknown};
use super::sdp::{decision_values, SdpSolution};
use super::symbolic::{to_polynomial, ConstPoly};
use super::SosError;
use crate::abc::CertificateCandidate;
use crate::polysys::Polynomial;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCheck {
    pub label: String,
    pub size: usize,
    pub min_eigenvalue: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub ok: bool,
    pub tol: f64,
    pub blocks: Vec<BlockCheck>,
    /// Largest absolute coefficient-matching residual.
    pub max_residual: f64,
    pub worst_equality: Option<String>,
    pub error: Option<String>,
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Checks every Gram block for positive semidefiniteness and every
/// coefficient-matching equality, both within `tol`.
pub fn validate_gram(sol: &SdpSolution, prog: &SosProgram, tol: f64) -> GramReport {
    let mut report = GramReport {
        ok: false,
        tol,
        blocks: Vec::new(),
        max_residual: 0.0,
        worst_equality: None,
        error: None,
    };
    let values = match decision_values(prog, sol) {
        Ok(v) => v,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    for (blk, m) in prog.blocks.iter().zip(&sol.x) {
        let min_eigenvalue = min_eigenvalue(m);
        report.blocks.push(BlockCheck {
            label: blk.label.clone(),
            size: blk.basis.len(),
            min_eigenvalue,
            ok: min_eigenvalue >= -tol,
        });
    }
    for eq in &prog.equalities {
        let r = eq.expr.eval(&values).abs();
        if r > report.max_residual || r.is_nan() {
            report.max_residual = r;
            report.worst_equality = Some(eq.label.clone());
        }
    }
    report.ok = report.blocks.iter().all(|b| b.ok) && report.max_residual <= tol;
    report
}

fn clean(p: &ConstPoly) -> ConstPoly {
    p.iter()
        .filter(|(_, c)| c.abs() > 1e-14)
        .map(|(e, c)| (e.clone(), *c))
        .collect()
}

/// Reads the barrier and strategies out of a feasible solution and maps
/// them back to original coordinates.
pub fn reconstruct_certificate(
    sol: &SdpSolution,
    prog: &SosProgram,
) -> Result<CertificateCandidate, SosError> {
    if !sol.status.is_feasible() {
        return Err(SosError::NotFeasible(sol.status));
    }
    let values = decision_values(prog, sol)?;
    let bn: ConstPoly = prog
        .barrier
        .iter()
        .map(|(e, k)| (e.clone(), values[*k]))
        .collect();
    let barrier = prog
        .scaling
        .to_original(&to_polynomial(&clean(&bn), &prog.vars));
    let mut strategies = BTreeMap::new();
    for (w, s) in &prog.strategies {
        let hn: Polynomial = match s {
            StrategyUnknown::Fixed(h) => h.clone(),
            StrategyUnknown::Free(coeffs) => {
                let p: ConstPoly = coeffs
                    .iter()
                    .map(|(e, k)| (e.clone(), values[*k]))
                    .collect();
                to_polynomial(&clean(&p), &prog.vars)
            }
        };
        strategies.insert(w.clone(), prog.scaling.map_to_original(w, &hn));
    }
    Ok(CertificateCandidate {
        barrier,
        strategies,
        epsilon: prog.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::{coefficient_match, SolverStatus};

    fn square_program() -> SosProgram {
        coefficient_match(&"x^2 + 2*x + 1".parse().unwrap(), Some(&[vec![0], vec![1]])).unwrap()
    }

    #[test]
    fn exact_gram_passes_at_zero_tolerance() {
        let prog = square_program();
        let sol = SdpSolution {
            status: SolverStatus::Optimal,
            y: vec![],
            x: vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])],
        };
        let r = validate_gram(&sol, &prog, 0.0);
        assert!(r.ok, "{r:?}");
        let id = SdpSolution {
            status: SolverStatus::Optimal,
            y: vec![],
            x: vec![DMatrix::identity(2, 2)],
        };
        let r = validate_gram(&id, &prog, 0.0);
        assert!(r.blocks[0].ok);
        assert!(!r.ok, "identity does not match x^2 + 2x + 1");
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let prog = square_program();
        let sol = SdpSolution {
            status: SolverStatus::Optimal,
            y: vec![],
            x: vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3])],
        };
        let r = validate_gram(&sol, &prog, 1e-6);
        assert!(!r.ok);
        assert!((r.blocks[0].min_eigenvalue + 1e-3).abs() < 1e-12);
    }

    #[test]
    fn infeasible_status_yields_no_certificate() {
        let prog = square_program();
        let sol = SdpSolution {
            status: SolverStatus::PrimalInfeasible,
            y: vec![],
            x: vec![],
        };
        assert!(matches!(
            reconstruct_certificate(&sol, &prog),
            Err(SosError::NotFeasible(SolverStatus::PrimalInfeasible))
        ));
    }
}
