use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use super::certificate::{reconstruct_certificate, validate_gram, GramReport};
use super::sdp::{export_sdpa, import_solution, to_sdp, SdpProblem, SdpSolution, SolverStatus};
use super::{SosError, SosProgram};
use crate::abc::CertificateCandidate;

/// Environment variable overriding the solver command.
pub const SOLVER_ENV: &str = "HYPERBARRIER_SDP_SOLVER";

/// An external solver invoked as `command… problem.dat-s solution.sol`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SdpSolver {
    pub command: Vec<String>,
}

impl SdpSolver {
    /// Python scripts are run through `python3`.
    pub fn from_path(path: &str) -> Self {
        if path.ends_with(".py") {
            SdpSolver {
                command: vec!["python3".into(), path.into()],
            }
        } else {
            SdpSolver {
                command: vec![path.into()],
            }
        }
    }

    pub fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution, SosError> {
        let dir = tempfile::tempdir()?;
        let input = dir.path().join("problem.dat-s");
        let output = dir.path().join("solution.sol");
        std::fs::write(&input, export_sdpa(problem))?;
        let (prog, args) = self.command.split_first().ok_or(SosError::SolverMissing)?;
        let out = Command::new(prog)
            .args(args)
            .arg(&input)
            .arg(&output)
            .output()
            .map_err(|e| SosError::SolverFailed(format!("cannot start '{prog}': {e}")))?;
        let status = match out.status.code() {
            Some(c) => SolverStatus::from_exit_code(c),
            None => SolverStatus::Failed,
        };
        if status == SolverStatus::Failed {
            let stderr = String::from_utf8_lossy(&out.stderr);
            return Err(SosError::SolverFailed(
                stderr
                    .lines()
                    .last()
                    .unwrap_or("no diagnostics")
                    .to_string(),
            ));
        }
        if !status.is_feasible() {
            return Ok(SdpSolution {
                status,
                y: Vec::new(),
                x: Vec::new(),
            });
        }
        let text = std::fs::read_to_string(&output)?;
        let mut sol = import_solution(&text, problem)?;
        sol.status = status;
        Ok(sol)
    }
}

fn on_path(name: &str) -> Option<PathBuf> {
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|d| d.join(name))
            .find(|p| p.is_file())
    })
}

fn bundled_adapter() -> Option<PathBuf> {
    let candidates = [
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tools/sdpa_cvxpy.py"),
        PathBuf::from("tools/sdpa_cvxpy.py"),
    ];
    let script = candidates.into_iter().find(|p| p.is_file())?;
    let ok = Command::new("python3")
        .args(["-c", "import cvxpy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    ok.then_some(script)
}

/// Resolves a solver: the environment override, then `configured`, then
/// `csdp` on `PATH`, then the bundled cvxpy adapter.
pub fn find_solver(configured: Option<&str>) -> Option<SdpSolver> {
    if let Ok(p) = std::env::var(SOLVER_ENV) {
        if !p.is_empty() {
            return Some(SdpSolver::from_path(&p));
        }
    }
    if let Some(p) = configured {
        return Some(SdpSolver::from_path(p));
    }
    if let Some(p) = on_path("csdp") {
        return Some(SdpSolver::from_path(&p.to_string_lossy()));
    }
    bundled_adapter().map(|p| SdpSolver::from_path(&p.to_string_lossy()))
}

/// Outcome of solving one program.
#[derive(Clone, Debug, Serialize)]
pub struct Synthesis {
    pub status: SolverStatus,
    pub gram: Option<GramReport>,
    pub candidate: Option<CertificateCandidate>,
}

/// Solves `prog` and reconstructs a certificate when the Gram check passes.
pub fn solve_program(
    prog: &SosProgram,
    solver: &SdpSolver,
    regularization: f64,
    gram_tol: f64,
) -> Result<Synthesis, SosError> {
    let sdp = to_sdp(prog, regularization);
    let sol = solver.solve(&sdp)?;
    if !sol.status.is_feasible() {
        return Ok(Synthesis {
            status: sol.status,
            gram: None,
            candidate: None,
        });
    }
    let gram = validate_gram(&sol, prog, gram_tol);
    let candidate = if gram.ok {
        Some(reconstruct_certificate(&sol, prog)?)
    } else {
        None
    };
    Ok(Synthesis {
        status: sol.status,
        gram: Some(gram),
        candidate,
    })
}
