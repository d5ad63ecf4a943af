//! Command-line front end. Exit codes: 0 satisfied or artifact produced,
//! 2 inconclusive, 1 error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{
    decompose, negated_automaton, verify, NegatedAutomaton, PipelineError, Precheck, Problem,
};
use crate::abc::{check_ci, CertificateCandidate, CiReport, StrategyPolicy};
use crate::automata::{
    enumerate_lassos, enumerate_lassos_rabin, hoa_export_buchi, hoa_export_rabin, hoa_import,
    transition_pairs, HoaAutomaton, Lasso,
};
use crate::formula::{negate_to_nnf, parse_hyperltl, AtomDecls};
use crate::sos::{
    build_sos_program, export_sdpa, find_solver, solve_program, to_sdp, StrategySpec,
};

#[derive(Debug, Parser)]
#[command(
    name = "hyperbarrier",
    version,
    about = "Verify hyperproperties of polynomial systems with augmented barrier certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    Enforce,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and print its structure and fragment.
    Parse {
        formula: String,
        /// Problem spec supplying atom arities.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Print the automaton for the negated body as HOA.
    Automaton { spec: PathBuf },
    /// List lassos and transition pairs of a HOA file or a problem spec.
    Lassos { input: PathBuf },
    /// Decompose a problem into conditional invariances with pre-checks.
    Decompose { spec: PathBuf },
    /// Build the SOS program for one pair; write SDPA and solve when a solver is available.
    Synthesize {
        spec: PathBuf,
        /// Pair id from `decompose`; defaults to the first eligible pair.
        #[arg(long)]
        pair: Option<usize>,
        /// Write the SDPA problem here.
        #[arg(long)]
        sdpa: Option<PathBuf>,
        /// Only write the SDPA file.
        #[arg(long)]
        no_solve: bool,
    },
    /// Check a candidate certificate against a problem's pairs by sampling.
    Check {
        candidate: PathBuf,
        spec: PathBuf,
        #[arg(long)]
        pair: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
    },
    /// Run the full verification and print the report.
    Run {
        spec: PathBuf,
        /// Also write the report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Candidate file: a certificate plus optional check settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateFile {
    #[serde(flatten)]
    pub candidate: CertificateCandidate,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub strategy_policy: Option<StrategyPolicy>,
    #[serde(default)]
    pub pair: Option<usize>,
}

#[derive(Serialize)]
struct PairListing {
    s_a: String,
    s_b: String,
    position: usize,
    triple: (String, String, String),
}

#[derive(Serialize)]
struct LassoListing {
    id: usize,
    states: Vec<String>,
    guards: Vec<String>,
    rabin_pair: Option<usize>,
    pairs: Vec<PairListing>,
}

fn list_lassos(lassos: &[Lasso], graph: &crate::automata::Graph) -> Vec<LassoListing> {
    lassos
        .iter()
        .enumerate()
        .map(|(id, l)| LassoListing {
            id,
            states: l.states().iter().map(|&q| graph.name(q)).collect(),
            guards: l.guards().iter().map(|g| g.label()).collect(),
            rabin_pair: l.pair_index,
            pairs: transition_pairs(l, id)
                .into_iter()
                .map(|p| PairListing {
                    s_a: p.s_a.label(),
                    s_b: p.s_b.label(),
                    position: p.position,
                    triple: (
                        graph.name(p.triple.0),
                        graph.name(p.triple.1),
                        graph.name(p.triple.2),
                    ),
                })
                .collect(),
        })
        .collect()
}

fn json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), PipelineError> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Pair ids targeted by default: the first eligible pair of every lasso
/// not already denied by a pre-check.
fn default_pairs(problem: &Problem) -> Result<Vec<usize>, PipelineError> {
    let d = decompose(problem)?;
    let mut out = Vec::new();
    for l in d.lassos.iter().filter(|l| l.denial.is_none()) {
        if let Some(&p) = l
            .pairs
            .iter()
            .find(|&&p| d.pairs[p].precheck == Precheck::Eligible)
        {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn run_parse(
    formula: &str,
    spec: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, PipelineError> {
    let decls = match spec {
        Some(p) => super::ProblemSpec::load(p)?.decls(),
        None => AtomDecls::infer(),
    };
    let f = parse_hyperltl(formula, &decls)?;
    #[derive(Serialize)]
    struct Parsed {
        formula: String,
        prefix: Vec<(crate::formula::Quantifier, String)>,
        body: String,
        negated_body_nnf: String,
        fragment: crate::formula::FragmentClass,
        atoms: Vec<String>,
    }
    json(
        out,
        &Parsed {
            formula: f.to_string(),
            prefix: f.prefix.clone(),
            body: f.body.to_string(),
            negated_body_nnf: negate_to_nnf(&f.body).to_string(),
            fragment: f.classify(),
            atoms: f.body.atoms().iter().map(|a| a.to_string()).collect(),
        },
    )?;
    Ok(0)
}

fn run_check(
    candidate: &Path,
    spec: &Path,
    pair: Option<usize>,
    tol: Option<f64>,
    policy: Option<PolicyArg>,
    out: &mut dyn Write,
) -> Result<i32, PipelineError> {
    let text = std::fs::read_to_string(candidate)
        .map_err(|e| PipelineError::Spec(format!("cannot read {}: {e}", candidate.display())))?;
    let file: CandidateFile = serde_json::from_str(&text)?;
    let problem = Problem::load(spec)?;
    let d = decompose(&problem)?;
    let targets = match pair.or(file.pair) {
        Some(p) if p < d.pairs.len() => vec![p],
        Some(p) => {
            return Err(PipelineError::Spec(format!(
                "no pair {p}; decompose lists {}",
                d.pairs.len()
            )))
        }
        None => default_pairs(&problem)?,
    };
    let opts = &problem.spec.options;
    let mut cfg = opts
        .sampler
        .clone()
        .with_tol(tol.or(file.tol).unwrap_or(opts.check_tol));
    if let Some(p) = policy {
        cfg.strategy_policy = match p {
            PolicyArg::Enforce => StrategyPolicy::Enforce,
            PolicyArg::Report => StrategyPolicy::Report,
        };
    } else if let Some(p) = file.strategy_policy {
        cfg.strategy_policy = p;
    }
    #[derive(Serialize)]
    struct Checked {
        pair: usize,
        s_a: String,
        s_b: String,
        report: CiReport,
    }
    let mut all = Vec::new();
    let mut ok = true;
    for p in targets {
        let report = check_ci(&file.candidate, &d.pairs[p].ci, &problem.aug, &cfg)?;
        ok &= report.passed();
        all.push(Checked {
            pair: p,
            s_a: d.pairs[p].s_a.clone(),
            s_b: d.pairs[p].s_b.clone(),
            report,
        });
    }
    json(out, &all)?;
    Ok(if ok && !all.is_empty() { 0 } else { 2 })
}

fn run_synthesize(
    spec: &Path,
    pair: Option<usize>,
    sdpa: Option<&Path>,
    no_solve: bool,
    out: &mut dyn Write,
) -> Result<i32, PipelineError> {
    let problem = Problem::load(spec)?;
    let d = decompose(&problem)?;
    let p = match pair {
        Some(p) if p < d.pairs.len() => p,
        Some(p) => {
            return Err(PipelineError::Spec(format!(
                "no pair {p}; decompose lists {}",
                d.pairs.len()
            )))
        }
        None => *default_pairs(&problem)?
            .first()
            .ok_or_else(|| PipelineError::Spec("no eligible pair to synthesize for".into()))?,
    };
    let opts = &problem.spec.options;
    let prefix = problem.formula.quantifiers();
    let ci = d.pairs[p].ci.clone();
    let candidates =
        crate::sos::strategy_candidates(&problem.aug, &prefix, &problem.user_strategies);
    let solver = if no_solve {
        None
    } else {
        find_solver(opts.sdp_solver.as_deref())
    };
    let mut log = Vec::new();
    for (k, strategies) in candidates.iter().enumerate() {
        let spec_map = strategies
            .iter()
            .map(|(w, h)| (w.clone(), StrategySpec::Fixed(h.clone())))
            .collect();
        let prog = build_sos_program(
            std::slice::from_ref(&ci),
            &problem.aug,
            &prefix,
            &opts.degrees,
            opts.epsilon,
            &spec_map,
            true,
        )?;
        let sdp = to_sdp(&prog, opts.regularization);
        if k == 0 {
            if let Some(path) = sdpa {
                std::fs::write(path, export_sdpa(&sdp))?;
                eprintln!(
                    "wrote {} ({} constraints, {} blocks)",
                    path.display(),
                    sdp.rhs.len(),
                    sdp.block_sizes.len()
                );
            }
        }
        let Some(solver) = &solver else {
            if sdpa.is_none() {
                write!(out, "{}", export_sdpa(&sdp))?;
            } else if !no_solve {
                eprintln!("no SDP solver found; only the SDPA file was written");
            }
            return Ok(0);
        };
        let syn = solve_program(&prog, solver, opts.regularization, opts.gram_tol)?;
        if let Some(c) = &syn.candidate {
            let report = check_ci(
                c,
                &ci,
                &problem.aug,
                &opts.sampler.clone().with_tol(opts.check_tol),
            )?;
            #[derive(Serialize)]
            struct Synthesized<'a> {
                pair: usize,
                candidate: &'a CertificateCandidate,
                gram: &'a Option<crate::sos::GramReport>,
                check: CiReport,
            }
            let passed = report.passed();
            json(
                out,
                &Synthesized {
                    pair: p,
                    candidate: c,
                    gram: &syn.gram,
                    check: report,
                },
            )?;
            return Ok(if passed { 0 } else { 2 });
        }
        log.push(format!("candidate {k}: status {:?}", syn.status));
    }
    for l in log {
        eprintln!("{l}");
    }
    Ok(2)
}

fn run_lassos(input: &Path, out: &mut dyn Write) -> Result<i32, PipelineError> {
    let is_hoa = input.extension().is_some_and(|e| e == "hoa");
    let (graph, lassos) = if is_hoa {
        let text = std::fs::read_to_string(input)?;
        match hoa_import(&text)? {
            HoaAutomaton::Buchi(a) => {
                let a = a.prune();
                (a.graph.clone(), enumerate_lassos(&a))
            }
            HoaAutomaton::Rabin(a) => {
                let a = a.prune();
                (a.graph.clone(), enumerate_lassos_rabin(&a))
            }
        }
    } else {
        let problem = Problem::load(input)?;
        match negated_automaton(&problem)? {
            NegatedAutomaton::Buchi { aut, .. } => {
                let a = aut.prune();
                (a.graph.clone(), enumerate_lassos(&a))
            }
            NegatedAutomaton::Rabin { aut } => {
                let a = aut.prune();
                (a.graph.clone(), enumerate_lassos_rabin(&a))
            }
        }
    };
    json(out, &list_lassos(&lassos, &graph))?;
    Ok(0)
}

/// Runs one command, writing its artifact to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, PipelineError> {
    match cli.command {
        Command::Parse { formula, spec } => run_parse(&formula, spec.as_deref(), out),
        Command::Automaton { spec } => {
            let problem = Problem::load(&spec)?;
            let text = match negated_automaton(&problem)? {
                NegatedAutomaton::Buchi { aut, .. } => hoa_export_buchi(&aut.prune()),
                NegatedAutomaton::Rabin { aut } => hoa_export_rabin(&aut.prune()),
            };
            write!(out, "{text}")?;
            Ok(0)
        }
        Command::Lassos { input } => run_lassos(&input, out),
        Command::Decompose { spec } => {
            json(out, &decompose(&Problem::load(&spec)?)?)?;
            Ok(0)
        }
        Command::Synthesize {
            spec,
            pair,
            sdpa,
            no_solve,
        } => run_synthesize(&spec, pair, sdpa.as_deref(), no_solve, out),
        Command::Check {
            candidate,
            spec,
            pair,
            tol,
            policy,
        } => run_check(&candidate, &spec, pair, tol, policy, out),
        Command::Run { spec, output } => {
            let report = verify(&Problem::load(&spec)?)?;
            if let Some(path) = output {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            json(out, &report)?;
            Ok(report.exit_code())
        }
    }
}

/// Parses `args` and runs the command; errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
