use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    AbcError, CertificateCandidate, CheckReport, Condition, ConditionalInvariance, SamplerConfig,
    StrategyFeasibility, StrategyPolicy, Verdict,
};
use crate::formula::Quantifier;
use crate::polysys::{
    copy_var, self_compose, AugmentedSystem, BasicSet, CompiledPoly, CompiledSet, DynamicalSystem,
    IntervalBox, Polynomial, SemialgebraicRegion, MEMBERSHIP_SLACK,
};

/// Points of `region ∩ extra` in the order of `vars`, drawn per clause from a
/// grid and by rejection sampling. Returns the points and the number of draws.
pub(crate) fn sample_region(
    region: &SemialgebraicRegion,
    extra: &BasicSet,
    bounds: &IntervalBox,
    vars: &[String],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<f64>>, usize), AbcError> {
    let mut parts = Vec::new();
    for clause in region.clauses() {
        let inter = clause.intersect(extra);
        let bx = inter.box_within(bounds);
        if bx.is_empty() {
            continue;
        }
        parts.push((bx.sampler(vars)?, inter.compile(vars)?));
    }
    let mut points = Vec::new();
    let mut tried = 0;
    if parts.is_empty() {
        return Ok((points, tried));
    }
    let n = parts.len();
    let grid_cap = cfg
        .grid_per_dim
        .checked_pow(vars.len() as u32)
        .unwrap_or(usize::MAX)
        .min(cfg.max_grid_points)
        / n;
    let want = cfg.random_samples.div_ceil(n);
    let draws = cfg.max_draws / n;
    for (sampler, set) in &parts {
        for x in sampler.grid(grid_cap.max(1)) {
            tried += 1;
            if set.contains(&x, MEMBERSHIP_SLACK) {
                points.push(x);
            }
        }
        let mut got = 0;
        for _ in 0..draws {
            if got >= want {
                break;
            }
            let x = sampler.random(rng);
            tried += 1;
            if set.contains(&x, MEMBERSHIP_SLACK) {
                points.push(x);
                got += 1;
            }
        }
    }
    Ok((points, tried))
}

fn compile_barrier(
    c: &CertificateCandidate,
    aug: &AugmentedSystem,
) -> Result<CompiledPoly, AbcError> {
    if let Some(v) = c
        .barrier
        .vars()
        .iter()
        .find(|v| !aug.state_vars.contains(v))
    {
        return Err(AbcError::BarrierScope(v.clone()));
    }
    Ok(c.barrier.compile(&aug.state_vars)?)
}

fn report(
    cond: Condition,
    cfg: &SamplerConfig,
    tried: usize,
    values: &[(f64, Vec<f64>)],
    vars: &[String],
) -> CheckReport {
    let worst = values.iter().max_by(|a, b| a.0.total_cmp(&b.0));
    let mut r = CheckReport {
        condition: cond,
        verdict: Verdict::Pass,
        samples_tried: tried,
        samples_in_region: values.len(),
        worst_violation: worst.map(|w| w.0),
        witness: None,
        seed: cfg.seed,
        tol: cfg.tol,
        note: None,
        strategy_feasibility: None,
    };
    match worst {
        None => {
            r.verdict = Verdict::Inconclusive;
            r.note = Some("no samples landed in the region; it may be empty".into());
        }
        Some((v, x)) if *v > cfg.tol || v.is_nan() => {
            r.verdict = Verdict::Fail;
            r.witness = Some(vars.iter().cloned().zip(x.iter().copied()).collect());
        }
        Some(_) => {}
    }
    r
}

fn check_on_region(
    cond: Condition,
    c: &CertificateCandidate,
    region: &SemialgebraicRegion,
    aug: &AugmentedSystem,
    cfg: &SamplerConfig,
) -> Result<CheckReport, AbcError> {
    let b = compile_barrier(c, aug)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (points, tried) = sample_region(
        region,
        &aug.state_set,
        &aug.sampling_box(),
        &aug.state_vars,
        cfg,
        &mut rng,
    )?;
    let values: Vec<(f64, Vec<f64>)> = points
        .into_iter()
        .map(|x| {
            let v = b.eval(&x);
            (
                if cond == Condition::Initial {
                    v
                } else {
                    c.epsilon - v
                },
                x,
            )
        })
        .collect();
    Ok(report(cond, cfg, tried, &values, &aug.state_vars))
}

/// `B(x) ≤ 0` on the initial set, up to `cfg.tol`.
pub fn check_initial(
    c: &CertificateCandidate,
    ci: &ConditionalInvariance,
    aug: &AugmentedSystem,
    cfg: &SamplerConfig,
) -> Result<CheckReport, AbcError> {
    check_on_region(Condition::Initial, c, &ci.set_a, aug, cfg)
}

/// `B(x) ≥ ε` on the unsafe set, up to `cfg.tol`.
pub fn check_unsafe(
    c: &CertificateCandidate,
    ci: &ConditionalInvariance,
    aug: &AugmentedSystem,
    cfg: &SamplerConfig,
) -> Result<CheckReport, AbcError> {
    check_on_region(Condition::Unsafe, c, &ci.set_b, aug, cfg)
}

/// Evaluator for `B(f_p(x, w)) - B(x)` with existential inputs filled in by
/// the strategies, in copy order.
pub(crate) struct StepEvaluator {
    barrier: CompiledPoly,
    f: Vec<CompiledPoly>,
    /// (slot in the state-input vector, compiled strategy)
    strategies: Vec<(usize, CompiledPoly)>,
    /// Per existential copy: input-set constraints over the full vector.
    input_sets: Vec<CompiledSet>,
    pub(crate) order: Vec<String>,
    pub(crate) universal_inputs: Vec<String>,
    pub(crate) existential_inputs: Vec<String>,
}

impl StepEvaluator {
    pub(crate) fn new(
        c: &CertificateCandidate,
        aug: &AugmentedSystem,
        prefix: &[Quantifier],
    ) -> Result<Self, AbcError> {
        if prefix.len() != aug.p {
            return Err(AbcError::PrefixMismatch {
                expected: aug.p,
                found: prefix.len(),
            });
        }
        let barrier = compile_barrier(c, aug)?;
        let order: Vec<String> = aug
            .state_vars
            .iter()
            .chain(&aug.input_vars)
            .cloned()
            .collect();
        let f = aug
            .f
            .iter()
            .map(|fi| fi.compile(&order))
            .collect::<Result<_, _>>()?;
        let mut strategies = Vec::new();
        let mut input_sets = Vec::new();
        let mut universal_inputs = Vec::new();
        let mut existential_inputs = Vec::new();
        for (i, q) in prefix.iter().enumerate() {
            let copy = i + 1;
            let inputs = aug.copy_input_vars(copy);
            if *q == Quantifier::Forall {
                universal_inputs.extend(inputs);
                continue;
            }
            let allowed: Vec<String> = aug
                .state_vars
                .iter()
                .cloned()
                .chain((1..copy).flat_map(|k| aug.copy_input_vars(k)))
                .collect();
            for w in inputs {
                let h = c
                    .strategies
                    .get(&w)
                    .ok_or_else(|| AbcError::MissingStrategy(w.clone()))?;
                if let Some(v) = h.vars().iter().find(|v| !allowed.contains(v)) {
                    return Err(AbcError::StrategyScope {
                        input: w.clone(),
                        var: v.clone(),
                    });
                }
                let slot = order.iter().position(|v| *v == w).expect("input in order");
                strategies.push((slot, h.compile(&order)?));
                existential_inputs.push(w);
            }
            input_sets.push(aug.copy_input_set(copy).compile(&order)?);
        }
        Ok(StepEvaluator {
            barrier,
            f,
            strategies,
            input_sets,
            order,
            universal_inputs,
            existential_inputs,
        })
    }

    /// Fills the existential slots of `z` (state followed by inputs).
    pub(crate) fn apply_strategies(&self, z: &mut [f64]) {
        for (slot, h) in &self.strategies {
            z[*slot] = h.eval(z);
        }
    }

    pub(crate) fn next_state(&self, z: &[f64]) -> Vec<f64> {
        self.f.iter().map(|fi| fi.eval(z)).collect()
    }

    pub(crate) fn barrier(&self, x: &[f64]) -> f64 {
        self.barrier.eval(x)
    }

    /// Strategy infeasibility `max(-g_in)` over existential copies.
    pub(crate) fn input_excess(&self, z: &[f64]) -> f64 {
        self.input_sets
            .iter()
            .map(|s| s.violation(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn increase(&self, z: &[f64], n_state: usize) -> f64 {
        self.barrier(&self.next_state(z)) - self.barrier(&z[..n_state])
    }
}

/// `B(f_p(x, w)) - B(x) ≤ 0` over `X^p` and universal inputs in `W`, with
/// existential inputs given by the strategies.
pub fn check_decrease(
    c: &CertificateCandidate,
    ci: &ConditionalInvariance,
    aug: &AugmentedSystem,
    cfg: &SamplerConfig,
) -> Result<CheckReport, AbcError> {
    let ev = StepEvaluator::new(c, aug, &ci.prefix)?;
    let n = aug.state_vars.len();
    let sample_vars: Vec<String> = aug
        .state_vars
        .iter()
        .chain(&ev.universal_inputs)
        .cloned()
        .collect();
    let mut domain = aug.state_set.clone();
    for (i, q) in ci.prefix.iter().enumerate() {
        if *q == Quantifier::Forall {
            domain = domain.intersect(&aug.copy_input_set(i + 1));
        }
    }
    let domain = domain.with_dims(&sample_vars);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (points, tried) = sample_region(
        &SemialgebraicRegion::full(&sample_vars),
        &domain,
        &aug.sampling_box(),
        &sample_vars,
        cfg,
        &mut rng,
    )?;
    let slots: Vec<usize> = sample_vars
        .iter()
        .map(|v| ev.order.iter().position(|o| o == v).expect("in order"))
        .collect();
    let mut values = Vec::with_capacity(points.len());
    let mut feas = StrategyFeasibility {
        ok: true,
        worst_excess: f64::NEG_INFINITY,
        witness: None,
    };
    for x in points {
        let mut z = vec![0.0; ev.order.len()];
        for (k, &s) in slots.iter().enumerate() {
            z[s] = x[k];
        }
        ev.apply_strategies(&mut z);
        if !ev.existential_inputs.is_empty() {
            let excess = ev.input_excess(&z);
            if excess > feas.worst_excess {
                feas.worst_excess = excess;
                if excess > cfg.tol {
                    feas.ok = false;
                    feas.witness = Some(ev.order.iter().cloned().zip(z.iter().copied()).collect());
                }
            }
        }
        values.push((ev.increase(&z, n), z));
    }
    let mut r = report(Condition::Decrease, cfg, tried, &values, &ev.order);
    if !ev.existential_inputs.is_empty() && r.samples_in_region > 0 {
        if !feas.ok {
            let msg = format!(
                "strategy leaves the input set by up to {:.3e}",
                feas.worst_excess
            );
            if cfg.strategy_policy == StrategyPolicy::Enforce && r.verdict == Verdict::Pass {
                r.verdict = Verdict::Fail;
                r.witness = feas.witness.clone();
            }
            r.note = Some(msg);
        }
        r.strategy_feasibility = Some(feas);
    }
    Ok(r)
}

/// The three condition reports for one conditional invariance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CiReport {
    pub initial: CheckReport,
    #[serde(rename = "unsafe")]
    pub unsafe_: CheckReport,
    pub decrease: CheckReport,
}

impl CiReport {
    pub fn passed(&self) -> bool {
        self.initial.passed() && self.unsafe_.passed() && self.decrease.passed()
    }

    pub fn reports(&self) -> [&CheckReport; 3] {
        [&self.initial, &self.unsafe_, &self.decrease]
    }
}

pub fn check_ci(
    c: &CertificateCandidate,
    ci: &ConditionalInvariance,
    aug: &AugmentedSystem,
    cfg: &SamplerConfig,
) -> Result<CiReport, AbcError> {
    Ok(CiReport {
        initial: check_initial(c, ci, aug, cfg)?,
        unsafe_: check_unsafe(c, ci, aug, cfg)?,
        decrease: check_decrease(c, ci, aug, cfg)?,
    })
}

/// Value of a condition at one point; positive values above the tolerance
/// are violations. For the decrease condition existential inputs in `point`
/// are recomputed from the strategies.
pub fn condition_value(
    cond: Condition,
    c: &CertificateCandidate,
    prefix: &[Quantifier],
    aug: &AugmentedSystem,
    point: &BTreeMap<String, f64>,
) -> Result<f64, AbcError> {
    match cond {
        Condition::Initial => Ok(c.barrier.eval(point)?),
        Condition::Unsafe => Ok(c.epsilon - c.barrier.eval(point)?),
        Condition::Decrease => {
            let ev = StepEvaluator::new(c, aug, prefix)?;
            let mut z: Vec<f64> = ev
                .order
                .iter()
                .map(|v| {
                    if ev.existential_inputs.contains(v) {
                        Ok(0.0)
                    } else {
                        point.get(v).copied().ok_or_else(|| {
                            AbcError::Poly(crate::polysys::PolyError::MissingVariable(v.clone()))
                        })
                    }
                })
                .collect::<Result<_, _>>()?;
            ev.apply_strategies(&mut z);
            Ok(ev.increase(&z, aug.state_vars.len()))
        }
    }
}

/// Classic barrier certificate: the single-copy, all-universal case.
/// Variables of `b`, `init` and `unsafe_set` use the system's own names.
pub fn check_classic_bc(
    b: &Polynomial,
    sys: &DynamicalSystem,
    init: &SemialgebraicRegion,
    unsafe_set: &SemialgebraicRegion,
    epsilon: f64,
    cfg: &SamplerConfig,
) -> Result<CiReport, AbcError> {
    let aug = self_compose(sys, 1)?;
    let rn = |v: &str| copy_var(v, 1);
    let c = CertificateCandidate {
        barrier: b.rename(rn),
        strategies: BTreeMap::new(),
        epsilon,
    };
    let ci = ConditionalInvariance {
        prefix: vec![Quantifier::Forall],
        set_a: init.rename(rn).with_dims(&aug.state_vars),
        set_b: unsafe_set.rename(rn).with_dims(&aug.state_vars),
        provenance: None,
    };
    check_ci(&c, &ci, &aug, cfg)
}
