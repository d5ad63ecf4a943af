use rand::Rng;
use serde::Serialize;

use super::check::StepEvaluator;
use super::{AbcError, CertificateCandidate};
use crate::formula::Quantifier;
use crate::polysys::{AugmentedSystem, BasicSet, MEMBERSHIP_SLACK};

/// A closed-loop run of the augmented system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// Visited augmented states, starting with the initial one.
    pub states: Vec<Vec<f64>>,
    /// Barrier value at each visited state.
    pub barrier: Vec<f64>,
    /// The run stopped early because the next state left `X^p`.
    pub left_state_set: bool,
}

impl Trajectory {
    /// Largest one-step increase of the barrier along the run.
    pub fn max_increase(&self) -> f64 {
        self.barrier
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs up to `steps` transitions from `x0` with universal inputs drawn
/// uniformly from the input box and existential inputs from the strategies.
/// The run stops before the first state outside `X^p`.
pub fn simulate<R: Rng>(
    c: &CertificateCandidate,
    aug: &AugmentedSystem,
    prefix: &[Quantifier],
    x0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<Trajectory, AbcError> {
    let ev = StepEvaluator::new(c, aug, prefix)?;
    let n = aug.state_vars.len();
    let inputs = aug.sampling_box().sampler(&ev.universal_inputs)?;
    let mut universal_set = BasicSet::full(&ev.order);
    for (i, q) in prefix.iter().enumerate() {
        if *q == Quantifier::Forall {
            universal_set = universal_set.intersect(&aug.copy_input_set(i + 1));
        }
    }
    let universal_set = universal_set.compile(&ev.order)?;
    let state_set = aug.state_set.compile(&aug.state_vars)?;
    let slots: Vec<usize> = ev
        .universal_inputs
        .iter()
        .map(|v| ev.order.iter().position(|o| o == v).expect("in order"))
        .collect();
    let mut x = x0.to_vec();
    let mut out = Trajectory {
        states: vec![x.clone()],
        barrier: vec![ev.barrier(&x)],
        left_state_set: false,
    };
    for _ in 0..steps {
        let mut z = vec![0.0; ev.order.len()];
        z[..n].copy_from_slice(&x);
        for _ in 0..1000 {
            let w = inputs.random(rng);
            for (k, &s) in slots.iter().enumerate() {
                z[s] = w[k];
            }
            if universal_set.contains(&z, MEMBERSHIP_SLACK) {
                break;
            }
        }
        ev.apply_strategies(&mut z);
        let next = ev.next_state(&z);
        if !state_set.contains(&next, MEMBERSHIP_SLACK) {
            out.left_state_set = true;
            break;
        }
        out.barrier.push(ev.barrier(&next));
        out.states.push(next.clone());
        x = next;
    }
    Ok(out)
}
