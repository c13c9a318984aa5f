//! Random-walk sampling, the 25%-improvement acceptance test, resampling,
//! dead-end maintenance and backward dominance pruning.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::clock::Clock;
use crate::pdb::{CollectionSet, PdbCollection, INFINITY};
use crate::sas::{SasTask, State};

/// Virtual seconds accounted per random-walk step.
const STEP_CHARGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct SampleLimits {
    pub max_states: usize,
    pub time: f64,
}

impl Default for SampleLimits {
    fn default() -> Self {
        SampleLimits {
            max_states: 10_000,
            time: 30.0,
        }
    }
}

/// Random-walk sample states with their best heuristic value under the
/// current collection set.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub states: Vec<State>,
    pub stored_h: Vec<u64>,
    pub init_h_at_sampling: u64,
    pub resample_time_spent: f64,
    /// Set when the initial state itself is recognized as a dead end.
    pub unsolvable_hint: bool,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn mean_positive_cost(task: &SasTask) -> f64 {
    let positives: Vec<u64> = task
        .operators
        .iter()
        .map(|o| o.cost as u64)
        .filter(|&c| c > 0)
        .collect();
    if positives.is_empty() {
        1.0
    } else {
        positives.iter().sum::<u64>() as f64 / positives.len() as f64
    }
}

/// Walk length: binomial(2 * ceil(h0 / mean positive cost), 0.5), at least 1.
fn walk_length(h0: u64, mean_cost: f64, rng: &mut ChaCha8Rng) -> usize {
    let expected = if h0 == INFINITY || h0 == 0 {
        1
    } else {
        (h0 as f64 / mean_cost).ceil() as u64
    };
    let n = (2 * expected).min(10_000);
    let len = Binomial::new(n, 0.5).expect("valid binomial").sample(rng);
    (len as usize).max(1)
}

/// Endpoint states of repeated random walks from the initial state under
/// heuristic `h`. Walks step through uniformly chosen applicable operators;
/// recognized dead ends (and states with no applicable operator) send the
/// walk back to the initial state.
pub fn random_walk_states(
    task: &SasTask,
    h: &dyn Fn(&State) -> u64,
    rng: &mut ChaCha8Rng,
    limits: &SampleLimits,
    clock: &dyn Clock,
) -> Vec<State> {
    let deadline = clock.now() + limits.time;
    let mean_cost = mean_positive_cost(task);
    let h0 = h(&task.initial);
    let mut endpoints: Vec<State> = Vec::new();
    let mut applicable = Vec::new();
    while endpoints.len() < limits.max_states && clock.now() < deadline {
        let len = walk_length(h0, mean_cost, rng);
        let mut current = task.initial.clone();
        for _ in 0..len {
            clock.charge(STEP_CHARGE);
            applicable.clear();
            applicable.extend(
                task.operators
                    .iter()
                    .filter(|o| task.applicable(&current, o)),
            );
            if applicable.is_empty() {
                current = task.initial.clone();
                continue;
            }
            let op = applicable[rng.random_range(0..applicable.len())];
            let next = task.apply_operator(&current, op).expect("checked applicable");
            if h(&next) == INFINITY {
                current = task.initial.clone();
            } else {
                current = next;
            }
        }
        endpoints.push(current);
    }
    endpoints
}

/// Draws a fresh sample for the current collection set and stores each
/// state's heuristic value. The sample is deduplicated, dead ends are
/// dropped, and the initial state is used when nothing else survives.
pub fn draw_sample(
    task: &SasTask,
    set: &CollectionSet,
    rng: &mut ChaCha8Rng,
    limits: &SampleLimits,
    clock: &dyn Clock,
) -> SampleSet {
    let h = |s: &State| set.max_heuristic(s);
    let endpoints = random_walk_states(task, &h, rng, limits, clock);
    let mut seen = std::collections::HashSet::new();
    let mut states: Vec<State> = Vec::new();
    for s in endpoints {
        if h(&s) != INFINITY && seen.insert(s.clone()) {
            states.push(s);
        }
    }
    let mut unsolvable_hint = false;
    if states.is_empty() {
        unsolvable_hint = h(&task.initial) == INFINITY;
        states.push(task.initial.clone());
    }
    let stored_h = states.iter().map(|s| set.max_heuristic(s)).collect();
    SampleSet {
        states,
        stored_h,
        init_h_at_sampling: set.max_heuristic(&task.initial),
        resample_time_spent: 0.0,
        unsolvable_hint,
    }
}

/// True iff the candidate improves at least 25% of the sample states
/// (strict per-state improvement, inclusive threshold).
pub fn should_add(sample: &SampleSet, candidate: &PdbCollection) -> bool {
    let improved = sample
        .states
        .iter()
        .zip(&sample.stored_h)
        .filter(|(s, &stored)| candidate.heuristic(s) > stored)
        .count();
    4 * improved >= sample.len()
}

/// Appends an accepted candidate, refreshes stored values, removes new dead
/// ends, and reports whether the initial-state heuristic rose by over 10%
/// (the resampling trigger).
pub fn commit_addition(
    sample: &mut SampleSet,
    set: &mut CollectionSet,
    candidate: PdbCollection,
    task: &SasTask,
) -> bool {
    let old_init = set.max_heuristic(&task.initial);
    let cand_init = candidate.heuristic(&task.initial);
    for (i, s) in sample.states.iter().enumerate() {
        let h = candidate.heuristic(s);
        if h > sample.stored_h[i] {
            sample.stored_h[i] = h;
        }
    }
    set.collections.push(candidate);

    let mut keep = vec![false; sample.states.len()];
    for (i, s) in sample.states.iter().enumerate() {
        keep[i] = sample.stored_h[i] != INFINITY || *s == task.initial;
    }
    let mut idx = 0;
    sample.states.retain(|_| {
        let k = keep[idx];
        idx += 1;
        k
    });
    let mut idx = 0;
    sample.stored_h.retain(|_| {
        let k = keep[idx];
        idx += 1;
        k
    });
    if sample.states.is_empty() {
        sample.states.push(task.initial.clone());
        sample.stored_h.push(set.max_heuristic(&task.initial));
    }

    let new_init = old_init.max(cand_init);
    if new_init == INFINITY {
        sample.unsolvable_hint = true;
        return old_init != INFINITY;
    }
    if old_init == INFINITY {
        return false;
    }
    new_init as f64 > 1.1 * old_init as f64
}

/// Redraws the sample when the trigger fired, accounting the time spent into
/// `resample_time_spent` so phase budgets can exclude it.
pub fn maybe_resample(
    sample: &mut SampleSet,
    trigger: bool,
    task: &SasTask,
    set: &CollectionSet,
    rng: &mut ChaCha8Rng,
    limits: &SampleLimits,
    clock: &dyn Clock,
) {
    if !trigger {
        return;
    }
    let start = clock.now();
    let spent_before = sample.resample_time_spent;
    *sample = draw_sample(task, set, rng, limits, clock);
    sample.resample_time_spent = spent_before + (clock.now() - start);
}

/// Backward dominance pruning: walking collections from last to first, a
/// collection survives iff it strictly exceeds the running max of the kept
/// collections on at least one sample state. Relative order is preserved.
pub fn prune_dominated(set: CollectionSet, sample: &SampleSet) -> CollectionSet {
    let m = sample.len();
    let mut running = vec![0u64; m];
    let mut keep = vec![false; set.collections.len()];
    for (i, collection) in set.collections.iter().enumerate().rev() {
        let hs: Vec<u64> = sample.states.iter().map(|s| collection.heuristic(s)).collect();
        if hs.iter().zip(&running).any(|(&h, &r)| h > r) {
            keep[i] = true;
            for (r, &h) in running.iter_mut().zip(&hs) {
                if h > *r {
                    *r = h;
                }
            }
        }
    }
    let collections = set
        .collections
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect();
    CollectionSet { collections }
}
