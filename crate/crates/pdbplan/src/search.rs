//! A* over explicit SAS+ states.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::clock::Clock;
use crate::pdb::INFINITY;
use crate::sas::{SasTask, State};

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub deadline: Option<f64>,
    pub max_expansions: Option<u64>,
}

impl SearchLimits {
    pub fn unlimited() -> Self {
        SearchLimits {
            deadline: None,
            max_expansions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Operator indices of an optimal plan.
    Solved(Vec<usize>),
    Unsolvable,
    LimitExceeded,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub plan_cost: Option<u64>,
    pub expansions: u64,
    pub evaluations: u64,
    pub generated: u64,
    pub search_time: f64,
}

/// Cost-optimal A*. Ties on f prefer larger g, then first-generated.
pub fn astar(
    task: &SasTask,
    h: &dyn Fn(&State) -> u64,
    limits: &SearchLimits,
    clock: &dyn Clock,
) -> SearchResult {
    let start = clock.now();
    let mut expansions = 0u64;
    let mut evaluations = 0u64;
    let mut generated = 0u64;
    let finish = |outcome, plan_cost, expansions, evaluations, generated| SearchResult {
        outcome,
        plan_cost,
        expansions,
        evaluations,
        generated,
        search_time: clock.now() - start,
    };

    // parent map doubles as best-g record for open/closed states
    let mut best_g: HashMap<State, (u64, Option<(State, usize)>)> = HashMap::new();
    let mut closed: std::collections::HashSet<State> = std::collections::HashSet::new();
    let mut open: BinaryHeap<Reverse<(u64, Reverse<u64>, u64, State)>> = BinaryHeap::new();
    let mut seq = 0u64;

    let h0 = h(&task.initial);
    evaluations += 1;
    if h0 == INFINITY {
        return finish(Outcome::Unsolvable, None, expansions, evaluations, generated);
    }
    best_g.insert(task.initial.clone(), (0, None));
    open.push(Reverse((h0, Reverse(0), seq, task.initial.clone())));
    generated += 1;

    while let Some(Reverse((_, Reverse(g), _, state))) = open.pop() {
        if closed.contains(&state) {
            continue;
        }
        let (recorded_g, _) = best_g[&state];
        if g != recorded_g {
            continue; // stale heap entry
        }
        if task.is_goal(&state) {
            let mut plan = Vec::new();
            let mut cursor = state.clone();
            while let Some((parent, op)) = best_g[&cursor].1.clone() {
                plan.push(op);
                cursor = parent;
            }
            plan.reverse();
            return finish(Outcome::Solved(plan), Some(g), expansions, evaluations, generated);
        }
        if let Some(deadline) = limits.deadline {
            if clock.now() >= deadline {
                return finish(Outcome::LimitExceeded, None, expansions, evaluations, generated);
            }
        }
        if let Some(max) = limits.max_expansions {
            if expansions >= max {
                return finish(Outcome::LimitExceeded, None, expansions, evaluations, generated);
            }
        }
        closed.insert(state.clone());
        expansions += 1;

        for (op_idx, op) in task.operators.iter().enumerate() {
            let Some(succ) = task.apply_operator(&state, op) else {
                continue;
            };
            generated += 1;
            let succ_g = g + op.cost as u64;
            match best_g.get(&succ) {
                Some(&(old_g, _)) if old_g <= succ_g => continue,
                _ => {}
            }
            let succ_h = h(&succ);
            evaluations += 1;
            if succ_h == INFINITY {
                best_g.insert(succ, (succ_g, Some((state.clone(), op_idx))));
                continue;
            }
            closed.remove(&succ);
            best_g.insert(succ.clone(), (succ_g, Some((state.clone(), op_idx))));
            seq += 1;
            open.push(Reverse((succ_g + succ_h, Reverse(succ_g), seq, succ)));
        }
    }

    finish(Outcome::Unsolvable, None, expansions, evaluations, generated)
}

/// Checks a plan step by step from the initial state and that the final
/// state satisfies the goal; returns the summed cost.
pub fn validate_plan(task: &SasTask, plan: &[usize]) -> Result<u64, String> {
    let mut state = task.initial.clone();
    let mut cost = 0u64;
    for (step, &op_idx) in plan.iter().enumerate() {
        let op = task
            .operators
            .get(op_idx)
            .ok_or_else(|| format!("step {step}: no operator with index {op_idx}"))?;
        state = task
            .apply_operator(&state, op)
            .ok_or_else(|| format!("step {step}: operator '{}' not applicable", op.name))?;
        cost += op.cost as u64;
    }
    if task.is_goal(&state) {
        Ok(cost)
    } else {
        Err("final state does not satisfy the goal".into())
    }
}

/// Plan text: one `(name)` line per step plus a trailing cost comment.
pub fn format_plan(task: &SasTask, plan: &[usize], cost: u64) -> String {
    let mut out = String::new();
    for &op_idx in plan {
        out.push('(');
        out.push_str(&task.operators[op_idx].name);
        out.push_str(")\n");
    }
    out.push_str(&format!("; cost = {cost} (general cost)\n"));
    out
}
