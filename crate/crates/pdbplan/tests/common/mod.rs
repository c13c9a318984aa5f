//! Shared helpers for integration tests: exhaustive oracles, a random task
//! generator, and independent step-by-step reference implementations of the
//! bin-packing generators.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pdbplan::pdb::INFINITY;
use pdbplan::sas::{CausalGraph, Operator, SasTask, State, Value, VarId, Variable};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Every state of the (small) task, odometer order.
pub fn all_states(task: &SasTask) -> Vec<State> {
    let mut states = Vec::new();
    let mut s: State = vec![0; task.num_vars()];
    loop {
        states.push(s.clone());
        let mut carry = true;
        for v in 0..task.num_vars() {
            s[v] += 1;
            if s[v] < task.variables[v].domain_size {
                carry = false;
                break;
            }
            s[v] = 0;
        }
        if carry {
            return states;
        }
    }
}

/// Exact goal distance for every state, by multi-source Dijkstra over the
/// reversed full transition graph. Unreachable-to-goal states are absent.
pub fn hstar_map(task: &SasTask) -> HashMap<State, u64> {
    let states = all_states(task);
    // reverse adjacency: for each state s and applicable op, edge succ -> s
    let mut back: HashMap<State, Vec<(State, u64)>> = HashMap::new();
    for s in &states {
        for op in &task.operators {
            if let Some(succ) = task.apply_operator(s, op) {
                back.entry(succ).or_default().push((s.clone(), op.cost as u64));
            }
        }
    }
    let mut dist: HashMap<State, u64> = HashMap::new();
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, State)>> =
        Default::default();
    for s in &states {
        if task.is_goal(s) {
            dist.insert(s.clone(), 0);
            heap.push(std::cmp::Reverse((0, s.clone())));
        }
    }
    while let Some(std::cmp::Reverse((d, s))) = heap.pop() {
        if dist.get(&s) != Some(&d) {
            continue;
        }
        if let Some(preds) = back.get(&s) {
            for (p, c) in preds {
                let nd = d + c;
                if dist.get(p).is_none_or(|&old| nd < old) {
                    dist.insert(p.clone(), nd);
                    heap.push(std::cmp::Reverse((nd, p.clone())));
                }
            }
        }
    }
    dist
}

/// Exact cost of the task (None when unsolvable).
pub fn optimal_cost(task: &SasTask) -> Option<u64> {
    hstar_map(task).get(&task.initial).copied()
}

pub fn hstar(map: &HashMap<State, u64>, s: &State) -> u64 {
    map.get(s).copied().unwrap_or(INFINITY)
}

/// States reachable from the initial state by forward BFS.
pub fn reachable_states(task: &SasTask) -> Vec<State> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(task.initial.clone());
    queue.push_back(task.initial.clone());
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        out.push(s.clone());
        for op in &task.operators {
            if let Some(succ) = task.apply_operator(&s, op) {
                if seen.insert(succ.clone()) {
                    queue.push_back(succ);
                }
            }
        }
    }
    out
}

/// Random solvable-or-not task: 4-8 variables of domain 2-4, 5-15 operators.
pub fn random_task(rng: &mut ChaCha8Rng) -> SasTask {
    let num_vars = rng.random_range(4..=8);
    let variables: Vec<Variable> = (0..num_vars)
        .map(|i| {
            let d = rng.random_range(2..=4u16);
            Variable {
                name: format!("v{i}"),
                domain_size: d,
                value_names: (0..d).map(|x| format!("v{i}={x}")).collect(),
            }
        })
        .collect();
    let num_ops = rng.random_range(5..=15);
    let mut operators = Vec::new();
    for i in 0..num_ops {
        let mut pre = Vec::new();
        let mut eff = Vec::new();
        for v in 0..num_vars {
            let dom = variables[v].domain_size;
            if rng.random_bool(0.3) {
                pre.push((v, rng.random_range(0..dom)));
            }
            if rng.random_bool(0.35) {
                eff.push((v, rng.random_range(0..dom)));
            }
        }
        if eff.is_empty() {
            let v = rng.random_range(0..num_vars);
            eff.push((v, rng.random_range(0..variables[v].domain_size)));
        }
        operators.push(Operator {
            name: format!("op{i}"),
            pre,
            eff,
            cost: rng.random_range(0..=5),
        });
    }
    let initial: State = variables
        .iter()
        .map(|v| rng.random_range(0..v.domain_size))
        .collect();
    let num_goals = rng.random_range(1..=3.min(num_vars));
    let mut goal_vars: Vec<VarId> = (0..num_vars).collect();
    goal_vars.shuffle(rng);
    goal_vars.truncate(num_goals);
    goal_vars.sort_unstable();
    let goal: Vec<(VarId, Value)> = goal_vars
        .into_iter()
        .map(|v| (v, rng.random_range(0..variables[v].domain_size)))
        .collect();
    SasTask {
        variables,
        operators,
        initial,
        goal,
    }
}

#[derive(Clone, Copy)]
pub enum RefOrder {
    Decreasing,
    Increasing,
}

/// Direct transcription of the next-fit packer: sorted candidates, next-fit
/// bins, shuffled causally related absorption after each placement.
pub fn ref_next_fit(
    task: &SasTask,
    cg: &CausalGraph,
    order: RefOrder,
    size: u128,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<VarId>> {
    let dom = |v: VarId| task.variables[v].domain_size as u128;
    let mut s_can: Vec<VarId> = (0..task.num_vars()).filter(|&v| dom(v) < size).collect();
    match order {
        RefOrder::Decreasing => s_can.sort_by_key(|&v| (std::cmp::Reverse(dom(v)), v)),
        RefOrder::Increasing => s_can.sort_by_key(|&v| (dom(v), v)),
    }
    let mut p_sel: Vec<Vec<VarId>> = Vec::new();
    let mut p: Vec<VarId> = Vec::new();
    let mut prod: u128 = 1;
    while !s_can.is_empty() {
        let v = s_can.remove(0);
        if !p.is_empty() && prod.saturating_mul(dom(v)) >= size {
            p_sel.push(std::mem::take(&mut p));
            prod = 1;
        }
        p.push(v);
        prod = prod.saturating_mul(dom(v));
        let mut s_rel: Vec<VarId> = s_can
            .iter()
            .copied()
            .filter(|&u| cg.are_related(v, u))
            .collect();
        s_rel.shuffle(rng);
        while !s_rel.is_empty() {
            let u = s_rel.remove(0);
            if prod.saturating_mul(dom(u)) < size {
                p.push(u);
                prod = prod.saturating_mul(dom(u));
                s_can.retain(|&x| x != u);
            }
        }
    }
    if !p.is_empty() {
        p_sel.push(p);
    }
    p_sel
}

/// Direct transcription of causal dependency bin-packing: each bin takes up
/// to N randomly drawn goal variables (skipping a draw that would overflow
/// the bin), then transitively absorbs shuffled causally related variables
/// that fit; bins are finally sorted by descending length (stable).
pub fn ref_cbp(
    task: &SasTask,
    cg: &CausalGraph,
    n: usize,
    size: u128,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<VarId>> {
    let dom = |v: VarId| task.variables[v].domain_size as u128;
    let mut s_can: Vec<VarId> = (0..task.num_vars()).filter(|&v| dom(v) < size).collect();
    let mut s_can_g: Vec<VarId> = task
        .goal_vars()
        .into_iter()
        .filter(|&v| dom(v) < size)
        .collect();
    let mut p_sel: Vec<Vec<VarId>> = Vec::new();
    while !s_can_g.is_empty() {
        let mut p: Vec<VarId> = Vec::new();
        let mut prod: u128 = 1;
        for _ in 0..n.min(s_can_g.len()) {
            let i = rng.random_range(0..s_can_g.len());
            let v = s_can_g[i];
            if prod.saturating_mul(dom(v)) >= size {
                break;
            }
            s_can_g.remove(i);
            s_can.retain(|&u| u != v);
            p.push(v);
            prod = prod.saturating_mul(dom(v));
        }
        if p.is_empty() {
            break;
        }
        let mut s_rel: Vec<VarId> = s_can
            .iter()
            .copied()
            .filter(|&u| p.iter().any(|&b| cg.are_related(b, u)))
            .collect();
        s_rel.shuffle(rng);
        while let Some(pos) = s_rel
            .iter()
            .position(|&v| prod.saturating_mul(dom(v)) < size)
        {
            let v = s_rel.remove(pos);
            p.push(v);
            prod = prod.saturating_mul(dom(v));
            s_can.retain(|&u| u != v);
            s_can_g.retain(|&u| u != v);
            let fresh: Vec<VarId> = s_can
                .iter()
                .copied()
                .filter(|&u| cg.are_related(v, u) && !s_rel.contains(&u))
                .collect();
            s_rel.extend(fresh);
            s_rel.shuffle(rng);
        }
        p_sel.push(p);
    }
    p_sel.sort_by_key(|b| std::cmp::Reverse(b.len()));
    p_sel
}
