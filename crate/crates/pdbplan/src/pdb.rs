//! Explicit pattern databases: task projection, backward Dijkstra
//! construction (possibly partial), zero-one cost partitioning, and the
//! max-over-collections combination.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

use crate::clock::Clock;
use crate::sas::{SasTask, State, Value, VarId};

/// Heuristic value; `INFINITY` marks a recognized dead end.
pub const INFINITY: u64 = u64::MAX;

const UNVISITED: u32 = u32::MAX;

/// An ordered (strictly increasing) nonempty set of variable ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    vars: Vec<VarId>,
}

impl Pattern {
    pub fn new(mut vars: Vec<VarId>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        assert!(!vars.is_empty(), "pattern must be nonempty");
        Pattern { vars }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    /// Product of member domain sizes, saturating at `u128::MAX`.
    pub fn size(&self, task: &SasTask) -> u128 {
        self.vars.iter().fold(1u128, |acc, &v| {
            acc.saturating_mul(task.variables[v].domain_size as u128)
        })
    }

    pub fn union_with(&self, vars: &[VarId]) -> Pattern {
        let mut all = self.vars.clone();
        all.extend_from_slice(vars);
        Pattern::new(all)
    }
}

/// Mixed-radix index of the pattern projection of `s`: position 0 is the
/// least significant digit.
pub fn rank_state(task: &SasTask, pattern: &Pattern, s: &State) -> u64 {
    let mut index = 0u64;
    let mut mult = 1u64;
    for &v in pattern.vars() {
        index += s[v] as u64 * mult;
        mult *= task.variables[v].domain_size as u64;
    }
    index
}

/// Inverse of [`rank_state`], restricted to the pattern (values per pattern
/// position).
pub fn unrank_state(task: &SasTask, pattern: &Pattern, mut index: u64) -> Vec<Value> {
    let mut values = Vec::with_capacity(pattern.len());
    for &v in pattern.vars() {
        let d = task.variables[v].domain_size as u64;
        values.push((index % d) as Value);
        index /= d;
    }
    values
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractOp {
    pub pre: Vec<(usize, Value)>,
    pub eff: Vec<(usize, Value)>,
    pub cost: u32,
}

/// Projection of a task onto a pattern; positions index into the pattern.
#[derive(Debug, Clone)]
pub struct AbstractTask {
    pub domains: Vec<Value>,
    pub ops: Vec<AbstractOp>,
    pub goal: Vec<(usize, Value)>,
}

/// Keeps only pattern variables in preconditions, effects and the goal.
/// Operators whose projected effect is empty are dropped; duplicates after
/// projection are merged at the minimum cost.
pub fn project_task(task: &SasTask, pattern: &Pattern, op_costs: &[u32]) -> AbstractTask {
    let pos_of: HashMap<VarId, usize> = pattern
        .vars()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let domains: Vec<Value> = pattern
        .vars()
        .iter()
        .map(|&v| task.variables[v].domain_size)
        .collect();
    let goal: Vec<(usize, Value)> = task
        .goal
        .iter()
        .filter_map(|&(v, val)| pos_of.get(&v).map(|&p| (p, val)))
        .collect();

    let mut ops: Vec<AbstractOp> = Vec::new();
    let mut seen: HashMap<(Vec<(usize, Value)>, Vec<(usize, Value)>), usize> = HashMap::new();
    for (i, op) in task.operators.iter().enumerate() {
        let eff: Vec<(usize, Value)> = op
            .eff
            .iter()
            .filter_map(|&(v, val)| pos_of.get(&v).map(|&p| (p, val)))
            .collect();
        if eff.is_empty() {
            continue;
        }
        let pre: Vec<(usize, Value)> = op
            .pre
            .iter()
            .filter_map(|&(v, val)| pos_of.get(&v).map(|&p| (p, val)))
            .collect();
        let cost = op_costs[i];
        match seen.entry((pre.clone(), eff.clone())) {
            std::collections::hash_map::Entry::Occupied(e) => {
                let idx = *e.get();
                ops[idx].cost = ops[idx].cost.min(cost);
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(ops.len());
                ops.push(AbstractOp { pre, eff, cost });
            }
        }
    }
    AbstractTask { domains, ops, goal }
}

/// Zero-one cost partitioning: processing patterns in order, an operator
/// keeps its cost in the first pattern its effect touches and costs zero in
/// all later ones.
pub fn apply_zero_one_partition(task: &SasTask, patterns: &[Pattern]) -> Vec<Vec<u32>> {
    let mut result = vec![vec![0u32; task.operators.len()]; patterns.len()];
    for (i, op) in task.operators.iter().enumerate() {
        for (p, pattern) in patterns.iter().enumerate() {
            if op.eff.iter().any(|&(v, _)| pattern.contains(v)) {
                result[p][i] = op.cost;
                break;
            }
        }
    }
    result
}

#[derive(Debug, Error)]
#[error("pattern too large to seed construction: {0}")]
pub struct BuildRefused(pub String);

#[derive(Debug, Clone, Copy)]
pub struct BuildLimits {
    /// Bound on table entries (dense allocation, or settled states when the
    /// abstract space is larger than the table bound).
    pub max_entries: u64,
    /// Absolute clock deadline for this build, if any.
    pub deadline: Option<f64>,
}

impl BuildLimits {
    pub fn unlimited() -> Self {
        BuildLimits {
            max_entries: u64::MAX,
            deadline: None,
        }
    }
}

/// Virtual seconds accounted per settled abstract state.
const SETTLE_CHARGE: f64 = 1e-6;

#[derive(Debug, Clone)]
enum Store {
    Dense {
        table: Vec<u32>,
        settled: Vec<bool>,
    },
    Sparse {
        settled: HashMap<Vec<Value>, u32>,
        open: HashMap<Vec<Value>, u32>,
    },
}

/// A (possibly partial) explicit pattern database.
#[derive(Debug, Clone)]
pub struct Pdb {
    pub pattern: Pattern,
    domains: Vec<Value>,
    multipliers: Vec<u64>,
    store: Store,
    pub partial: bool,
    /// Largest fully-closed cost layer (meaningful iff partial).
    pub frontier_depth: u64,
    /// Minimum strictly-positive partitioned operator cost in this abstract
    /// space (0 when all partitioned costs are zero).
    pub fallback_increment: u64,
    /// Value answered for unvisited abstract states of a partial PDB.
    fallback_value: u64,
    pub op_costs: Vec<u32>,
    abstract_task: Option<AbstractTask>,
}

struct Regression {
    /// Constraints the successor state must satisfy.
    check: Vec<(usize, Value)>,
    /// Positions forced in the predecessor (effect position with a
    /// precondition).
    assign: Vec<(usize, Value)>,
    /// Effect positions without precondition: free in the predecessor.
    free: Vec<usize>,
    cost: u32,
}

fn regressions(at: &AbstractTask) -> Vec<Regression> {
    at.ops
        .iter()
        .map(|op| {
            let eff_pos: Vec<usize> = op.eff.iter().map(|&(p, _)| p).collect();
            let mut check = op.eff.clone();
            let mut assign = Vec::new();
            let mut free = Vec::new();
            for &(p, val) in &op.pre {
                if eff_pos.contains(&p) {
                    assign.push((p, val));
                } else {
                    check.push((p, val));
                }
            }
            for &(p, _) in &op.eff {
                if !op.pre.iter().any(|&(q, _)| q == p) {
                    free.push(p);
                }
            }
            Regression {
                check,
                assign,
                free,
                cost: op.cost,
            }
        })
        .collect()
}

/// Enumerates every completion of the partial assignment `fixed` over
/// `domains`, invoking `f` on each.
fn for_each_completion(
    domains: &[Value],
    fixed: &[(usize, Value)],
    mut f: impl FnMut(&[Value]),
) {
    let mut state: Vec<Value> = vec![0; domains.len()];
    let mut is_fixed = vec![false; domains.len()];
    for &(p, val) in fixed {
        state[p] = val;
        is_fixed[p] = true;
    }
    let free: Vec<usize> = (0..domains.len()).filter(|&p| !is_fixed[p]).collect();
    loop {
        f(&state);
        // odometer over the free positions
        let mut carry = true;
        for &p in &free {
            state[p] += 1;
            if state[p] < domains[p] {
                carry = false;
                break;
            }
            state[p] = 0;
        }
        if carry {
            break;
        }
    }
}

fn count_goal_states(at: &AbstractTask) -> u128 {
    let fixed: Vec<usize> = at.goal.iter().map(|&(p, _)| p).collect();
    at.domains
        .iter()
        .enumerate()
        .filter(|(p, _)| !fixed.contains(p))
        .fold(1u128, |acc, (_, &d)| acc.saturating_mul(d as u128))
}

impl Pdb {
    fn rank(&self, values: &[Value]) -> u64 {
        values
            .iter()
            .zip(&self.multipliers)
            .map(|(&v, &m)| v as u64 * m)
            .sum()
    }

    fn pattern_values(&self, s: &State) -> Vec<Value> {
        self.pattern.vars().iter().map(|&v| s[v]).collect()
    }

    /// Table value at the projection of `s`; unvisited entries of a partial
    /// PDB answer the fallback value, unreachable entries of a complete PDB
    /// answer `INFINITY`.
    pub fn lookup(&self, s: &State) -> u64 {
        let values = self.pattern_values(s);
        self.lookup_abstract(&values)
    }

    /// Lookup by pattern-position values.
    pub fn lookup_abstract(&self, values: &[Value]) -> u64 {
        let settled = match &self.store {
            Store::Dense { table, settled } => {
                let i = self.rank(values) as usize;
                if settled[i] {
                    Some(table[i] as u64)
                } else {
                    None
                }
            }
            Store::Sparse { settled, .. } => settled.get(values).map(|&c| c as u64),
        };
        match settled {
            Some(c) => c,
            None if self.partial => self.fallback_value,
            None => INFINITY,
        }
    }

    pub fn fallback_value(&self) -> u64 {
        self.fallback_value
    }

    pub fn settled_entries(&self) -> u64 {
        match &self.store {
            Store::Dense { settled, .. } => settled.iter().filter(|&&b| b).count() as u64,
            Store::Sparse { settled, .. } => settled.len() as u64,
        }
    }

    /// Rough live-memory estimate in bytes.
    pub fn memory_bytes(&self) -> u64 {
        let k = self.pattern.len() as u64;
        match &self.store {
            Store::Dense { table, .. } => table.len() as u64 * 5,
            Store::Sparse { settled, open } => {
                (settled.len() + open.len()) as u64 * (2 * k + 48)
            }
        }
    }
}

/// Builds a PDB by backward Dijkstra from the abstract goal states over
/// inverted abstract operators. Returns a partial PDB when the entry bound
/// or the deadline cuts the search short.
pub fn build_pdb(
    task: &SasTask,
    pattern: &Pattern,
    op_costs: &[u32],
    limits: &BuildLimits,
    clock: &dyn Clock,
) -> Result<Pdb, BuildRefused> {
    let at = project_task(task, pattern, op_costs);
    let size = pattern.size(task);
    let goal_states = count_goal_states(&at);
    if goal_states > limits.max_entries as u128 {
        return Err(BuildRefused(format!(
            "{goal_states} abstract goal states exceed the {} entry bound",
            limits.max_entries
        )));
    }
    let dense = size <= limits.max_entries as u128 && size <= (u32::MAX as u128);
    let store = if dense {
        Store::Dense {
            table: vec![UNVISITED; size as usize],
            settled: vec![false; size as usize],
        }
    } else {
        Store::Sparse {
            settled: HashMap::new(),
            open: HashMap::new(),
        }
    };
    let multipliers = {
        let mut mults = Vec::with_capacity(pattern.len());
        let mut m = 1u64;
        for &v in pattern.vars() {
            mults.push(m);
            m = m.saturating_mul(task.variables[v].domain_size as u64);
        }
        mults
    };
    let increment = at
        .ops
        .iter()
        .map(|o| o.cost as u64)
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(0);

    let mut pdb = Pdb {
        pattern: pattern.clone(),
        domains: at.domains.clone(),
        multipliers,
        store,
        partial: false,
        frontier_depth: 0,
        fallback_increment: increment,
        fallback_value: 0,
        op_costs: op_costs.to_vec(),
        abstract_task: Some(at),
    };

    // Seed every abstract state consistent with the projected goal.
    let at_ref = pdb.abstract_task.clone().unwrap();
    let mut heap: BinaryHeap<Reverse<(u64, Vec<Value>)>> = BinaryHeap::new();
    for_each_completion(&at_ref.domains, &at_ref.goal, |s| {
        heap.push(Reverse((0, s.to_vec())));
        set_tentative(&mut pdb, s, 0);
    });
    run_dijkstra(&mut pdb, &at_ref, heap, limits, clock);
    Ok(pdb)
}

fn tentative(pdb: &Pdb, key: &[Value]) -> u64 {
    match &pdb.store {
        Store::Dense { table, .. } => {
            let v = table[pdb.rank(key) as usize];
            if v == UNVISITED {
                INFINITY
            } else {
                v as u64
            }
        }
        Store::Sparse { settled, open } => settled
            .get(key)
            .or_else(|| open.get(key))
            .map(|&c| c as u64)
            .unwrap_or(INFINITY),
    }
}

fn set_tentative(pdb: &mut Pdb, key: &[Value], g: u64) {
    let g32 = u32::try_from(g).expect("abstract cost exceeds u32 range");
    assert!(g32 != UNVISITED);
    let rank = pdb.rank(key) as usize;
    match &mut pdb.store {
        Store::Dense { table, .. } => table[rank] = g32,
        Store::Sparse { open, .. } => {
            open.insert(key.to_vec(), g32);
        }
    }
}

fn is_settled(pdb: &Pdb, key: &[Value]) -> bool {
    match &pdb.store {
        Store::Dense { settled, .. } => settled[pdb.rank(key) as usize],
        Store::Sparse { settled, .. } => settled.contains_key(key),
    }
}

fn settle(pdb: &mut Pdb, key: &[Value], g: u64) {
    let rank = pdb.rank(key) as usize;
    match &mut pdb.store {
        Store::Dense { settled, .. } => settled[rank] = true,
        Store::Sparse { settled, open } => {
            open.remove(key);
            settled.insert(key.to_vec(), g as u32);
        }
    }
}

fn run_dijkstra(
    pdb: &mut Pdb,
    at: &AbstractTask,
    mut heap: BinaryHeap<Reverse<(u64, Vec<Value>)>>,
    limits: &BuildLimits,
    clock: &dyn Clock,
) {
    let regs = regressions(at);
    let mut settled_count = pdb.settled_entries();
    let mut max_settled_below_qmin: Option<u64> = None;
    let mut stopped = false;
    let mut pred = Vec::new();

    while let Some(Reverse((g, key))) = heap.pop() {
        if is_settled(pdb, &key) || tentative(pdb, &key) != g {
            continue;
        }
        // limit checks before settling this state
        if settled_count >= limits.max_entries {
            heap.push(Reverse((g, key)));
            stopped = true;
            break;
        }
        if let Some(deadline) = limits.deadline {
            if clock.now() >= deadline {
                heap.push(Reverse((g, key)));
                stopped = true;
                break;
            }
        }
        settle(pdb, &key, g);
        settled_count += 1;
        clock.charge(SETTLE_CHARGE);
        max_settled_below_qmin = Some(g);

        for reg in &regs {
            if reg
                .check
                .iter()
                .any(|&(p, val)| key[p] != val)
            {
                continue;
            }
            let ng = g + reg.cost as u64;
            pred.clear();
            pred.extend_from_slice(&key);
            for &(p, val) in &reg.assign {
                pred[p] = val;
            }
            // enumerate free effect positions of the predecessor
            let free = &reg.free;
            let mut done = false;
            for &p in free {
                pred[p] = 0;
            }
            while !done {
                if !is_settled(pdb, &pred) && ng < tentative(pdb, &pred) {
                    set_tentative(pdb, &pred, ng);
                    heap.push(Reverse((ng, pred.clone())));
                }
                done = true;
                for &p in free {
                    pred[p] += 1;
                    if pred[p] < at.domains[p] {
                        done = false;
                        break;
                    }
                    pred[p] = 0;
                }
                if free.is_empty() {
                    break;
                }
            }
        }
    }

    if stopped {
        // qmin: smallest current tentative among unsettled open states. Every
        // unsettled abstract state has true cost >= qmin (Dijkstra invariant),
        // so min(d + increment, qmin) is a safe fallback.
        let qmin = heap
            .iter()
            .filter(|Reverse((g, key))| !is_settled(pdb, key) && tentative(pdb, key) == *g)
            .map(|Reverse((g, _))| *g)
            .min()
            .unwrap_or(INFINITY);
        let d = if let Some(m) = max_settled_below_qmin {
            if m < qmin {
                m
            } else {
                // stopped mid-layer: back off to the previous closed layer
                settled_costs_below(pdb, qmin)
            }
        } else {
            0
        };
        pdb.partial = true;
        pdb.frontier_depth = d;
        pdb.fallback_value = (d.saturating_add(pdb.fallback_increment)).min(qmin);
    } else {
        pdb.partial = false;
        pdb.fallback_value = INFINITY;
        pdb.abstract_task = None;
        if let Store::Sparse { open, .. } = &mut pdb.store {
            open.clear();
        }
    }
}

fn settled_costs_below(pdb: &Pdb, qmin: u64) -> u64 {
    let best = |it: &mut dyn Iterator<Item = u64>| it.filter(|&g| g < qmin).max().unwrap_or(0);
    match &pdb.store {
        Store::Dense { table, settled } => best(
            &mut table
                .iter()
                .zip(settled)
                .filter(|(_, &s)| s)
                .map(|(&g, _)| g as u64),
        ),
        Store::Sparse { settled, .. } => best(&mut settled.values().map(|&g| g as u64)),
    }
}

/// Continues the backward search of a partial PDB under fresh limits.
/// Looked-up values never decrease across a resume.
pub fn resume_build(pdb: &mut Pdb, limits: &BuildLimits, clock: &dyn Clock) {
    if !pdb.partial {
        return;
    }
    let at = pdb
        .abstract_task
        .clone()
        .expect("partial PDB retains its abstract task");
    let mut heap: BinaryHeap<Reverse<(u64, Vec<Value>)>> = BinaryHeap::new();
    match &pdb.store {
        Store::Dense { table, settled } => {
            for (i, (&g, &s)) in table.iter().zip(settled).enumerate() {
                if !s && g != UNVISITED {
                    heap.push(Reverse((g as u64, unrank_by(&pdb.domains, i as u64))));
                }
            }
        }
        Store::Sparse { open, .. } => {
            for (key, &g) in open {
                heap.push(Reverse((g as u64, key.clone())));
            }
        }
    }
    run_dijkstra(pdb, &at, heap, limits, clock);
}

fn unrank_by(domains: &[Value], mut index: u64) -> Vec<Value> {
    domains
        .iter()
        .map(|&d| {
            let v = (index % d as u64) as Value;
            index /= d as u64;
            v
        })
        .collect()
}

/// Which generator produced a collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    SeedNfd { size_limit: u128 },
    SeedNfi { size_limit: u128 },
    Cbp { n: usize, size_limit: u128 },
    Gamer,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::SeedNfd { .. } => "nfd",
            Provenance::SeedNfi { .. } => "nfi",
            Provenance::Cbp { .. } => "cbp",
            Provenance::Gamer => "gamer",
        }
    }
}

/// An additive group of PDBs under one zero-one cost partition.
#[derive(Debug, Clone)]
pub struct PdbCollection {
    pub pdbs: Vec<Pdb>,
    pub provenance: Provenance,
    pub creation_seq: u64,
}

impl PdbCollection {
    /// Sum of member lookups; `INFINITY` as soon as any member reports it.
    pub fn heuristic(&self, s: &State) -> u64 {
        let mut total = 0u64;
        for pdb in &self.pdbs {
            let h = pdb.lookup(s);
            if h == INFINITY {
                return INFINITY;
            }
            total = total.saturating_add(h);
        }
        total
    }

    pub fn memory_bytes(&self) -> u64 {
        self.pdbs.iter().map(|p| p.memory_bytes()).sum()
    }
}

/// The ordered set of accepted collections; heuristic = max over collections.
#[derive(Debug, Clone, Default)]
pub struct CollectionSet {
    pub collections: Vec<PdbCollection>,
}

impl CollectionSet {
    pub fn new() -> Self {
        CollectionSet {
            collections: Vec::new(),
        }
    }

    /// Max over collection heuristics; 0 for the empty set.
    pub fn max_heuristic(&self, s: &State) -> u64 {
        self.collections
            .iter()
            .map(|c| c.heuristic(s))
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.collections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.collections.is_empty()
    }

    pub fn memory_bytes(&self) -> u64 {
        self.collections.iter().map(|c| c.memory_bytes()).sum()
    }
}

const PDB_MAGIC: &[u8; 4] = b"EPD1";

/// Binary dump of a dense PDB for test fixtures. Not a compatibility promise.
pub fn dump_pdb(pdb: &Pdb, w: &mut impl Write) -> std::io::Result<()> {
    let (table, settled) = match &pdb.store {
        Store::Dense { table, settled } => (table, settled),
        Store::Sparse { .. } => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::Unsupported,
                "only dense PDBs can be dumped",
            ))
        }
    };
    w.write_all(PDB_MAGIC)?;
    w.write_all(&(pdb.pattern.len() as u32).to_le_bytes())?;
    for (&v, &d) in pdb.pattern.vars().iter().zip(&pdb.domains) {
        w.write_all(&(v as u32).to_le_bytes())?;
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&[pdb.partial as u8])?;
    w.write_all(&pdb.frontier_depth.to_le_bytes())?;
    w.write_all(&pdb.fallback_increment.to_le_bytes())?;
    w.write_all(&pdb.fallback_value.to_le_bytes())?;
    w.write_all(&(table.len() as u64).to_le_bytes())?;
    for (&t, &s) in table.iter().zip(settled) {
        // unsettled entries are stored as UNVISITED
        let v = if s { t } else { UNVISITED };
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Loads a [`dump_pdb`] image. The result supports lookups only; a loaded
/// partial PDB cannot be resumed.
pub fn load_pdb(r: &mut impl Read) -> std::io::Result<Pdb> {
    let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != PDB_MAGIC {
        return Err(bad("bad magic header"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let k = u32::from_le_bytes(b4) as usize;
    let mut vars = Vec::with_capacity(k);
    let mut domains = Vec::with_capacity(k);
    for _ in 0..k {
        r.read_exact(&mut b4)?;
        vars.push(u32::from_le_bytes(b4) as VarId);
        r.read_exact(&mut b4)?;
        domains.push(u32::from_le_bytes(b4) as Value);
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    r.read_exact(&mut b8)?;
    let frontier_depth = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let fallback_increment = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let fallback_value = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut table = Vec::with_capacity(len);
    let mut settled = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b4)?;
        let v = u32::from_le_bytes(b4);
        table.push(v);
        settled.push(v != UNVISITED);
    }
    let mut multipliers = Vec::with_capacity(k);
    let mut m = 1u64;
    for &d in &domains {
        multipliers.push(m);
        m = m.saturating_mul(d as u64);
    }
    Ok(Pdb {
        pattern: Pattern::new(vars),
        domains,
        multipliers,
        store: Store::Dense { table, settled },
        partial: flag[0] != 0,
        frontier_depth,
        fallback_increment,
        fallback_value,
        op_costs: Vec::new(),
        abstract_task: None,
    })
}
