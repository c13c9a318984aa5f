//! Heuristic construction pipeline: seeding with next-fit bin-packing,
//! bandit-driven alternation of causal-dependency packing and hill climbing,
//! partial-PDB completion, and final pruning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bandit::Ucb1;
use crate::clock::Clock;
use crate::evaluator::{
    commit_addition, draw_sample, maybe_resample, prune_dominated, should_add, SampleLimits,
    SampleSet,
};
use crate::generators::{
    cbp_pack, gamer_style_step, next_fit_pack, GamerConfig, GamerOutcome, GamerState, SortOrder,
};
use crate::pdb::{
    apply_zero_one_partition, build_pdb, BuildLimits, CollectionSet, Pattern, PdbCollection,
    Provenance, resume_build,
};
use crate::sas::{build_causal_graph, CausalGraph, SasTask};

#[derive(Debug, Clone)]
pub struct ConstructionConfig {
    /// Seconds of non-resampling time granted to each seeding packer.
    pub seed_phase_budget: f64,
    pub seed_size_start: u128,
    pub seed_size_factor: u128,
    /// Total construction budget in seconds.
    pub construction_time: f64,
    /// Construction memory budget in bytes.
    pub construction_memory: u64,
    /// Dense-table cap per PDB; larger abstract spaces stay partial.
    pub max_pdb_entries: u64,
    /// Per-PDB build budget in seconds.
    pub per_build_time: f64,
    /// Per-candidate budget inside a hill-climbing step.
    pub gamer_candidate_time: f64,
    pub sample_limits: SampleLimits,
    pub seed: u64,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            seed_phase_budget: 80.0,
            seed_size_start: 100_000_000,
            seed_size_factor: 10,
            construction_time: 1080.0,
            construction_memory: 4 << 30,
            max_pdb_entries: 10_000_000,
            per_build_time: 30.0,
            gamer_candidate_time: 10.0,
            sample_limits: SampleLimits::default(),
            seed: 0,
        }
    }
}

/// One construction attempt, accepted or not.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub algorithm: String,
    pub parameters: String,
    pub elapsed: f64,
    pub accepted: bool,
    pub patterns: Vec<Vec<usize>>,
    pub init_h: u64,
}

#[derive(Debug)]
pub struct ConstructionResult {
    pub set: CollectionSet,
    pub sample: SampleSet,
    pub audit: Vec<AuditRecord>,
    pub s_l: u128,
    pub construction_time: f64,
    /// The sampler saw the initial state map to infinity.
    pub unsolvable_hint: bool,
}

/// Virtual seconds accounted per construction attempt on top of the
/// per-state build and walk charges: candidate evaluation and bookkeeping.
const ATTEMPT_CHARGE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Alg {
    Cbp,
    Gamer,
}

pub struct Construction<'a> {
    task: &'a SasTask,
    cg: CausalGraph,
    config: ConstructionConfig,
    clock: &'a dyn Clock,
    rng: ChaCha8Rng,
    pub set: CollectionSet,
    pub sample: SampleSet,
    pub audit: Vec<AuditRecord>,
    pub s_l: u128,
    deadline: f64,
    next_seq: u64,
    /// Product of all domain sizes.
    task_size: u128,
}

impl<'a> Construction<'a> {
    pub fn new(task: &'a SasTask, config: ConstructionConfig, clock: &'a dyn Clock) -> Self {
        let cg = build_causal_graph(task);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let set = CollectionSet::new();
        let sample = draw_sample(task, &set, &mut rng, &config.sample_limits, clock);
        let deadline = clock.now() + config.construction_time;
        let s_l = config.seed_size_start;
        let task_size = task
            .variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain_size as u128));
        Construction {
            task,
            cg,
            config,
            clock,
            rng,
            set,
            sample,
            audit: Vec::new(),
            s_l,
            deadline,
            next_seq: 0,
            task_size,
        }
    }

    fn memory_exhausted(&self) -> bool {
        let headroom = self.config.max_pdb_entries.saturating_mul(5);
        self.set
            .memory_bytes()
            .saturating_add(headroom)
            > self.config.construction_memory
    }

    fn build_limits(&self) -> BuildLimits {
        BuildLimits {
            max_entries: self.config.max_pdb_entries,
            deadline: Some((self.clock.now() + self.config.per_build_time).min(self.deadline)),
        }
    }

    /// Zero-one partitions the pattern list and builds every member PDB.
    fn build_collection(&mut self, patterns: &[Pattern], provenance: Provenance) -> Option<PdbCollection> {
        if patterns.is_empty() {
            return None;
        }
        let cost_parts = apply_zero_one_partition(self.task, patterns);
        let mut pdbs = Vec::new();
        for (pattern, costs) in patterns.iter().zip(&cost_parts) {
            let limits = self.build_limits();
            if let Ok(pdb) = build_pdb(self.task, pattern, costs, &limits, self.clock) {
                pdbs.push(pdb);
            }
        }
        if pdbs.is_empty() {
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        Some(PdbCollection {
            pdbs,
            provenance,
            creation_seq: seq,
        })
    }

    /// Gates a candidate through the sample, committing on acceptance.
    /// Returns whether it was accepted.
    fn gate_and_commit(&mut self, candidate: PdbCollection) -> bool {
        if !should_add(&self.sample, &candidate) {
            return false;
        }
        let trigger = commit_addition(&mut self.sample, &mut self.set, candidate, self.task);
        maybe_resample(
            &mut self.sample,
            trigger,
            self.task,
            &self.set,
            &mut self.rng,
            &self.config.sample_limits,
            self.clock,
        );
        true
    }

    fn record(&mut self, algorithm: &str, parameters: String, elapsed: f64, accepted: bool, patterns: &[Pattern]) {
        self.audit.push(AuditRecord {
            algorithm: algorithm.into(),
            parameters,
            elapsed,
            accepted,
            patterns: patterns.iter().map(|p| p.vars().to_vec()).collect(),
            init_h: self.set.max_heuristic(&self.task.initial),
        });
    }

    /// Runs NFD then NFI, each for the seeding budget of non-resampling
    /// time, escalating the size limit tenfold per iteration. `s_l` ends as
    /// the largest size limit at which a collection was accepted.
    pub fn seed_phase(&mut self) {
        let mut accepted_any = false;
        for order in [SortOrder::Decreasing, SortOrder::Increasing] {
            let resample_base = self.sample.resample_time_spent;
            let phase_start = self.clock.now();
            let mut size_limit = self.config.seed_size_start;
            loop {
                let resample_extra = self.sample.resample_time_spent - resample_base;
                let spent = self.clock.now() - phase_start - resample_extra;
                if spent >= self.config.seed_phase_budget
                    || self.clock.now() >= self.deadline
                    || self.memory_exhausted()
                {
                    break;
                }
                let start = self.clock.now();
                self.clock.charge(ATTEMPT_CHARGE);
                let patterns =
                    next_fit_pack(self.task, &self.cg, order, size_limit, &mut self.rng);
                let provenance = match order {
                    SortOrder::Decreasing => Provenance::SeedNfd { size_limit },
                    SortOrder::Increasing => Provenance::SeedNfi { size_limit },
                };
                let accepted = match self.build_collection(&patterns, provenance) {
                    Some(candidate) => self.gate_and_commit(candidate),
                    None => false,
                };
                if accepted {
                    self.s_l = self.s_l.max(size_limit);
                    accepted_any = true;
                    let pruned = prune_dominated(std::mem::take(&mut self.set), &self.sample);
                    self.set = pruned;
                }
                let label = match order {
                    SortOrder::Decreasing => "nfd",
                    SortOrder::Increasing => "nfi",
                };
                let elapsed = self.clock.now() - start;
                self.record(label, format!("S=10^{}", size_limit.ilog10()), elapsed, accepted, &patterns);
                // once the limit covers the whole task, escalation cannot
                // produce new pattern lists; a rejection here is final
                if !accepted && size_limit >= self.task_size {
                    break;
                }
                size_limit = size_limit.saturating_mul(self.config.seed_size_factor);
            }
        }
        if !accepted_any {
            self.s_l = self.config.seed_size_start;
        }
    }

    fn s_choices(&self) -> Vec<u128> {
        let all: Vec<u128> = (9..=35).map(|e| 10u128.pow(e)).collect();
        let cap = self.s_l.saturating_mul(10_000);
        let kept: Vec<u128> = all.iter().copied().filter(|&s| s <= cap).collect();
        if kept.is_empty() {
            vec![all[0]]
        } else {
            kept
        }
    }

    /// Bandit-driven alternation of causal-dependency packing and hill
    /// climbing until time or memory is exhausted.
    pub fn adaptive_construct(&mut self) {
        let mut top: Ucb1<Alg> = Ucb1::new([Alg::Cbp, Alg::Gamer]);
        let n_max = self.task.goal_vars().len().max(1);
        let mut n_bandit: Ucb1<usize> = Ucb1::new(1..=n_max);
        let mut s_bandit: Ucb1<u128> = Ucb1::new(self.s_choices());
        let mut gamer = GamerState::new();

        while self.clock.now() < self.deadline && !self.memory_exhausted() && !top.is_empty() {
            let alg = *top.select().expect("nonempty bandit");
            let start = self.clock.now();
            self.clock.charge(ATTEMPT_CHARGE);
            match alg {
                Alg::Cbp => {
                    let n = *n_bandit.select().expect("n bandit nonempty");
                    let s = *s_bandit.select().expect("s bandit nonempty");
                    let patterns = cbp_pack(self.task, &self.cg, n, s, &mut self.rng);
                    let accepted = match self
                        .build_collection(&patterns, Provenance::Cbp { n, size_limit: s })
                    {
                        Some(candidate) => self.gate_and_commit(candidate),
                        None => false,
                    };
                    let elapsed = self.clock.now() - start;
                    let reward = if accepted { 1.0 } else { 0.0 };
                    top.update(&Alg::Cbp, elapsed, reward);
                    n_bandit.update(&n, elapsed, reward);
                    s_bandit.update(&s, elapsed, reward);
                    self.record("cbp", format!("N={n} S=10^{}", s.ilog10()), elapsed, accepted, &patterns);
                }
                Alg::Gamer => {
                    let memory_left = self
                        .config
                        .construction_memory
                        .saturating_sub(self.set.memory_bytes());
                    let cfg = GamerConfig {
                        candidate_time: self.config.gamer_candidate_time,
                        max_entries: self.config.max_pdb_entries,
                        iteration_cap: 120.0,
                        deadline: self.deadline,
                        memory_left,
                        sample_limits: self.config.sample_limits,
                    };
                    let outcome = gamer_style_step(
                        self.task,
                        &self.cg,
                        &mut gamer,
                        &cfg,
                        &mut self.rng,
                        self.clock,
                    );
                    let elapsed = self.clock.now() - start;
                    match outcome {
                        GamerOutcome::NewPattern(pdb) => {
                            let patterns = vec![pdb.pattern.clone()];
                            let seq = self.next_seq;
                            self.next_seq += 1;
                            let candidate = PdbCollection {
                                pdbs: vec![*pdb],
                                provenance: Provenance::Gamer,
                                creation_seq: seq,
                            };
                            let accepted = self.gate_and_commit(candidate);
                            top.update(&Alg::Gamer, elapsed, if accepted { 1.0 } else { 0.0 });
                            self.record("gamer", String::new(), elapsed, accepted, &patterns);
                        }
                        GamerOutcome::NoChange => {
                            top.update(&Alg::Gamer, elapsed, 0.0);
                            self.record("gamer", String::new(), elapsed, false, &[]);
                        }
                        GamerOutcome::Terminated => {
                            top.remove_arm(&Alg::Gamer);
                        }
                    }
                }
            }
        }
    }

    /// Resumes partial PDBs in creation order while budget remains, then
    /// prunes dominated collections once.
    pub fn finalize_collections(&mut self) {
        let mut order: Vec<(u64, usize)> = self
            .set
            .collections
            .iter()
            .enumerate()
            .map(|(i, c)| (c.creation_seq, i))
            .collect();
        order.sort_unstable();
        for (_, i) in order {
            for pdb in &mut self.set.collections[i].pdbs {
                if !pdb.partial {
                    continue;
                }
                if self.clock.now() >= self.deadline {
                    break;
                }
                let limits = BuildLimits {
                    max_entries: self.config.max_pdb_entries,
                    deadline: Some(self.deadline),
                };
                resume_build(pdb, &limits, self.clock);
            }
        }
        let pruned = prune_dominated(std::mem::take(&mut self.set), &self.sample);
        self.set = pruned;
    }

    pub fn finish(self, start: f64) -> ConstructionResult {
        ConstructionResult {
            unsolvable_hint: self.sample.unsolvable_hint,
            construction_time: self.clock.now() - start,
            set: self.set,
            sample: self.sample,
            audit: self.audit,
            s_l: self.s_l,
        }
    }
}

/// Full pipeline: seeding, adaptive construction, completion and pruning.
pub fn run_construction(
    task: &SasTask,
    config: ConstructionConfig,
    clock: &dyn Clock,
) -> ConstructionResult {
    let start = clock.now();
    let mut c = Construction::new(task, config, clock);
    c.seed_phase();
    c.adaptive_construct();
    c.finalize_collections();
    c.finish(start)
}
