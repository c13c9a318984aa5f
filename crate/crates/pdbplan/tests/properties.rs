//! Randomized invariants over ranking and PDB heuristics.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{all_states, hstar_map, random_task};
use pdbplan::clock::VirtualClock;
use pdbplan::pdb::{
    build_pdb, rank_state, unrank_state, BuildLimits, Pattern, INFINITY,
};
use pdbplan::sas::{SasTask, Value, Variable};

fn task_with_domains(domains: &[Value]) -> SasTask {
    SasTask {
        variables: domains
            .iter()
            .enumerate()
            .map(|(i, &d)| Variable {
                name: format!("v{i}"),
                domain_size: d,
                value_names: (0..d).map(|x| format!("v{i}={x}")).collect(),
            })
            .collect(),
        operators: vec![],
        initial: vec![0; domains.len()],
        goal: vec![],
    }
}

proptest! {
    #[test]
    fn ranking_is_a_bijection(
        domains in proptest::collection::vec(2u16..5, 1..6),
        pattern_mask in proptest::collection::vec(any::<bool>(), 6),
        index_seed in any::<u64>(),
    ) {
        let task = task_with_domains(&domains);
        let vars: Vec<usize> = (0..domains.len())
            .filter(|&v| pattern_mask[v])
            .collect();
        prop_assume!(!vars.is_empty());
        let pattern = Pattern::new(vars);
        let size: u64 = pattern
            .vars()
            .iter()
            .map(|&v| domains[v] as u64)
            .product();
        let index = index_seed % size;
        let values = unrank_state(&task, &pattern, index);
        // embed into a full state and rank back
        let mut state = vec![0u16; domains.len()];
        for (&v, &val) in pattern.vars().iter().zip(&values) {
            state[v] = val;
        }
        prop_assert_eq!(rank_state(&task, &pattern, &state), index);
    }

    #[test]
    fn single_pdb_is_admissible_and_consistent(task_seed in 0u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed);
        let task = random_task(&mut rng);
        let hstar = hstar_map(&task);
        let pattern = Pattern::new((0..task.num_vars()).collect());
        let costs: Vec<u32> = task.operators.iter().map(|o| o.cost).collect();
        let clock = VirtualClock::new();
        let pdb = build_pdb(&task, &pattern, &costs, &BuildLimits::unlimited(), &clock).unwrap();
        for s in all_states(&task) {
            let h = pdb.lookup(&s);
            let exact = hstar.get(&s).copied().unwrap_or(INFINITY);
            // the full pattern is the task itself: values must be exact
            prop_assert_eq!(h, exact, "state {:?}", s);
            for op in &task.operators {
                if let Some(succ) = task.apply_operator(&s, op) {
                    let hs = pdb.lookup(&succ);
                    if h != INFINITY && hs != INFINITY {
                        prop_assert!(h <= op.cost as u64 + hs);
                    }
                }
            }
        }
    }
}
