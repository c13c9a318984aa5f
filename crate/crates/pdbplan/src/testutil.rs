//! Shared helpers for unit tests.

use crate::sas::{Operator, PartialState, SasTask, Variable};

pub fn mk_task(
    domains: &[u16],
    operators: Vec<(&str, PartialState, PartialState, u32)>,
    initial: Vec<u16>,
    goal: PartialState,
) -> SasTask {
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
        operators: operators
            .into_iter()
            .map(|(name, mut pre, mut eff, cost)| {
                pre.sort_unstable();
                eff.sort_unstable();
                Operator {
                    name: name.into(),
                    pre,
                    eff,
                    cost,
                }
            })
            .collect(),
        initial,
        goal,
    }
}

/// Two binary variables; o1: A 0->1 cost 2, o2: B 0->1 cost 3; goal A=1, B=1.
pub fn toy_task() -> SasTask {
    mk_task(
        &[2, 2],
        vec![
            ("o1", vec![(0, 0)], vec![(0, 1)], 2),
            ("o2", vec![(1, 0)], vec![(1, 1)], 3),
        ],
        vec![0, 0],
        vec![(0, 1), (1, 1)],
    )
}
