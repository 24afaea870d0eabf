use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use super::{applicable, apply, extract_plan, goal_count, initial_state, Plan, SolveOutcome, State};
use crate::pddl::StripsTask;

/// Largest number of distinct states the oracle will visit.
pub const ORACLE_STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("breadth-first oracle visited more than {limit} states")]
pub struct OracleBudgetExceeded {
    pub limit: usize,
}

/// Plain breadth-first search. Returns a shortest plan or `Unsolvable`.
pub fn solve_oracle(task: &StripsTask) -> Result<SolveOutcome, OracleBudgetExceeded> {
    if task.trivially_unsolvable() {
        return Ok(SolveOutcome::Unsolvable);
    }
    let init = initial_state(task);
    if goal_count(task, &init) == 0 {
        return Ok(SolveOutcome::Solved(Plan::empty()));
    }
    let mut states: Vec<State> = vec![init.clone()];
    let mut parents = vec![(0usize, usize::MAX)];
    let mut visited: HashSet<State> = HashSet::from([init]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let state = states[id].clone();
        for (ai, action) in task.actions.iter().enumerate() {
            if !applicable(action, &state) {
                continue;
            }
            let child = apply(action, &state);
            if !visited.insert(child.clone()) {
                continue;
            }
            if visited.len() > ORACLE_STATE_LIMIT {
                return Err(OracleBudgetExceeded { limit: ORACLE_STATE_LIMIT });
            }
            let child_id = states.len();
            let done = goal_count(task, &child) == 0;
            states.push(child);
            parents.push((id, ai));
            if done {
                return Ok(SolveOutcome::Solved(extract_plan(&parents, child_id)));
            }
            queue.push_back(child_id);
        }
    }
    Ok(SolveOutcome::Unsolvable)
}
