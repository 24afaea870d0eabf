//! Forward state-space search over grounded STRIPS tasks.
//!
//! [`solve`] is a best-first width-based search, BFS(f): nodes are ordered
//! lexicographically by (novelty, goal count, insertion order). Novelty
//! tables are partitioned by goal count, so a tuple of atoms is new for a
//! state whose goal count is `h` unless some earlier state with goal count
//! `<= h` already contained it. Non-novel states are kept with the lowest
//! priority, which keeps the search complete.
//!
//! [`solve_oracle`] is plain breadth-first search and returns shortest plans.

mod bfsf;
mod novelty;
mod oracle;

use std::time::Duration;

use fixedbitset::FixedBitSet;

use crate::pddl::{GroundAction, StripsTask};

pub use bfsf::{solve, solve_traced};
pub use oracle::{solve_oracle, OracleBudgetExceeded, ORACLE_STATE_LIMIT};

/// A set of true atoms, indexed as in `StripsTask::atoms`.
pub type State = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    /// Indices into `StripsTask::actions`.
    pub actions: Vec<usize>,
    pub cost: usize,
}

impl Plan {
    pub fn new(actions: Vec<usize>) -> Self {
        let cost = actions.len();
        Self { actions, cost }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetReason {
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Plan),
    /// The reachable state space was exhausted without meeting the goal.
    Unsolvable,
    Budget(BudgetReason),
}

impl SolveOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveOutcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, SolveOutcome::Solved(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest atom-tuple size tracked by the novelty tables: 1 or 2.
    pub max_novelty_width: usize,
    /// Maximum number of node expansions.
    pub node_budget: usize,
    pub time_budget: Duration,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { max_novelty_width: 2, node_budget: 100_000, time_budget: Duration::from_secs(2) }
    }
}

impl SearchConfig {
    pub fn with_width(mut self, width: usize) -> Self {
        self.max_novelty_width = width;
        self
    }

    pub fn with_node_budget(mut self, nodes: usize) -> Self {
        self.node_budget = nodes;
        self
    }

    fn validate(&self) {
        assert!(matches!(self.max_novelty_width, 1 | 2), "max_novelty_width must be 1 or 2");
        assert!(self.node_budget > 0 && !self.time_budget.is_zero(), "search budgets must be positive");
    }
}

pub fn initial_state(task: &StripsTask) -> State {
    let mut s = FixedBitSet::with_capacity(task.num_atoms());
    for &i in &task.init {
        s.insert(i);
    }
    s
}

/// Number of unsatisfied goal literals; goal literals that can never hold
/// always count as unsatisfied.
pub fn goal_count(task: &StripsTask, state: &State) -> usize {
    task.unreachable_goal.len() + task.goal.iter().filter(|&&(atom, positive)| state.contains(atom) != positive).count()
}

pub fn applicable(action: &GroundAction, state: &State) -> bool {
    action.pre_pos.iter().all(|&a| state.contains(a)) && action.pre_neg.iter().all(|&a| !state.contains(a))
}

pub fn apply(action: &GroundAction, state: &State) -> State {
    let mut next = state.clone();
    for &d in &action.del {
        next.set(d, false);
    }
    for &a in &action.add {
        next.insert(a);
    }
    next
}

/// Applies `plan` from the initial state, or `None` if some step is inapplicable.
pub fn simulate(task: &StripsTask, plan: &[usize]) -> Option<State> {
    let mut s = initial_state(task);
    for &ai in plan {
        let a = task.actions.get(ai)?;
        if !applicable(a, &s) {
            return None;
        }
        s = apply(a, &s);
    }
    Some(s)
}

/// Follows parent links back to the root, returning actions in forward order.
pub(crate) fn extract_plan(parents: &[(usize, usize)], mut node: usize) -> Plan {
    let mut actions = Vec::new();
    while node != 0 {
        let (parent, action) = parents[node];
        actions.push(action);
        node = parent;
    }
    actions.reverse();
    Plan::new(actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{ground, parse_domain, parse_problem};

    fn task(goal: &str, init: &str) -> StripsTask {
        let d = parse_domain("(define (domain g) (:predicates (p) (q)))").unwrap();
        let text = format!("(define (problem g) (:domain g) (:init {init}) (:goal {goal}))");
        ground(&d, &parse_problem(&text, &d).unwrap()).unwrap()
    }

    #[test]
    fn goal_count_cases() {
        let t = task("(and (p) (q))", "(p) (q)");
        assert_eq!(goal_count(&t, &initial_state(&t)), 0);
        let t = task("(and (p) (q))", "(p)");
        assert_eq!(goal_count(&t, &initial_state(&t)), 1);
        let t = task("(and (not (p)) (not (q)))", "");
        assert_eq!(goal_count(&t, &initial_state(&t)), 0);
    }
}
