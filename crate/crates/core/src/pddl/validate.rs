//! Sequential plan validation with set semantics, independent of the search
//! state representation.

use std::collections::BTreeSet;

use super::StripsTask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The plan refers to an action index the task does not have.
    UnknownAction(usize),
    /// Positive preconditions missing and negative preconditions present.
    UnmetPrecondition { missing: Vec<usize>, forbidden: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position in the plan of the first inapplicable action.
    pub index: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanTrace {
    /// `states[0]` is the initial state; one more entry per applied action.
    pub states: Vec<BTreeSet<usize>>,
    pub goal_satisfied: bool,
    pub violation: Option<Violation>,
}

impl PlanTrace {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none() && self.goal_satisfied
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

fn goal_holds(task: &StripsTask, state: &BTreeSet<usize>) -> bool {
    task.unreachable_goal.is_empty() && task.goal.iter().all(|&(atom, positive)| state.contains(&atom) == positive)
}

/// Applies `plan` (indices into `task.actions`) from the initial state. Stops
/// at the first inapplicable action; never panics.
pub fn validate_plan(task: &StripsTask, plan: &[usize]) -> PlanTrace {
    let mut state: BTreeSet<usize> = task.init.iter().copied().collect();
    let mut states = vec![state.clone()];
    for (index, &ai) in plan.iter().enumerate() {
        let Some(action) = task.actions.get(ai) else {
            return PlanTrace {
                goal_satisfied: goal_holds(task, &state),
                states,
                violation: Some(Violation { index, kind: ViolationKind::UnknownAction(ai) }),
            };
        };
        let missing: Vec<usize> = action.pre_pos.iter().copied().filter(|a| !state.contains(a)).collect();
        let forbidden: Vec<usize> = action.pre_neg.iter().copied().filter(|a| state.contains(a)).collect();
        if !missing.is_empty() || !forbidden.is_empty() {
            return PlanTrace {
                goal_satisfied: goal_holds(task, &state),
                states,
                violation: Some(Violation { index, kind: ViolationKind::UnmetPrecondition { missing, forbidden } }),
            };
        }
        for d in &action.del {
            state.remove(d);
        }
        state.extend(action.add.iter().copied());
        states.push(state.clone());
    }
    PlanTrace { goal_satisfied: goal_holds(task, &state), states, violation: None }
}
