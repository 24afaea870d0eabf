//! Symbolic checks over the agent's belief: whole-task planning and
//! precondition verification of predicted actions.

use std::collections::{BTreeMap, BTreeSet};

use crate::llm::ParsedAction;
use crate::pddl::{ground, Domain, Goal, Literal};
use crate::search::{solve, SearchConfig, SolveOutcome};
use crate::world::facts::{candidate_bindings, fits_type, literal_holds};
use crate::world::{to_problem, SceneGraph, ToProblemError};

/// Most implicit-parameter bindings tried per verified action.
pub const MAX_PV_BINDINGS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The preconditions hold now: a plan of cost 0.
    Valid,
    /// Surface forms of a plan that makes the preconditions hold.
    Repair(Vec<String>),
    Unsatisfiable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanFailure {
    UnknownGoalObject(String),
    InvalidGoal(String),
    Unsolvable,
    Budget,
}

impl PlanFailure {
    /// Failures that point at the goal itself rather than the world.
    pub fn blames_goal(&self) -> bool {
        matches!(self, PlanFailure::InvalidGoal(_))
    }
}

/// Plans from the belief to `goal`, returning surface forms.
pub fn plan_for(scene: &SceneGraph, domain: &Domain, goal: &Goal, search: &SearchConfig) -> Result<Vec<String>, PlanFailure> {
    let problem = to_problem(scene, domain, goal).map_err(|e| match e {
        ToProblemError::UnknownGoalObject(o) => PlanFailure::UnknownGoalObject(o),
        ToProblemError::InvalidGoal(e) => PlanFailure::InvalidGoal(e.to_string()),
    })?;
    let task = ground(domain, &problem).map_err(|e| PlanFailure::InvalidGoal(e.to_string()))?;
    match solve(&task, search) {
        SolveOutcome::Solved(plan) => Ok(plan.actions.iter().map(|&i| task.actions[i].surface.clone()).collect()),
        SolveOutcome::Unsolvable => Err(PlanFailure::Unsolvable),
        SolveOutcome::Budget(_) => Err(PlanFailure::Budget),
    }
}

/// Predicates no action changes.
fn static_predicates(domain: &Domain) -> BTreeSet<&str> {
    let changed: BTreeSet<&str> = domain
        .actions
        .iter()
        .flat_map(|a| a.add_effects.iter().chain(&a.del_effects))
        .map(|atom| atom.predicate.as_str())
        .collect();
    domain.predicates.iter().map(|p| p.name.as_str()).filter(|p| !changed.contains(p)).collect()
}

fn bound(l: &Literal, b: &BTreeMap<String, String>) -> Literal {
    Literal { atom: l.atom.substitute(b), positive: l.positive }
}

/// Verifies a predicted action against the belief. Each candidate binding's
/// preconditions become a sub-goal; the cheapest plan to it decides: cost 0
/// is `Valid`, a longer plan is a `Repair`.
pub fn precondition_verify(action: &ParsedAction, scene: &SceneGraph, domain: &Domain, search: &SearchConfig) -> Verdict {
    let Some(schema) = domain.action(&action.name).filter(|_| !action.is_finish) else {
        return Verdict::Unsatisfiable(format!("unknown action `{}`", action.raw_text));
    };
    let params = schema.arguments();
    if params.len() != action.arguments.len() {
        return Verdict::Unsatisfiable(format!("{} expects {} arguments", schema.name, params.len()));
    }
    for (p, a) in params.iter().zip(&action.arguments) {
        if !scene.is_discovered(a) {
            return Verdict::Unsatisfiable(format!("unknown object `{a}`"));
        }
        if !fits_type(domain, scene, a, &p.ty) {
            return Verdict::Unsatisfiable(format!("`{a}` is not a {}", p.ty));
        }
    }
    let statics = static_predicates(domain);
    // an atom whose arguments cannot fill the predicate's parameters never holds
    let well_typed = |l: &Literal| {
        l.atom.is_equality()
            || domain
                .predicate(&l.atom.predicate)
                .is_some_and(|p| p.params.iter().zip(&l.atom.args).all(|(t, a)| fits_type(domain, scene, a, &t.ty)))
    };
    // literals no action can change
    let fixed = |l: &Literal| l.atom.is_equality() || statics.contains(l.atom.predicate.as_str()) || !well_typed(l);
    let fixed_holds = |l: &Literal| if well_typed(l) { literal_holds(scene, l) } else { !l.positive };
    let bindings: Vec<_> = candidate_bindings(domain, scene, schema, &action.arguments, |id| scene.is_discovered(id))
        .into_iter()
        .filter(|b| schema.precondition.iter().map(|l| bound(l, b)).filter(|l| fixed(l)).all(|l| fixed_holds(&l)))
        .take(MAX_PV_BINDINGS)
        .collect();
    let mut best: Option<Vec<String>> = None;
    let mut last_failure = String::from("no binding satisfies the fixed preconditions");
    for b in &bindings {
        let literals: Vec<Literal> = schema
            .precondition
            .iter()
            .map(|l| bound(l, b))
            .filter(|l| !fixed(l))
            .collect();
        match plan_for(scene, domain, &Goal { literals }, search) {
            Ok(plan) if plan.is_empty() => return Verdict::Valid,
            Ok(plan) => {
                if best.as_ref().is_none_or(|p| plan.len() < p.len()) {
                    best = Some(plan);
                }
            }
            Err(f) => last_failure = format!("{f:?}"),
        }
    }
    match best {
        Some(plan) => Verdict::Repair(plan),
        None => Verdict::Unsatisfiable(last_failure),
    }
}
