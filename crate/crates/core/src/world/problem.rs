//! Translation of the discovered part of a scene into a PDDL problem.

use thiserror::Error;

use super::{Entity, SceneGraph};
use crate::pddl::{Atom, Domain, Goal, Problem, SemanticError, TypedName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToProblemError {
    /// The goal names an entity that has not been discovered.
    #[error("goal mentions `{0}`, which has not been discovered")]
    UnknownGoalObject(String),
    #[error("goal does not fit the domain: {0}")]
    InvalidGoal(SemanticError),
}

/// PDDL type of an entity in the bundled domains.
pub fn entity_type(entity: &Entity) -> &'static str {
    if entity.is("ishuman") {
        "human"
    } else if entity.is("pickupable") {
        "item"
    } else {
        "recep"
    }
}

fn unary(domain: &Domain, predicate: &str, ty: &str) -> bool {
    domain
        .predicate(predicate)
        .is_some_and(|p| p.arity() == 1 && domain.is_subtype(ty, &p.params[0].ty))
}

fn binary(domain: &Domain, predicate: &str, a: &str, b: &str) -> bool {
    domain.predicate(predicate).is_some_and(|p| {
        p.arity() == 2 && domain.is_subtype(a, &p.params[0].ty) && domain.is_subtype(b, &p.params[1].ty)
    })
}

fn nullary(domain: &Domain, predicate: &str) -> bool {
    domain.predicate(predicate).is_some_and(|p| p.arity() == 0)
}

/// Builds a problem over the discovered entities. Facts whose predicate the
/// domain does not declare (or declares for other types) are left out.
pub fn to_problem(scene: &SceneGraph, domain: &Domain, goal: &Goal) -> Result<Problem, ToProblemError> {
    if let Some(missing) = goal.objects().find(|o| !scene.is_discovered(o)) {
        return Err(ToProblemError::UnknownGoalObject(missing.to_string()));
    }
    let type_of = |id: &str| scene.entities.get(id).map(entity_type);
    let mut objects = Vec::new();
    let mut init = Vec::new();
    for id in &scene.discovered {
        let Some(e) = scene.entities.get(id) else { continue };
        let ty = entity_type(e);
        objects.push(TypedName::new(id.clone(), ty));
        for p in e.static_predicates.iter().chain(&e.dynamic_predicates) {
            if unary(domain, p, ty) {
                init.push(Atom::new(p.clone(), [id.clone()]));
            }
        }
    }
    for r in &scene.relations {
        if !scene.is_discovered(&r.subject) || !scene.is_discovered(&r.object) {
            continue;
        }
        let (Some(a), Some(b)) = (type_of(&r.subject), type_of(&r.object)) else { continue };
        if binary(domain, r.kind.predicate(), a, b) {
            init.push(Atom::new(r.kind.predicate(), [r.subject.clone(), r.object.clone()]));
        }
    }
    if let Some(loc) = scene.agent.location.as_ref().filter(|l| scene.is_discovered(l)) {
        if type_of(loc).is_some_and(|t| unary(domain, "agent-at", t)) {
            init.push(Atom::new("agent-at", [loc.clone()]));
        }
    }
    match scene.agent.holding.as_ref().filter(|h| scene.is_discovered(h)) {
        Some(h) => {
            if type_of(h).is_some_and(|t| unary(domain, "holding", t)) {
                init.push(Atom::new("holding", [h.clone()]));
            }
        }
        None => {
            if nullary(domain, "handempty") {
                init.push(Atom::new::<&str>("handempty", []));
            }
        }
    }
    if scene.agent.sitting && nullary(domain, "issitting") {
        init.push(Atom::new::<&str>("issitting", []));
    }
    Problem::checked(domain, "scene", objects, init, goal.clone()).map_err(ToProblemError::InvalidGoal)
}
