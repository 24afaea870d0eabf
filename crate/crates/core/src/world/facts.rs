//! Reading and writing ground atoms directly on a scene graph.
//!
//! The mapping matches [`to_problem`](super::to_problem): `agent-at`,
//! `holding`, `handempty` and `issitting` describe the agent, `in` and `at`
//! are relations, and every other unary predicate is an entity flag.

use std::collections::BTreeMap;

use super::{entity_type, Relation, RelationKind, SceneGraph};
use crate::pddl::{ActionSchema, Atom, Domain, Literal};

fn relation_kind(predicate: &str) -> Option<RelationKind> {
    match predicate {
        "in" => Some(RelationKind::In),
        "at" => Some(RelationKind::At),
        _ => None,
    }
}

/// Whether `atom` is true in `scene`. Atoms over unknown entities are false.
pub fn fact_holds(scene: &SceneGraph, atom: &Atom) -> bool {
    let a = &atom.args;
    match (atom.predicate.as_str(), a.len()) {
        ("=", 2) => a[0] == a[1],
        ("agent-at", 1) => scene.agent.location.as_deref() == Some(a[0].as_str()),
        ("holding", 1) => scene.agent.holding.as_deref() == Some(a[0].as_str()),
        ("handempty", 0) => scene.agent.holding.is_none(),
        ("issitting", 0) => scene.agent.sitting,
        (p, 2) => match relation_kind(p) {
            Some(kind) => scene.relations.contains(&Relation::new(a[0].clone(), kind, a[1].clone())),
            None => false,
        },
        (p, 1) => scene.holds(&a[0], p),
        _ => false,
    }
}

pub fn literal_holds(scene: &SceneGraph, literal: &Literal) -> bool {
    fact_holds(scene, &literal.atom) == literal.positive
}

/// Makes `atom` true or false in `scene`. `handempty` follows from `holding`
/// and is not stored separately.
pub fn set_fact(scene: &mut SceneGraph, atom: &Atom, value: bool) {
    let a = &atom.args;
    match (atom.predicate.as_str(), a.len()) {
        ("agent-at", 1) => {
            if value {
                scene.agent.location = Some(a[0].clone());
            } else if scene.agent.location.as_deref() == Some(a[0].as_str()) {
                scene.agent.location = None;
            }
        }
        ("holding", 1) => {
            if value {
                scene.agent.holding = Some(a[0].clone());
            } else if scene.agent.holding.as_deref() == Some(a[0].as_str()) {
                scene.agent.holding = None;
            }
        }
        ("handempty", 0) => {}
        ("issitting", 0) => scene.agent.sitting = value,
        (p, 2) => {
            if let Some(kind) = relation_kind(p) {
                let r = Relation::new(a[0].clone(), kind, a[1].clone());
                if value {
                    scene.relations.insert(r);
                } else {
                    scene.relations.remove(&r);
                }
            }
        }
        (p, 1) => {
            scene.set_predicate(&a[0], p, value);
        }
        _ => {}
    }
}

/// Applies an action's effects under `binding`: deletes first, then adds.
pub fn apply_effects(scene: &mut SceneGraph, schema: &ActionSchema, binding: &BTreeMap<String, String>) {
    for atom in &schema.del_effects {
        set_fact(scene, &atom.substitute(binding), false);
    }
    for atom in &schema.add_effects {
        set_fact(scene, &atom.substitute(binding), true);
    }
}

/// Precondition literals of `schema` under `binding` that do not hold.
pub fn unmet_preconditions(
    scene: &SceneGraph,
    schema: &ActionSchema,
    binding: &BTreeMap<String, String>,
) -> Vec<Literal> {
    schema
        .precondition
        .iter()
        .map(|l| Literal { atom: l.atom.substitute(binding), positive: l.positive })
        .filter(|l| !literal_holds(scene, l))
        .collect()
}

/// Whether entity `id` may fill a parameter of type `ty`.
pub fn fits_type(domain: &Domain, scene: &SceneGraph, id: &str, ty: &str) -> bool {
    scene.entity(id).is_some_and(|e| domain.is_subtype(entity_type(e), ty))
}

/// All complete bindings of `schema` that extend the explicit `arguments`,
/// with implicit parameters drawn from the entities accepted by `pool`.
///
/// Bindings come out in preference order: implicit values related to the
/// explicit arguments (their containers), then the agent's location and held
/// object, then everything else by id.
pub fn candidate_bindings(
    domain: &Domain,
    scene: &SceneGraph,
    schema: &ActionSchema,
    arguments: &[String],
    pool: impl Fn(&str) -> bool,
) -> Vec<BTreeMap<String, String>> {
    let mut base = BTreeMap::new();
    for (p, a) in schema.arguments().iter().zip(arguments) {
        base.insert(p.name.clone(), a.clone());
    }
    let mut preferred: Vec<&str> = Vec::new();
    for a in arguments {
        preferred.extend(scene.containers_of(a));
    }
    preferred.extend(scene.agent.location.as_deref());
    preferred.extend(scene.agent.holding.as_deref());
    let mut ordered: Vec<&str> = Vec::new();
    for id in preferred.into_iter().chain(scene.entities.keys().map(String::as_str)) {
        if !ordered.contains(&id) && pool(id) {
            ordered.push(id);
        }
    }
    let mut out = vec![base];
    for p in schema.implicit_params() {
        let values: Vec<&str> = ordered.iter().copied().filter(|id| fits_type(domain, scene, id, &p.ty)).collect();
        out = out
            .into_iter()
            .flat_map(|b| {
                values.iter().map(move |v| {
                    let mut b = b.clone();
                    b.insert(p.name.clone(), v.to_string());
                    b
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Entity;

    #[test]
    fn set_then_read() {
        let mut s = SceneGraph::new();
        s.insert_entity(Entity::new("a-1", "apple").with_static(&["pickupable"]), true);
        s.insert_entity(Entity::new("t-1", "table").with_static(&["isreceptacle"]), true);
        let inside = Atom::new("in", ["a-1", "t-1"]);
        set_fact(&mut s, &inside, true);
        assert!(fact_holds(&s, &inside));
        set_fact(&mut s, &Atom::new("holding", ["a-1"]), true);
        assert!(!fact_holds(&s, &Atom::new::<&str>("handempty", [])));
        set_fact(&mut s, &Atom::new("isclean", ["a-1"]), true);
        assert!(s.holds("a-1", "isclean"));
        assert!(!fact_holds(&s, &Atom::new("isclean", ["ghost"])));
    }
}
