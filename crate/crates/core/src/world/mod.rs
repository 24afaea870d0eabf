//! The agent's belief state: a scene graph of discovered entities.

pub mod facts;
mod fixture;
mod problem;
mod summary;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use fixture::{load_scene, AgentFixture, EntityFixture, FixtureError, SceneFixture};
pub use problem::{entity_type, to_problem, ToProblemError};
pub use summary::describe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    /// Inside or on top of a receptacle.
    #[serde(alias = "on")]
    In,
    /// Beside another entity.
    At,
}

impl RelationKind {
    pub fn predicate(self) -> &'static str {
        match self {
            RelationKind::In => "in",
            RelationKind::At => "at",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub subject: String,
    pub kind: RelationKind,
    pub object: String,
}

impl Relation {
    pub fn new(subject: impl Into<String>, kind: RelationKind, object: impl Into<String>) -> Self {
        Self { subject: subject.into(), kind, object: object.into() }
    }

    pub fn mentions(&self, id: &str) -> bool {
        self.subject == id || self.object == id
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.kind.predicate(), self.subject, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub class: String,
    /// Properties fixed for the entity's lifetime, e.g. `isreceptacle`.
    pub static_predicates: BTreeSet<String>,
    /// Properties that actions and rules change, e.g. `isopen`.
    pub dynamic_predicates: BTreeSet<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, class: impl Into<String>) -> Self {
        Self { id: id.into(), class: class.into(), static_predicates: BTreeSet::new(), dynamic_predicates: BTreeSet::new() }
    }

    pub fn with_static(mut self, preds: &[&str]) -> Self {
        self.static_predicates.extend(preds.iter().map(|p| p.to_string()));
        self
    }

    pub fn with_dynamic(mut self, preds: &[&str]) -> Self {
        self.dynamic_predicates.extend(preds.iter().map(|p| p.to_string()));
        self
    }

    pub fn is(&self, predicate: &str) -> bool {
        self.static_predicates.contains(predicate) || self.dynamic_predicates.contains(predicate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    /// Entity the agent stands at; `None` means nowhere in particular.
    pub location: Option<String>,
    pub holding: Option<String>,
    #[serde(default)]
    pub sitting: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateDelta {
    SetPredicate { entity: String, predicate: String, value: bool },
    AddRelation(Relation),
    RemoveRelation(Relation),
    AgentLocation(Option<String>),
    AgentHolding(Option<String>),
    AgentSitting(bool),
    RemoveEntity(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Unique within an episode; merging the same id twice is a no-op.
    pub id: u64,
    pub text: String,
    /// Newly visible entities with their full current state.
    pub revealed: Vec<Entity>,
    pub deltas: Vec<StateDelta>,
    pub success: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SceneGraph {
    pub entities: BTreeMap<String, Entity>,
    pub relations: BTreeSet<Relation>,
    pub agent: AgentState,
    pub discovered: BTreeSet<String>,
    merged: BTreeSet<u64>,
}

/// Scenes compare by content; which observations were merged is ignored.
impl PartialEq for SceneGraph {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities
            && self.relations == other.relations
            && self.agent == other.agent
            && self.discovered == other.discovered
    }
}

impl Eq for SceneGraph {}

impl SceneGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_entity(&mut self, entity: Entity, discovered: bool) {
        if discovered {
            self.discovered.insert(entity.id.clone());
        }
        self.entities.insert(entity.id.clone(), entity);
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn is_discovered(&self, id: &str) -> bool {
        self.discovered.contains(id)
    }

    pub fn holds(&self, id: &str, predicate: &str) -> bool {
        self.entities.get(id).is_some_and(|e| e.is(predicate))
    }

    /// The receptacle directly containing `id`.
    pub fn container_of(&self, id: &str) -> Option<&str> {
        self.relations
            .iter()
            .find(|r| r.kind == RelationKind::In && r.subject == id)
            .map(|r| r.object.as_str())
    }

    /// Entities directly inside `id`, in id order.
    pub fn contents_of(&self, id: &str) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|r| r.kind == RelationKind::In && r.object == id)
            .map(|r| r.subject.as_str())
            .collect()
    }

    /// Chain of containers from the direct container outwards.
    pub fn containers_of(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(c) = self.container_of(cur) {
            if out.contains(&c) || out.len() > self.entities.len() {
                break;
            }
            out.push(c);
            cur = c;
        }
        out
    }

    pub fn set_predicate(&mut self, id: &str, predicate: &str, value: bool) -> bool {
        let Some(e) = self.entities.get_mut(id) else { return false };
        if value {
            e.dynamic_predicates.insert(predicate.to_string())
        } else {
            e.dynamic_predicates.remove(predicate)
        }
    }

    pub fn remove_entity(&mut self, id: &str) {
        self.entities.remove(id);
        self.discovered.remove(id);
        self.relations.retain(|r| !r.mentions(id));
        if self.agent.holding.as_deref() == Some(id) {
            self.agent.holding = None;
        }
        if self.agent.location.as_deref() == Some(id) {
            self.agent.location = None;
        }
    }

    pub fn apply_delta(&mut self, delta: &StateDelta) {
        match delta {
            StateDelta::SetPredicate { entity, predicate, value } => {
                if !self.set_predicate(entity, predicate, *value) && !self.entities.contains_key(entity) {
                    tracing::debug!(entity = %entity, "skipping delta for unknown entity");
                }
            }
            StateDelta::AddRelation(r) => {
                if self.entities.contains_key(&r.subject) && self.entities.contains_key(&r.object) {
                    self.relations.insert(r.clone());
                } else {
                    tracing::debug!(relation = %r, "skipping relation with unknown entity");
                }
            }
            StateDelta::RemoveRelation(r) => {
                self.relations.remove(r);
            }
            StateDelta::AgentLocation(l) => self.agent.location = l.clone(),
            StateDelta::AgentHolding(h) => self.agent.holding = h.clone(),
            StateDelta::AgentSitting(s) => self.agent.sitting = *s,
            StateDelta::RemoveEntity(id) => self.remove_entity(id),
        }
    }

    /// Adds revealed entities and applies deltas. Idempotent per observation id.
    pub fn merge_observation(&mut self, observation: &Observation) {
        if !self.merged.insert(observation.id) {
            return;
        }
        for e in &observation.revealed {
            self.insert_entity(e.clone(), true);
        }
        for d in &observation.deltas {
            self.apply_delta(d);
        }
    }

    /// Copy restricted to the given entity ids.
    pub fn restricted_to(&self, keep: &BTreeSet<String>) -> SceneGraph {
        let mut out = SceneGraph {
            entities: self.entities.iter().filter(|(k, _)| keep.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
            relations: self
                .relations
                .iter()
                .filter(|r| keep.contains(&r.subject) && keep.contains(&r.object))
                .cloned()
                .collect(),
            agent: self.agent.clone(),
            discovered: self.discovered.intersection(keep).cloned().collect(),
            merged: BTreeSet::new(),
        };
        if out.agent.location.as_ref().is_some_and(|l| !keep.contains(l)) {
            out.agent.location = None;
        }
        if out.agent.holding.as_ref().is_some_and(|h| !keep.contains(h)) {
            out.agent.holding = None;
        }
        out
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for r in &self.relations {
            if !self.entities.contains_key(&r.subject) || !self.entities.contains_key(&r.object) {
                return Err(format!("relation {r} references an unknown entity"));
            }
        }
        if let Some(h) = &self.agent.holding {
            match self.entities.get(h) {
                Some(e) if e.is("pickupable") => {}
                Some(_) => return Err(format!("held entity {h} is not pickupable")),
                None => return Err(format!("held entity {h} is unknown")),
            }
        }
        for d in &self.discovered {
            if !self.entities.contains_key(d) {
                return Err(format!("discovered entity {d} is unknown"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(id: u64, revealed: Vec<Entity>, deltas: Vec<StateDelta>) -> Observation {
        Observation { id, text: String::new(), revealed, deltas, success: true }
    }

    #[test]
    fn merge_reveals_and_is_idempotent() {
        let mut scene = SceneGraph::new();
        scene.insert_entity(Entity::new("table-1", "diningtable").with_static(&["isreceptacle"]), true);
        let o = obs(
            1,
            vec![Entity::new("apple-1", "apple").with_static(&["pickupable"]), Entity::new("mug-1", "mug")],
            vec![StateDelta::AddRelation(Relation::new("apple-1", RelationKind::In, "table-1"))],
        );
        scene.merge_observation(&o);
        assert_eq!(scene.discovered.len(), 3);
        let once = scene.clone();
        scene.merge_observation(&o);
        assert_eq!(scene, once);
        assert_eq!(scene.container_of("apple-1"), Some("table-1"));
    }

    #[test]
    fn unknown_entity_deltas_are_skipped() {
        let mut scene = SceneGraph::new();
        scene.merge_observation(&obs(
            0,
            vec![],
            vec![
                StateDelta::SetPredicate { entity: "ghost-1".into(), predicate: "isopen".into(), value: true },
                StateDelta::AddRelation(Relation::new("ghost-1", RelationKind::In, "ghost-2")),
            ],
        ));
        assert!(scene.entities.is_empty() && scene.relations.is_empty());
    }
}
