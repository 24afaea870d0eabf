//! JSON scene fixtures.
//!
//! ```json
//! {
//!   "entities": [
//!     {"id": "table-1", "class": "diningtable", "static": ["isreceptacle"]},
//!     {"id": "apple-1", "class": "apple", "static": ["pickupable"], "dynamic": ["iscold"]}
//!   ],
//!   "relations": [["apple-1", "on", "table-1"]],
//!   "agent": {"location": "table-1", "holding": null},
//!   "discovered": ["table-1", "apple-1"]
//! }
//! ```
//!
//! `on` is accepted as a synonym of `in`. An agent location of `"nowhere"`
//! (or a missing one) means the agent is not at any entity. When `discovered`
//! is omitted every entity counts as discovered.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AgentState, Entity, Relation, RelationKind, SceneGraph};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("scene fixture is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scene fixture: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntityFixture {
    pub id: String,
    pub class: String,
    #[serde(default, rename = "static")]
    pub static_predicates: Vec<String>,
    #[serde(default, rename = "dynamic")]
    pub dynamic_predicates: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AgentFixture {
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub holding: Option<String>,
    #[serde(default)]
    pub sitting: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFixture {
    pub entities: Vec<EntityFixture>,
    #[serde(default)]
    pub relations: Vec<(String, RelationKind, String)>,
    #[serde(default)]
    pub agent: AgentFixture,
    #[serde(default)]
    pub discovered: Option<Vec<String>>,
}

fn lower(s: &str) -> String {
    s.trim().to_lowercase()
}

impl SceneFixture {
    pub fn into_scene(self) -> Result<SceneGraph, FixtureError> {
        let mut scene = SceneGraph::new();
        let discovered: Option<BTreeSet<String>> =
            self.discovered.as_ref().map(|d| d.iter().map(|s| lower(s)).collect());
        for e in &self.entities {
            let id = lower(&e.id);
            if scene.entities.contains_key(&id) {
                return Err(FixtureError::Invalid(format!("duplicate entity `{id}`")));
            }
            let mut entity = Entity::new(id.clone(), lower(&e.class));
            entity.static_predicates = e.static_predicates.iter().map(|p| lower(p)).collect();
            entity.dynamic_predicates = e.dynamic_predicates.iter().map(|p| lower(p)).collect();
            let visible = discovered.as_ref().is_none_or(|d| d.contains(&id));
            scene.insert_entity(entity, visible);
        }
        if let Some(d) = &discovered {
            if let Some(unknown) = d.iter().find(|id| !scene.entities.contains_key(*id)) {
                return Err(FixtureError::Invalid(format!("discovered entity `{unknown}` is not declared")));
            }
        }
        for (s, kind, o) in &self.relations {
            scene.relations.insert(Relation::new(lower(s), *kind, lower(o)));
        }
        let location = self.agent.location.as_deref().map(lower).filter(|l| l != "nowhere" && !l.is_empty());
        scene.agent = AgentState { location, holding: self.agent.holding.as_deref().map(lower), sitting: self.agent.sitting };
        if let Some(l) = &scene.agent.location {
            if !scene.entities.contains_key(l) {
                return Err(FixtureError::Invalid(format!("agent location `{l}` is not declared")));
            }
        }
        scene.check_invariants().map_err(FixtureError::Invalid)?;
        Ok(scene)
    }

    pub fn from_scene(scene: &SceneGraph) -> Self {
        SceneFixture {
            entities: scene
                .entities
                .values()
                .map(|e| EntityFixture {
                    id: e.id.clone(),
                    class: e.class.clone(),
                    static_predicates: e.static_predicates.iter().cloned().collect(),
                    dynamic_predicates: e.dynamic_predicates.iter().cloned().collect(),
                })
                .collect(),
            relations: scene.relations.iter().map(|r| (r.subject.clone(), r.kind, r.object.clone())).collect(),
            agent: AgentFixture {
                location: scene.agent.location.clone(),
                holding: scene.agent.holding.clone(),
                sitting: scene.agent.sitting,
            },
            discovered: Some(scene.discovered.iter().cloned().collect()),
        }
    }
}

/// Parses a scene fixture from JSON text.
pub fn load_scene(text: &str) -> Result<SceneGraph, FixtureError> {
    serde_json::from_str::<SceneFixture>(text)?.into_scene()
}
