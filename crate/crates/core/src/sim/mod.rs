//! Deterministic household text-world used as ground truth.
//!
//! Explicit actions follow the bundled domain schemas exactly. On top of
//! that the world hides receptacle contents until the agent looks, applies
//! implicit appliance rules (see [`Rule`]) and runs scripted dialogue with
//! humans.

mod classes;
mod env;
mod rules;
mod suite;
mod text;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::pddl::{parse_domain, Domain};

pub use classes::{class_statics, slice_pieces};
pub use env::{build_scene, ActionResult, SimError, SimState};
pub use rules::Rule;
pub use suite::{bundled_suite, Dialogue, Layout, Suite, SuiteError, TaskSpec};

/// Which primitive set (and bundled domain) a task uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionSet {
    #[serde(rename = "alfworld-style", alias = "alfworld")]
    Alfworld,
    #[serde(rename = "thor-style", alias = "thor")]
    Thor,
    #[serde(rename = "robot-style", alias = "robot")]
    Robot,
}

const ALFWORLD_PDDL: &str = include_str!("../../assets/domains/alfworld.pddl");
const THOR_PDDL: &str = include_str!("../../assets/domains/thor.pddl");
const ROBOT_PDDL: &str = include_str!("../../assets/domains/robot.pddl");

/// One entry of the action list shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    /// Surface form with slots, e.g. `take {o} from {r}`.
    pub syntax: String,
    pub slots: Vec<String>,
}

impl ActionSet {
    pub const ALL: [ActionSet; 3] = [ActionSet::Alfworld, ActionSet::Thor, ActionSet::Robot];

    pub fn name(self) -> &'static str {
        match self {
            ActionSet::Alfworld => "alfworld-style",
            ActionSet::Thor => "thor-style",
            ActionSet::Robot => "robot-style",
        }
    }

    pub fn domain_source(self) -> &'static str {
        match self {
            ActionSet::Alfworld => ALFWORLD_PDDL,
            ActionSet::Thor => THOR_PDDL,
            ActionSet::Robot => ROBOT_PDDL,
        }
    }

    /// The bundled domain, parsed once.
    pub fn domain(self) -> &'static Domain {
        static DOMAINS: OnceLock<Vec<Domain>> = OnceLock::new();
        let all = DOMAINS.get_or_init(|| {
            ActionSet::ALL
                .iter()
                .map(|s| parse_domain(s.domain_source()).expect("bundled domain parses"))
                .collect()
        });
        &all[self as usize]
    }

    /// Implicit rules active for this action set.
    pub fn rules(self) -> &'static [Rule] {
        match self {
            ActionSet::Thor => &Rule::ALL,
            ActionSet::Alfworld | ActionSet::Robot => &[],
        }
    }
}

/// The primitives available under `set`, in domain order.
pub fn action_catalog(set: ActionSet) -> Vec<CatalogEntry> {
    set.domain()
        .actions
        .iter()
        .map(|a| CatalogEntry {
            name: a.name.clone(),
            description: a.description.clone(),
            syntax: a.syntax.template(),
            slots: a.syntax.slots().map(|s| s.trim_start_matches('?').to_string()).collect(),
        })
        .collect()
}
