//! Task suites: layouts plus tasks over them, loaded from JSON.
//!
//! ```json
//! {
//!   "id": "simple",
//!   "max_steps": 50,
//!   "layouts": {"kitchen-1": { <scene fixture>, "shuffle": ["apple-1", "mug-1"] }},
//!   "tasks": [{
//!     "id": "simple-01",
//!     "goal": "put an apple in the fridge",
//!     "action_set": "alfworld-style",
//!     "layout": "kitchen-1",
//!     "success": "(and (in apple-1 fridge-1))",
//!     "relevant": ["apple-1", "fridge-1"]
//!   }]
//! }
//! ```
//!
//! Entity static predicates default to the class table; fixture-listed ones
//! are added on top. `shuffle` names items whose containers are permuted by
//! the reset seed.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ActionSet;
use crate::pddl::{parse_goal_lenient, Goal};
use crate::world::{FixtureError, SceneFixture};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("suite is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("task `{task}`: {message}")]
    BadTask { task: String, message: String },
    #[error("layout `{layout}`: {source}")]
    BadLayout { layout: String, source: FixtureError },
}

/// A scripted person the robot can talk to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub human: String,
    /// Class of the object the person wants to be handed.
    pub wants: String,
    /// Entity the person hands over in return, if any.
    #[serde(default)]
    pub gives: Option<String>,
    /// Reply while the wish is unmet.
    pub demand: String,
    /// Reply when the wish is met.
    pub thanks: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layout {
    #[serde(flatten)]
    pub scene: SceneFixture,
    #[serde(default)]
    pub shuffle: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    /// Natural-language instruction given to the agent.
    pub goal: String,
    pub action_set: ActionSet,
    pub layout: String,
    /// Success condition over the ground truth, as a PDDL conjunction.
    pub success: String,
    /// Step limit; 0 in the file means the suite default.
    #[serde(default)]
    pub max_steps: usize,
    /// Entities a competent agent would need to touch.
    #[serde(default)]
    pub relevant: Vec<String>,
    #[serde(default)]
    pub dialogue: Option<Dialogue>,
    #[serde(skip)]
    success_goal: Goal,
}

impl TaskSpec {
    pub fn success_goal(&self) -> &Goal {
        &self.success_goal
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Suite {
    pub id: String,
    pub max_steps: usize,
    pub layouts: BTreeMap<String, Layout>,
    pub tasks: Vec<TaskSpec>,
}

impl Suite {
    pub fn from_json(text: &str) -> Result<Suite, SuiteError> {
        let mut suite: Suite = serde_json::from_str(text)?;
        for (name, layout) in &suite.layouts {
            layout
                .scene
                .clone()
                .into_scene()
                .map_err(|source| SuiteError::BadLayout { layout: name.clone(), source })?;
        }
        let mut seen = std::collections::BTreeSet::new();
        for task in &mut suite.tasks {
            let bad = |message: String| SuiteError::BadTask { task: task.id.clone(), message };
            if !seen.insert(task.id.clone()) {
                return Err(bad("duplicate task id".into()));
            }
            let Some(layout) = suite.layouts.get(&task.layout) else {
                return Err(bad(format!("unknown layout `{}`", task.layout)));
            };
            task.success_goal = parse_goal_lenient(&task.success, task.action_set.domain())
                .map_err(|e| bad(format!("bad success condition: {e}")))?;
            let known = |id: &str| layout.scene.entities.iter().any(|e| e.id == id);
            for id in &task.relevant {
                if !known(id) {
                    return Err(bad(format!("relevant entity `{id}` is not in the layout")));
                }
            }
            if let Some(d) = &task.dialogue {
                if !known(&d.human) || d.gives.as_deref().is_some_and(|g| !known(g)) {
                    return Err(bad("dialogue names an entity missing from the layout".into()));
                }
            }
            if task.max_steps == 0 {
                task.max_steps = suite.max_steps;
            }
        }
        Ok(suite)
    }

    pub fn task(&self, id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn layout_of(&self, task: &TaskSpec) -> &Layout {
        &self.layouts[&task.layout]
    }
}

const SIMPLE_JSON: &str = include_str!("../../assets/suites/simple.json");
const COMPLEX_JSON: &str = include_str!("../../assets/suites/complex.json");
const ROBOT_JSON: &str = include_str!("../../assets/suites/robot.json");

/// The suites shipped with the crate: `simple`, `complex` and `robot`.
pub fn bundled_suite(name: &str) -> Result<&'static Suite, SuiteError> {
    static SUITES: OnceLock<Vec<Suite>> = OnceLock::new();
    let all = SUITES.get_or_init(|| {
        [SIMPLE_JSON, COMPLEX_JSON, ROBOT_JSON]
            .iter()
            .map(|t| Suite::from_json(t).expect("bundled suite is valid"))
            .collect()
    });
    all.iter().find(|s| s.id == name).ok_or_else(|| SuiteError::UnknownSuite(name.to_string()))
}
