//! Episode state of the text-world.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::rules::run_to_fixpoint;
use super::suite::{Dialogue, Layout, Suite, TaskSpec};
use super::{class_statics, slice_pieces, text, ActionSet};
use crate::pddl::{ActionSchema, Goal};
use crate::world::facts::{apply_effects, candidate_bindings, fits_type, literal_holds, unmet_preconditions};
use crate::world::{Entity, FixtureError, Observation, Relation, RelationKind, SceneGraph, StateDelta};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("layout does not load: {0}")]
    BadLayout(#[from] FixtureError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionResult {
    pub observation: Observation,
    /// Always true: failed actions cost a step as well.
    pub step_counted: bool,
}

/// Ground truth for one episode. The scene's `discovered` set holds the
/// entities revealed to the agent so far.
#[derive(Debug, Clone)]
pub struct SimState {
    set: ActionSet,
    task_id: String,
    success: Goal,
    truth: SceneGraph,
    dialogue: Option<Dialogue>,
    dialogue_done: bool,
    steps: usize,
    next_observation: u64,
}

/// Builds the full scene of a layout with class statics filled in and
/// containers permuted among the `shuffle` items.
pub fn build_scene(layout: &Layout, seed: u64) -> Result<SceneGraph, FixtureError> {
    let mut fixture = layout.scene.clone();
    fixture.discovered = None;
    for e in &mut fixture.entities {
        for s in class_statics(&e.class.to_lowercase()) {
            if !e.static_predicates.iter().any(|p| p == s) {
                e.static_predicates.push(s.to_string());
            }
        }
    }
    let mut scene = fixture.into_scene()?;
    scene.discovered.clear();
    let ids: Vec<String> = scene.entities.keys().cloned().collect();
    for id in ids {
        let e = &scene.entities[&id];
        if e.is("isreceptacle") && !e.is("openable") {
            scene.set_predicate(&id, "isopen", true);
        }
    }
    if !layout.shuffle.is_empty() {
        let items: Vec<String> = layout.shuffle.iter().map(|s| s.to_lowercase()).collect();
        let mut spots: Vec<String> = items.iter().filter_map(|i| scene.container_of(i).map(str::to_string)).collect();
        if spots.len() == items.len() {
            spots.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            for (item, spot) in items.iter().zip(spots) {
                scene.relations.retain(|r| !(r.kind == RelationKind::In && r.subject == *item));
                scene.relations.insert(Relation::new(item.clone(), RelationKind::In, spot));
            }
        }
    }
    Ok(scene)
}

impl SimState {
    /// Starts an episode of `task_id` from `suite`.
    pub fn reset(suite: &Suite, task_id: &str, seed: u64) -> Result<(SimState, Observation), SimError> {
        let task = suite.task(task_id).ok_or_else(|| SimError::UnknownTask(task_id.to_string()))?;
        Self::reset_task(task, suite.layout_of(task), seed)
    }

    pub fn reset_task(task: &TaskSpec, layout: &Layout, seed: u64) -> Result<(SimState, Observation), SimError> {
        let mut truth = build_scene(layout, seed)?;
        run_to_fixpoint(task.action_set.rules(), &mut truth);
        let mut sim = SimState {
            set: task.action_set,
            task_id: task.id.clone(),
            success: task.success_goal().clone(),
            truth,
            dialogue: task.dialogue.clone(),
            dialogue_done: false,
            steps: 0,
            next_observation: 0,
        };
        let top: Vec<String> = sim
            .truth
            .entities
            .keys()
            .filter(|id| sim.truth.container_of(id).is_none())
            .cloned()
            .collect();
        sim.truth.discovered.extend(top);
        sim.reveal();
        let view = sim.view();
        let seen: Vec<&str> = view
            .discovered
            .iter()
            .map(String::as_str)
            .filter(|id| Some(*id) != view.agent.location.as_deref())
            .collect();
        let mut msg = format!("You are at {}. Looking around, you see {}.", view.agent.location.as_deref().unwrap_or("nowhere"), text::list(&seen));
        if let Some(h) = &view.agent.holding {
            msg.push_str(&format!(" You are holding {h}."));
        }
        let obs = Observation {
            id: sim.next_observation,
            text: msg,
            revealed: view.entities.values().cloned().collect(),
            deltas: initial_deltas(&view),
            success: true,
        };
        sim.next_observation += 1;
        Ok((sim, obs))
    }

    pub fn action_set(&self) -> ActionSet {
        self.set
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Full ground truth.
    pub fn truth(&self) -> &SceneGraph {
        &self.truth
    }

    /// Ground truth restricted to the revealed entities: what an agent that
    /// merged every observation believes.
    pub fn view(&self) -> SceneGraph {
        self.truth.restricted_to(&self.truth.discovered)
    }

    /// Evaluates a goal against the ground truth. Literals over entities that
    /// do not exist make the goal false.
    pub fn check_goal(&self, goal: &Goal) -> bool {
        goal.literals.iter().all(|l| {
            l.atom.is_equality() || l.atom.args.iter().all(|a| self.truth.entities.contains_key(a))
        }) && goal.literals.iter().all(|l| literal_holds(&self.truth, l))
    }

    /// Whether the task's success condition holds.
    pub fn is_success(&self) -> bool {
        self.check_goal(&self.success)
    }

    /// Resolves action text to a schema and full binding without changing
    /// anything; the error is the explanation the agent would see.
    pub fn interpret(&self, action_text: &str) -> Result<(&'static ActionSchema, BTreeMap<String, String>), String> {
        let domain = self.set.domain();
        let cleaned = action_text.trim().trim_end_matches('.').trim();
        let Some((schema, args)) = domain.match_action_text(cleaned) else {
            return Err(text::UNKNOWN_ACTION.into());
        };
        if args.iter().any(|a| !self.truth.entities.contains_key(a)) {
            return Err(text::CANNOT_SEE.into());
        }
        for (p, a) in schema.arguments().iter().zip(&args) {
            if !fits_type(domain, &self.truth, a, &p.ty) {
                return Err(if self.truth.is_discovered(a) {
                    format!("Nothing happens. You cannot do that with {a}.")
                } else {
                    text::CANNOT_SEE.into()
                });
            }
        }
        let mut best: Option<Vec<crate::pddl::Literal>> = None;
        let mut chosen = None;
        for b in candidate_bindings(domain, &self.truth, schema, &args, |_| true) {
            let unmet = unmet_preconditions(&self.truth, schema, &b);
            if unmet.is_empty() {
                chosen = Some(b);
                break;
            }
            if best.as_ref().is_none_or(|u| unmet.len() < u.len()) {
                best = Some(unmet);
            }
        }
        let Some(binding) = chosen else {
            return Err(match best {
                Some(unmet) => text::failure(schema, &unmet[0], &self.truth),
                None => text::NOT_POSSIBLE.into(),
            });
        };
        if args.iter().any(|a| !self.truth.is_discovered(a)) {
            return Err(text::CANNOT_SEE.into());
        }
        Ok((schema, binding))
    }

    /// Applies only the schema effects of an accepted action: no implicit
    /// rules, no dialogue, no reveal and no step count.
    pub fn execute_explicit(&mut self, action_text: &str) -> Result<(&'static ActionSchema, BTreeMap<String, String>), String> {
        let (schema, binding) = self.interpret(action_text)?;
        apply_effects(&mut self.truth, schema, &binding);
        Ok((schema, binding))
    }

    /// Surface forms of every action the world would accept right now whose
    /// explicit arguments are revealed entities (restricted to `among` when
    /// given), in catalog order.
    pub fn valid_actions(&self, among: Option<&BTreeSet<String>>) -> Vec<String> {
        let domain = self.set.domain();
        let pool: Vec<&str> = self
            .truth
            .discovered
            .iter()
            .filter(|id| among.is_none_or(|k| k.contains(*id)))
            .map(String::as_str)
            .collect();
        let mut out = Vec::new();
        for schema in &domain.actions {
            let slots: Vec<Vec<String>> = schema
                .arguments()
                .iter()
                .map(|p| pool.iter().filter(|id| fits_type(domain, &self.truth, id, &p.ty)).map(|s| s.to_string()).collect())
                .collect();
            let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
            for options in &slots {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| options.iter().map(move |o| [t.clone(), vec![o.clone()]].concat()))
                    .collect();
            }
            for args in tuples {
                let text = schema.render(&args);
                if self.interpret(&text).is_ok() {
                    out.push(text);
                }
            }
        }
        out
    }

    /// Executes one action and reports what the agent observes.
    pub fn step(&mut self, action_text: &str) -> ActionResult {
        self.steps += 1;
        let before = self.view();
        let (success, message) = match self.execute_explicit(action_text) {
            Err(why) => (false, why),
            Ok((schema, binding)) => {
                let mut extra = Vec::new();
                match schema.name.as_str() {
                    "sliceobject" => self.make_slices(&binding["?o"]),
                    "speaktohuman" => extra.push(self.converse(&binding["?h"])),
                    _ => {}
                }
                let fired = run_to_fixpoint(self.set.rules(), &mut self.truth);
                self.reveal();
                let mut msg = text::success(schema, &binding, &self.truth);
                msg.extend(extra.into_iter().map(|e| format!(" {e}")));
                let mut noted = BTreeSet::new();
                for (id, pred, value) in fired {
                    if value && self.truth.is_discovered(&id) && noted.insert((id.clone(), pred)) {
                        if let Some(word) = text::flag_word(pred) {
                            msg.push_str(&format!(" {id} is now {word}."));
                        }
                    }
                }
                (true, msg)
            }
        };
        let after = self.view();
        let observation = Observation {
            id: self.next_observation,
            text: message,
            revealed: after.entities.values().filter(|e| !before.entities.contains_key(&e.id)).cloned().collect(),
            deltas: diff(&before, &after),
            success,
        };
        self.next_observation += 1;
        ActionResult { observation, step_counted: true }
    }

    fn reveal(&mut self) {
        let mut stack: Vec<String> = Vec::new();
        stack.extend(self.truth.agent.location.clone());
        stack.extend(self.truth.agent.holding.clone());
        let mut seen = BTreeSet::new();
        while let Some(x) = stack.pop() {
            if !seen.insert(x.clone()) {
                continue;
            }
            self.truth.discovered.insert(x.clone());
            let Some(e) = self.truth.entity(&x) else { continue };
            if e.is("ishuman") || !e.is("isopen") {
                continue;
            }
            stack.extend(self.truth.contents_of(&x).into_iter().map(str::to_string));
        }
    }

    fn make_slices(&mut self, id: &str) {
        let Some(original) = self.truth.entity(id).cloned() else { return };
        let container = self.truth.container_of(id).map(str::to_string);
        let class = format!("{}slice", original.class);
        let statics: Vec<&str> = class_statics(&class);
        for k in 2..=slice_pieces(&original.class) {
            let mut piece = Entity::new(format!("{id}-slice-{k}"), class.clone()).with_static(&statics);
            piece.dynamic_predicates = original.dynamic_predicates.clone();
            piece.dynamic_predicates.insert("issliced".into());
            let pid = piece.id.clone();
            let visible = self.truth.is_discovered(id);
            self.truth.insert_entity(piece, visible);
            if let Some(c) = &container {
                self.truth.relations.insert(Relation::new(pid, RelationKind::In, c.clone()));
            }
        }
    }

    fn converse(&mut self, human: &str) -> String {
        let Some(d) = self.dialogue.clone().filter(|d| d.human == human) else {
            return format!("{human} smiles but says nothing.");
        };
        if self.dialogue_done {
            return format!("{human} says: \"Thanks again!\"");
        }
        let held = self.truth.agent.holding.clone();
        let wanted = held.as_ref().filter(|h| self.truth.entity(h).is_some_and(|e| e.class == d.wants));
        match wanted {
            Some(item) => {
                let item = item.clone();
                self.truth.agent.holding = None;
                self.truth.relations.insert(Relation::new(item, RelationKind::In, human.to_string()));
                if let Some(g) = &d.gives {
                    self.truth.relations.retain(|r| !(r.kind == RelationKind::In && r.subject == *g));
                    self.truth.agent.holding = Some(g.clone());
                }
                self.dialogue_done = true;
                format!("{human} says: \"{}\"", d.thanks)
            }
            None => format!("{human} says: \"{}\"", d.demand),
        }
    }

    /// Hash of the ground truth restricted to `keep` (plus what the agent
    /// has revealed among them). Used to recognise repeated situations.
    pub fn state_key(&self, keep: &BTreeSet<String>) -> u64 {
        let view = self.truth.restricted_to(keep);
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for e in view.entities.values() {
            e.id.hash(&mut h);
            e.dynamic_predicates.hash(&mut h);
        }
        view.relations.hash(&mut h);
        self.truth.agent.location.hash(&mut h);
        self.truth.agent.holding.hash(&mut h);
        self.truth.agent.sitting.hash(&mut h);
        view.discovered.hash(&mut h);
        self.dialogue_done.hash(&mut h);
        h.finish()
    }
}

fn initial_deltas(view: &SceneGraph) -> Vec<StateDelta> {
    let mut out: Vec<StateDelta> = view.relations.iter().cloned().map(StateDelta::AddRelation).collect();
    out.push(StateDelta::AgentLocation(view.agent.location.clone()));
    out.push(StateDelta::AgentHolding(view.agent.holding.clone()));
    out.push(StateDelta::AgentSitting(view.agent.sitting));
    out
}

/// Deltas turning `before` into `after`, given that entities new in `after`
/// arrive separately as revealed entities.
fn diff(before: &SceneGraph, after: &SceneGraph) -> Vec<StateDelta> {
    let mut out = Vec::new();
    for r in before.relations.difference(&after.relations) {
        out.push(StateDelta::RemoveRelation(r.clone()));
    }
    for id in before.entities.keys() {
        if !after.entities.contains_key(id) {
            out.push(StateDelta::RemoveEntity(id.clone()));
        }
    }
    for r in after.relations.difference(&before.relations) {
        out.push(StateDelta::AddRelation(r.clone()));
    }
    for (id, b) in &before.entities {
        let Some(a) = after.entities.get(id) else { continue };
        for p in b.dynamic_predicates.symmetric_difference(&a.dynamic_predicates) {
            out.push(StateDelta::SetPredicate {
                entity: id.clone(),
                predicate: p.clone(),
                value: a.dynamic_predicates.contains(p),
            });
        }
    }
    if before.agent.location != after.agent.location {
        out.push(StateDelta::AgentLocation(after.agent.location.clone()));
    }
    if before.agent.holding != after.agent.holding {
        out.push(StateDelta::AgentHolding(after.agent.holding.clone()));
    }
    if before.agent.sitting != after.agent.sitting {
        out.push(StateDelta::AgentSitting(after.agent.sitting));
    }
    out
}
