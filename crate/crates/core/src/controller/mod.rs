//! The planning loop. Each iteration (1) makes sure a symbolic goal is
//! available, (2) plans the whole task from the belief and executes the
//! plan, (3) on failure asks the language model for the next action and
//! (4) verifies that action's preconditions, executing a repair plan first
//! when they do not hold. Ablation modes switch phases off.

mod verify;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use verify::{plan_for, precondition_verify, PlanFailure, Verdict, MAX_PV_BINDINGS};

use crate::llm::{
    generate_goal, react_next_action, Backend, CompletionUsage, EpisodeInfo, HistoryEntry, LlmError, ParsedAction, Session,
    DEFAULT_RETRIES,
};
use crate::pddl::{serialize_goal, Goal, TypedName};
use crate::search::SearchConfig;
use crate::sim::{action_catalog, SimError, SimState, Suite, TaskSpec};
use crate::world::{describe, entity_type, Observation, SceneGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "react")]
    ReactOnly,
    #[serde(rename = "react-pv")]
    ReactPV,
    #[serde(rename = "sclplan")]
    SCLPlan,
    #[serde(rename = "symbolic")]
    SymbolicOnly,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::ReactOnly, Mode::ReactPV, Mode::SCLPlan, Mode::SymbolicOnly];

    pub fn name(self) -> &'static str {
        match self {
            Mode::ReactOnly => "react",
            Mode::ReactPV => "react-pv",
            Mode::SCLPlan => "sclplan",
            Mode::SymbolicOnly => "symbolic",
        }
    }

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Mode::ReactOnly => "ReAct",
            Mode::ReactPV => "ReAct + PV",
            Mode::SCLPlan => "SCLPlan",
            Mode::SymbolicOnly => "Symbolic Planner Only",
        }
    }

    fn uses_goal(self) -> bool {
        matches!(self, Mode::SCLPlan | Mode::SymbolicOnly)
    }

    fn uses_react(self) -> bool {
        self != Mode::SymbolicOnly
    }

    fn uses_pv(self) -> bool {
        matches!(self, Mode::ReactPV | Mode::SCLPlan)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (react, react-pv, sclplan, symbolic)"))
    }
}

/// When the goal is asked for again.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalRefresh {
    /// Once per episode, plus retries while it is unavailable.
    Cache,
    /// Again when the goal was unusable or a plan for it did not finish the task.
    #[default]
    OnFailure,
    EveryIteration,
}

#[derive(Debug, Clone)]
pub struct Budgets {
    /// Overrides the task's step limit.
    pub max_steps: Option<usize>,
    pub max_llm_calls: usize,
    /// Goal generations per episode (each may retry internally).
    pub max_goal_rounds: usize,
    pub retries: usize,
    pub search: SearchConfig,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_steps: None,
            max_llm_calls: 60,
            max_goal_rounds: 3,
            retries: DEFAULT_RETRIES,
            // node budget only: a wall-clock limit would make runs machine-dependent
            search: SearchConfig { max_novelty_width: 2, node_budget: 20_000, time_budget: Duration::from_secs(3600) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Repeat index; part of every completion fingerprint.
    pub sample: u64,
    pub goal_refresh: GoalRefresh,
    pub budgets: Budgets,
}

impl EpisodeConfig {
    pub fn new(mode: Mode) -> Self {
        Self { mode, seed: 0, sample: 0, goal_refresh: GoalRefresh::default(), budgets: Budgets::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    ReAct,
    PV,
    GSP,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Text sent to the environment.
    pub action: String,
    pub provenance: Provenance,
    pub observation: String,
    /// Whether the environment accepted the action.
    pub success: bool,
    /// Completion usage that produced this step; zero for GSP and PV steps.
    pub usage: CompletionUsage,
    /// For model-predicted steps: whether the preconditions held when predicted.
    pub valid_on_arrival: Option<bool>,
    /// A PV repair made an invalid prediction executable and it then succeeded.
    #[serde(default)]
    pub corrected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GoalReached,
    AgentFinished,
    StepBudget,
    CallBudget,
    /// No plan and no model to fall back on.
    Idle,
}

/// One line of an episode transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    /// Logical timestamp: position in the episode's event sequence.
    pub t: usize,
    /// `goal`, `gsp`, `react`, `pv`, `finish` or `end`.
    pub phase: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    pub tokens: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub sample: u64,
    /// Decided by the environment, never by the agent.
    pub success: bool,
    pub env_steps: usize,
    pub tokens: u64,
    pub usage: CompletionUsage,
    pub llm_calls: usize,
    pub records: Vec<StepRecord>,
    pub goal_found_globally: bool,
    pub invalid_react_count: usize,
    pub invalid_corrected_count: usize,
    pub termination: Termination,
    pub transcript: Vec<TranscriptLine>,
}

impl EpisodeResult {
    pub fn count(&self, provenance: Provenance) -> usize {
        self.records.iter().filter(|r| r.provenance == provenance).count()
    }

    pub fn write_transcript(&self, out: &mut impl Write) -> std::io::Result<()> {
        for line in &self.transcript {
            serde_json::to_writer(&mut *out, line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_transcript(&self, path: &Path) -> std::io::Result<()> {
        let mut buf = Vec::new();
        self.write_transcript(&mut buf)?;
        std::fs::write(path, buf)
    }
}

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("task `{0}` is not in suite `{1}`")]
    UnknownTask(String, String),
    #[error("language model failed: {0}")]
    Llm(#[from] LlmError),
}

/// Mutable state of one episode.
struct Episode<'a> {
    task: &'a TaskSpec,
    config: &'a EpisodeConfig,
    sim: SimState,
    belief: SceneGraph,
    session: Box<dyn Session + 'a>,
    max_steps: usize,
    records: Vec<StepRecord>,
    history: Vec<HistoryEntry>,
    executed: Vec<String>,
    transcript: Vec<TranscriptLine>,
    usage: CompletionUsage,
    llm_calls: usize,
    goal: Option<Goal>,
    goal_rounds: usize,
    goal_stale: bool,
    goal_found_globally: bool,
}

enum Flow {
    Continue,
    Stop(Termination),
}

impl<'a> Episode<'a> {
    fn log(&mut self, phase: &str, tokens: u64, detail: Option<String>) {
        let t = self.transcript.len();
        self.transcript.push(TranscriptLine {
            t,
            phase: phase.into(),
            provenance: None,
            action: None,
            observation: None,
            success: None,
            tokens,
            detail,
        });
    }

    fn out_of_steps(&self) -> bool {
        self.records.len() >= self.max_steps
    }

    fn calls_left(&self) -> bool {
        self.llm_calls < self.config.budgets.max_llm_calls
    }

    fn merge(&mut self, observation: &Observation) {
        self.belief.merge_observation(observation);
    }

    /// Sends one action to the environment and records it.
    fn act(&mut self, action: &str, provenance: Provenance, usage: CompletionUsage, valid_on_arrival: Option<bool>) -> bool {
        let result = self.sim.step(action);
        let obs = result.observation;
        self.merge(&obs);
        self.history.push(HistoryEntry { action: action.to_string(), observation: obs.text.clone() });
        self.executed.push(action.to_string());
        let phase = match provenance {
            Provenance::ReAct => "react",
            Provenance::PV => "pv",
            Provenance::GSP => "gsp",
        };
        let t = self.transcript.len();
        self.transcript.push(TranscriptLine {
            t,
            phase: phase.into(),
            provenance: Some(provenance),
            action: Some(action.to_string()),
            observation: Some(obs.text.clone()),
            success: Some(obs.success),
            tokens: usage.total(),
            detail: None,
        });
        self.records.push(StepRecord {
            action: action.to_string(),
            provenance,
            observation: obs.text,
            success: obs.success,
            usage,
            valid_on_arrival,
            corrected: false,
        });
        obs.success
    }

    fn known_objects(&self) -> Vec<TypedName> {
        self.belief
            .discovered
            .iter()
            .filter_map(|id| self.belief.entity(id))
            .map(|e| TypedName::new(e.id.clone(), entity_type(e)))
            .collect()
    }

    fn needs_goal(&self) -> bool {
        if !self.config.mode.uses_goal() || self.goal_rounds >= self.max_goal_rounds() {
            return false;
        }
        if self.goal_rounds == 0 || self.goal.is_none() {
            return true;
        }
        match self.config.goal_refresh {
            GoalRefresh::Cache => false,
            GoalRefresh::OnFailure => self.goal_stale,
            GoalRefresh::EveryIteration => true,
        }
    }

    fn max_goal_rounds(&self) -> usize {
        match (self.config.mode, self.config.goal_refresh) {
            (Mode::SymbolicOnly, _) => 1,
            (_, GoalRefresh::EveryIteration) => usize::MAX,
            _ => self.config.budgets.max_goal_rounds,
        }
    }

    fn phase_goal(&mut self) -> Result<(), ControllerError> {
        let domain = self.sim.action_set().domain();
        let objects = self.known_objects();
        let out = generate_goal(self.session.as_mut(), &self.task.goal, domain, &objects, &self.executed, self.config.budgets.retries)?;
        self.goal_rounds += 1;
        self.goal_stale = false;
        self.llm_calls += out.calls;
        self.usage += out.usage;
        let detail = match (&out.goal, &out.error) {
            (Some(g), _) => serialize_goal(g),
            (None, e) => format!("unavailable: {}", e.as_deref().unwrap_or("no goal")),
        };
        self.goal = out.goal;
        self.log("goal", out.usage.total(), Some(detail));
        Ok(())
    }

    /// Plans the whole task and executes the plan. Returns true when the
    /// task is finished.
    fn phase_global(&mut self) -> bool {
        let Some(goal) = self.goal.clone() else { return false };
        let domain = self.sim.action_set().domain();
        let plan = match plan_for(&self.belief, domain, &goal, &self.config.budgets.search) {
            Ok(plan) => plan,
            Err(f) => {
                self.goal_stale |= f.blames_goal();
                return false;
            }
        };
        self.goal_found_globally = true;
        for action in plan {
            if self.out_of_steps() {
                return false;
            }
            if !self.act(&action, Provenance::GSP, CompletionUsage::default(), None) {
                return false;
            }
            if self.sim.is_success() {
                return true;
            }
        }
        // the plan reached the goal as believed, but the task is not done
        self.goal_stale = true;
        false
    }

    fn phase_react(&mut self) -> Result<Flow, ControllerError> {
        let set = self.sim.action_set();
        let domain = set.domain();
        let state = describe(&self.belief);
        let outcome = react_next_action(
            self.session.as_mut(),
            &self.task.goal,
            &state,
            &action_catalog(set),
            &self.history,
            &self.executed,
            domain,
            self.config.budgets.retries,
        )?;
        self.llm_calls += outcome.calls;
        self.usage += outcome.usage;
        let action = match outcome.action {
            Err(e) => {
                // the environment answers unusable text like any other action
                let text = e.raw_text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").trim().to_string();
                self.act(&text, Provenance::ReAct, outcome.usage, Some(false));
                return Ok(Flow::Continue);
            }
            Ok(a) if a.is_finish => {
                self.log("finish", outcome.usage.total(), None);
                return Ok(Flow::Stop(Termination::AgentFinished));
            }
            Ok(a) => a,
        };
        let verdict = precondition_verify(&action, &self.belief, domain, &self.config.budgets.search);
        let text = action.surface(domain);
        if !self.config.mode.uses_pv() {
            self.act(&text, Provenance::ReAct, outcome.usage, Some(verdict == Verdict::Valid));
            return Ok(Flow::Continue);
        }
        match verdict {
            Verdict::Valid => {
                self.act(&text, Provenance::ReAct, outcome.usage, Some(true));
            }
            Verdict::Repair(plan) => self.execute_repair(&plan, &action, outcome.usage),
            Verdict::Unsatisfiable(why) => {
                self.log("pv", 0, Some(format!("unsatisfiable: {why}")));
                self.act(&text, Provenance::ReAct, outcome.usage, Some(false));
            }
        }
        Ok(Flow::Continue)
    }

    /// Runs a repair plan, then the predicted action. A failing repair step
    /// hands control back to the next iteration.
    fn execute_repair(&mut self, plan: &[String], then: &ParsedAction, usage: CompletionUsage) {
        let domain = self.sim.action_set().domain();
        self.log("pv", 0, Some(format!("repair: {}", plan.join("; "))));
        for step in plan {
            if self.out_of_steps() || !self.act(step, Provenance::PV, CompletionUsage::default(), None) {
                return;
            }
        }
        if self.out_of_steps() {
            return;
        }
        let ok = self.act(&then.surface(domain), Provenance::ReAct, usage, Some(false));
        if let Some(last) = self.records.last_mut() {
            last.corrected = ok;
        }
    }

    fn run(&mut self) -> Result<Termination, ControllerError> {
        loop {
            if self.sim.is_success() {
                return Ok(Termination::GoalReached);
            }
            if self.out_of_steps() {
                return Ok(Termination::StepBudget);
            }
            if self.needs_goal() {
                if !self.calls_left() {
                    return Ok(Termination::CallBudget);
                }
                self.phase_goal()?;
            }
            let steps_before = self.records.len();
            if self.config.mode.uses_goal() && self.phase_global() {
                return Ok(Termination::GoalReached);
            }
            if self.sim.is_success() {
                return Ok(Termination::GoalReached);
            }
            if !self.config.mode.uses_react() {
                // re-plan after new observations; otherwise nothing will change
                if self.records.len() > steps_before && !self.goal_stale {
                    continue;
                }
                return Ok(Termination::Idle);
            }
            if self.out_of_steps() {
                return Ok(Termination::StepBudget);
            }
            if !self.calls_left() {
                return Ok(Termination::CallBudget);
            }
            if let Flow::Stop(t) = self.phase_react()? {
                return Ok(t);
            }
        }
    }
}

/// Runs one task to completion or budget.
pub fn run_episode(suite: &Suite, task_id: &str, backend: &dyn Backend, config: &EpisodeConfig) -> Result<EpisodeResult, ControllerError> {
    let task = suite.task(task_id).ok_or_else(|| ControllerError::UnknownTask(task_id.into(), suite.id.clone()))?;
    let (sim, first) = SimState::reset(suite, task_id, config.seed)?;
    let mut belief = SceneGraph::new();
    belief.merge_observation(&first);
    let info = EpisodeInfo { suite: suite.id.clone(), task_id: task_id.into(), seed: config.seed, sample: config.sample };
    let mut ep = Episode {
        task,
        config,
        sim,
        belief,
        session: backend.open(&info),
        max_steps: config.budgets.max_steps.unwrap_or(task.max_steps),
        records: Vec::new(),
        history: Vec::new(),
        executed: Vec::new(),
        transcript: Vec::new(),
        usage: CompletionUsage::default(),
        llm_calls: 0,
        goal: None,
        goal_rounds: 0,
        goal_stale: false,
        goal_found_globally: false,
    };
    let termination = ep.run()?;
    let success = ep.sim.is_success();
    ep.log("end", 0, Some(format!("{termination:?} success={success}")));
    let invalid_react_count = ep.records.iter().filter(|r| r.valid_on_arrival == Some(false)).count();
    let invalid_corrected_count = ep.records.iter().filter(|r| r.corrected).count();
    Ok(EpisodeResult {
        task_id: task_id.into(),
        mode: config.mode,
        seed: config.seed,
        sample: config.sample,
        success,
        env_steps: ep.records.len(),
        tokens: ep.usage.total(),
        usage: ep.usage,
        llm_calls: ep.llm_calls,
        goal_found_globally: ep.goal_found_globally,
        invalid_react_count,
        invalid_corrected_count,
        termination,
        records: ep.records,
        transcript: ep.transcript,
    })
}
