//! Deterministic emulation of language models of graded competence.
//!
//! The emulator replays the episode's executed actions on a private copy of
//! the text-world, so it knows the true state. Its underlying policy is an
//! expert that follows a shortest plan to the task's success condition,
//! found by breadth-first search over the world restricted to the task's
//! relevant entities. Mistakes are injected at fixed per-level rates, drawn
//! from a hash of the call's identity so that the same call always gets the
//! same answer:
//!
//! | level  | skip precondition | hallucinated id | wander | format error | early finish | bad goal |
//! |--------|------------------:|----------------:|-------:|-------------:|-------------:|---------:|
//! | strong | 0.03 | 0.01 | 0.02 | 0.01 | 0.00 | 0.02 |
//! | medium | 0.12 | 0.04 | 0.06 | 0.03 | 0.02 | 0.08 |
//! | weak   | 0.25 | 0.10 | 0.12 | 0.08 | 0.05 | 0.20 |
//!
//! * skip precondition: emit the expert's second action instead of its first;
//! * hallucinated id: emit the expert's action with an object that does not exist;
//! * wander: emit some other currently valid action;
//! * format error: reply without an `Action:` line (only on a first attempt);
//! * early finish: declare the task complete;
//! * bad goal: a goal with a syntax error, an unknown predicate or a made-up object.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::str::FromStr;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Backend, CallCounter, CallInfo, ChatTurn, Completion, CompletionUsage, EpisodeInfo, LlmError, Phase, Session};
use crate::sim::{bundled_suite, SimState, TaskSpec};

/// Largest number of states the expert explores per query.
const EXPERT_NODE_LIMIT: usize = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Weak,
    Medium,
    Strong,
}

#[derive(Debug, Clone, Copy)]
struct Rates {
    skip: f64,
    hallucinate: f64,
    wander: f64,
    format: f64,
    early_finish: f64,
    bad_goal: f64,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Weak, Level::Medium, Level::Strong];

    pub fn name(self) -> &'static str {
        match self {
            Level::Weak => "weak",
            Level::Medium => "medium",
            Level::Strong => "strong",
        }
    }

    fn rates(self) -> Rates {
        match self {
            Level::Strong => Rates { skip: 0.03, hallucinate: 0.01, wander: 0.02, format: 0.01, early_finish: 0.0, bad_goal: 0.02 },
            Level::Medium => Rates { skip: 0.12, hallucinate: 0.04, wander: 0.06, format: 0.03, early_finish: 0.02, bad_goal: 0.08 },
            Level::Weak => Rates { skip: 0.25, hallucinate: 0.10, wander: 0.12, format: 0.08, early_finish: 0.05, bad_goal: 0.20 },
        }
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Level::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| format!("unknown level `{s}` (weak, medium, strong)"))
    }
}

type PlanCache = HashMap<(String, u64), Option<Vec<String>>>;

pub struct EmulatedBackend {
    level: Level,
    /// Expert plans by (task, full state key).
    plans: Mutex<PlanCache>,
}

impl EmulatedBackend {
    pub fn new(level: Level) -> Self {
        Self { level, plans: Mutex::new(HashMap::new()) }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// Shortest action sequence from `sim` to task success, if one exists
    /// within the search limit.
    fn expert_plan(&self, task: &TaskSpec, sim: &SimState) -> Option<Vec<String>> {
        let all: BTreeSet<String> = sim.truth().entities.keys().cloned().collect();
        let root_key = (task.id.clone(), sim.state_key(&all));
        if let Some(p) = self.plans.lock().expect("plan cache").get(&root_key) {
            return p.clone();
        }
        let plan = search(task, sim);
        let mut cache = self.plans.lock().expect("plan cache");
        if let Some(steps) = &plan {
            // every state along the plan gets its suffix
            let mut cur = sim.clone();
            for (i, a) in steps.iter().enumerate() {
                let keys: BTreeSet<String> = cur.truth().entities.keys().cloned().collect();
                cache.insert((task.id.clone(), cur.state_key(&keys)), Some(steps[i..].to_vec()));
                cur.step(a);
            }
        }
        cache.insert(root_key, plan.clone());
        plan
    }
}

/// Entities the expert considers: the task's relevant ones, their
/// containers, and whatever the agent is at or holding.
fn focus(task: &TaskSpec, sim: &SimState) -> BTreeSet<String> {
    let truth = sim.truth();
    let mut keep: BTreeSet<String> = task.relevant.iter().cloned().collect();
    keep.extend(truth.agent.location.clone());
    keep.extend(truth.agent.holding.clone());
    let roots: Vec<String> = keep.iter().cloned().collect();
    for id in roots {
        keep.extend(truth.containers_of(&id).into_iter().map(str::to_string));
    }
    keep
}

fn search(task: &TaskSpec, start: &SimState) -> Option<Vec<String>> {
    if start.is_success() {
        return Some(Vec::new());
    }
    let keep = focus(task, start);
    let mut seen = BTreeSet::from([start.state_key(&keep)]);
    let mut queue: VecDeque<(SimState, Vec<String>)> = VecDeque::from([(start.clone(), Vec::new())]);
    while let Some((sim, path)) = queue.pop_front() {
        for a in sim.valid_actions(Some(&keep)) {
            let mut next = sim.clone();
            next.step(&a);
            let mut p = path.clone();
            p.push(a);
            if next.is_success() {
                return Some(p);
            }
            if seen.insert(next.state_key(&keep)) {
                if seen.len() > EXPERT_NODE_LIMIT {
                    return None;
                }
                queue.push_back((next, p));
            }
        }
    }
    None
}

/// Uniform draws keyed by the identity of a call.
fn draws(episode: &EpisodeInfo, phase: Phase, index: usize) -> ChaCha8Rng {
    // FNV-1a over the key; stable across platforms and releases
    let key = format!("{}|{}|{}|{}|{}", episode.task_id, episode.seed, episode.sample, phase.name(), index);
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Replaces one instance id (`class-N`) in `text` by a nonexistent one.
fn hallucinate(text: &str, pick: usize) -> String {
    let mut tokens: Vec<String> = Vec::new();
    for c in text.chars() {
        let sep = c.is_whitespace() || c == '(' || c == ')';
        match tokens.last_mut() {
            Some(t) if !sep && !t.ends_with(|e: char| e.is_whitespace() || e == '(' || e == ')') => t.push(c),
            _ => tokens.push(c.to_string()),
        }
    }
    let id_parts = |t: &str| t.rsplit_once('-').and_then(|(class, n)| Some((class.to_string(), n.parse::<u32>().ok()?)));
    let ids: Vec<usize> = (0..tokens.len()).filter(|&i| id_parts(&tokens[i]).is_some()).collect();
    if ids.is_empty() {
        return format!("{text} now");
    }
    let i = ids[pick % ids.len()];
    let (class, n) = id_parts(&tokens[i]).expect("checked above");
    tokens[i] = format!("{class}-{}", n + 7);
    tokens.concat()
}

fn react_reply(action: &str) -> String {
    if action == "finish" {
        return "Thought: The task looks complete.\nAction: finish".into();
    }
    format!("Thought: The next step towards the task is to {action}.\nAction: {action}")
}

struct EmulatedSession<'a> {
    backend: &'a EmulatedBackend,
    episode: EpisodeInfo,
    task: &'static TaskSpec,
    sim: SimState,
    applied: usize,
    counter: CallCounter,
}

impl Backend for EmulatedBackend {
    fn open(&self, episode: &EpisodeInfo) -> Box<dyn Session + '_> {
        EmulatedSession::open(self, episode)
    }
}

/// Session for a task the emulator does not know: every call fails.
struct UnknownTask(String);

impl Session for UnknownTask {
    fn complete(&mut self, _turns: &[ChatTurn], _call: CallInfo<'_>) -> Result<Completion, LlmError> {
        Err(LlmError::Transport(format!("emulated backend has no task `{}`", self.0)))
    }
}

impl<'a> EmulatedSession<'a> {
    fn open(backend: &'a EmulatedBackend, episode: &EpisodeInfo) -> Box<dyn Session + 'a> {
        let found = bundled_suite(&episode.suite).ok().and_then(|s| s.task(&episode.task_id).map(|t| (s, t)));
        let Some((suite, task)) = found else {
            return Box::new(UnknownTask(episode.task_id.clone()));
        };
        let Ok((sim, _)) = SimState::reset(suite, &task.id, episode.seed) else {
            return Box::new(UnknownTask(episode.task_id.clone()));
        };
        Box::new(EmulatedSession { backend, episode: episode.clone(), task, sim, applied: 0, counter: CallCounter::default() })
    }

    fn catch_up(&mut self, history: &[String]) {
        for a in &history[self.applied.min(history.len())..] {
            self.sim.step(a);
        }
        self.applied = history.len();
    }

    fn goal_reply(&self, rng: &mut ChaCha8Rng) -> String {
        let rates = self.backend.level.rates();
        let truth = self.task.success.trim().to_string();
        if rng.random::<f64>() >= rates.bad_goal {
            return truth;
        }
        match rng.random_range(0..3) {
            0 => truth.trim_end_matches(')').to_string() + ")",
            1 => {
                let first = truth.trim_start_matches("(and").trim_start().trim_start_matches('(');
                let pred = first.split_whitespace().next().unwrap_or("in");
                truth.replacen(&format!("({pred} "), "(located ", 1)
            }
            _ => hallucinate(&truth, rng.random_range(0..8)),
        }
    }

    fn react_choice(&mut self, rng: &mut ChaCha8Rng, attempt: usize) -> String {
        let rates = self.backend.level.rates();
        if self.sim.is_success() {
            return react_reply("finish");
        }
        let plan = self.backend.expert_plan(self.task, &self.sim);
        let valid = self.sim.valid_actions(None);
        let wander = |rng: &mut ChaCha8Rng, avoid: Option<&str>| {
            let options: Vec<&String> = valid.iter().filter(|v| Some(v.as_str()) != avoid).collect();
            (!options.is_empty()).then(|| options[rng.random_range(0..options.len())].clone())
        };
        let Some(plan) = plan.filter(|p| !p.is_empty()) else {
            return react_reply(&wander(rng, None).unwrap_or_else(|| "finish".into()));
        };
        let expert = plan[0].clone();
        let u: f64 = rng.random();
        let mut edge = rates.early_finish;
        if u < edge {
            return react_reply("finish");
        }
        edge += rates.format;
        if u < edge && attempt == 0 {
            return format!("I think the best thing to do now is to {expert}.");
        }
        edge += rates.hallucinate;
        if u < edge {
            return react_reply(&hallucinate(&expert, rng.random_range(0..8)));
        }
        edge += rates.skip;
        if u < edge && plan.len() >= 2 {
            return react_reply(&plan[1]);
        }
        edge += rates.wander;
        if u < edge {
            if let Some(w) = wander(rng, Some(&expert)) {
                return react_reply(&w);
            }
        }
        react_reply(&expert)
    }
}

impl Session for EmulatedSession<'_> {
    fn complete(&mut self, turns: &[ChatTurn], call: CallInfo<'_>) -> Result<Completion, LlmError> {
        if turns.is_empty() {
            return Err(LlmError::EmptyConversation);
        }
        self.catch_up(call.history);
        let fp = self.counter.next(&self.episode, call.phase);
        let mut rng = draws(&self.episode, call.phase, fp.index);
        let text = match call.phase {
            Phase::Goal => self.goal_reply(&mut rng),
            Phase::React => self.react_choice(&mut rng, call.attempt),
        };
        let usage = CompletionUsage::estimate(turns, &text);
        Ok(Completion { text, usage })
    }
}
