//! Language-model side of the planner: Phase-1 goal generation and Phase-3
//! zero-shot ReAct next-action prediction, over pluggable completion
//! backends.
//!
//! A [`Backend`] is shared by all episodes of a run; each episode opens its
//! own [`Session`], which owns the per-episode conversation state (call
//! counters, script cursor). Backends:
//!
//! * [`ScriptedBackend`]: replays a line-delimited script keyed by call
//!   fingerprints.
//! * [`RecorderBackend`]: proxies another backend and records every response
//!   as a script.
//! * [`LiveBackend`]: HTTP chat-completion endpoint.
//! * [`EmulatedBackend`]: a deterministic stand-in for models of graded
//!   competence, used to produce the shipped scripts.
//!
//! Token usage of the scripted and emulated backends is a whitespace-token
//! count of the prompt and the response. It is a proxy only and is not
//! comparable with tokenizer counts reported by real endpoints.

mod emulated;
mod goal;
mod live;
mod prompts;
mod react;
mod recorder;
mod scripted;

use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emulated::{EmulatedBackend, Level};
pub use goal::{generate_goal, GoalOutcome};
pub use live::{LiveBackend, LiveConfig};
pub use prompts::{goal_prompt, react_prompt, HistoryEntry, EXAMPLE_DELIMITER, GOAL_SYSTEM, REACT_SYSTEM};
pub use react::{parse_react_response, react_next_action, ActionParseError, ParsedAction, ReactOutcome};
pub use recorder::RecorderBackend;
pub use scripted::{ScriptEntry, ScriptedBackend};

/// Retries after an unparsable response, for both goals and actions.
pub const DEFAULT_RETRIES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
}

impl ChatTurn {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl CompletionUsage {
    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }

    /// Whitespace-token proxy used by the offline backends.
    pub fn estimate(turns: &[ChatTurn], response: &str) -> Self {
        let count = |s: &str| s.split_whitespace().count() as u64;
        Self {
            prompt_tokens: turns.iter().map(|t| count(&t.content)).sum(),
            completion_tokens: count(response),
        }
    }
}

impl AddAssign for CompletionUsage {
    fn add_assign(&mut self, rhs: Self) {
        self.prompt_tokens += rhs.prompt_tokens;
        self.completion_tokens += rhs.completion_tokens;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub usage: CompletionUsage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Goal,
    React,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Goal => "goal",
            Phase::React => "react",
        }
    }
}

/// Identity of one episode, as seen by a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeInfo {
    pub suite: String,
    pub task_id: String,
    /// Seed the environment was reset with.
    pub seed: u64,
    /// Response-sampling key; 0 unless the run varies responses per repeat.
    pub sample: u64,
}

/// Per-call context. `history` lists every action text sent to the
/// environment so far in this episode, whoever produced it.
#[derive(Debug, Clone, Copy)]
pub struct CallInfo<'a> {
    pub phase: Phase,
    /// Retry number within one logical request, starting at 0.
    pub attempt: usize,
    pub history: &'a [String],
}

/// Script key of a call: `task/sample/phase/index`, where `index` counts
/// calls of that phase within the episode (retries included).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint {
    pub task_id: String,
    pub sample: u64,
    pub phase: Phase,
    pub index: usize,
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.task_id, self.sample, self.phase.name(), self.index)
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("empty conversation")]
    EmptyConversation,
    #[error("script has no response for `{0}`")]
    ScriptExhausted(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("bad script: {0}")]
    BadScript(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Backend: Send + Sync {
    fn open(&self, episode: &EpisodeInfo) -> Box<dyn Session + '_>;

    /// Called once after all episodes of a run have finished.
    fn finish(&self) -> Result<(), LlmError> {
        Ok(())
    }
}

pub trait Session {
    fn complete(&mut self, turns: &[ChatTurn], call: CallInfo<'_>) -> Result<Completion, LlmError>;
}

/// Per-phase call counter shared by the session implementations.
#[derive(Debug, Default, Clone)]
pub(crate) struct CallCounter {
    goal: usize,
    react: usize,
}

impl CallCounter {
    pub(crate) fn next(&mut self, episode: &EpisodeInfo, phase: Phase) -> Fingerprint {
        let slot = match phase {
            Phase::Goal => &mut self.goal,
            Phase::React => &mut self.react,
        };
        let index = *slot;
        *slot += 1;
        Fingerprint { task_id: episode.task_id.clone(), sample: episode.sample, phase, index }
    }
}
