//! Phase 3: zero-shot ReAct next-action prediction.

use thiserror::Error;

use crate::pddl::Domain;
use crate::sim::CatalogEntry;

use super::prompts::{react_prompt, HistoryEntry};
use super::{CallInfo, ChatTurn, CompletionUsage, LlmError, Phase, Session};

const FINISH_WORDS: [&str; 4] = ["finish", "done", "stop", "task complete"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAction {
    /// Schema name; empty when `is_finish`.
    pub name: String,
    /// Explicit arguments in surface order.
    pub arguments: Vec<String>,
    pub raw_text: String,
    pub is_finish: bool,
}

impl ParsedAction {
    /// Canonical surface form under `domain`.
    pub fn surface(&self, domain: &Domain) -> String {
        match domain.action(&self.name) {
            Some(schema) if !self.is_finish => schema.render(&self.arguments),
            _ => self.raw_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("could not parse an action from the response: {reason}")]
pub struct ActionParseError {
    pub reason: String,
    /// The last response received.
    pub raw_text: String,
}

/// Result of one logical ReAct request, retries included.
#[derive(Debug)]
pub struct ReactOutcome {
    pub action: Result<ParsedAction, ActionParseError>,
    pub usage: CompletionUsage,
    pub calls: usize,
}

fn action_line(text: &str) -> Option<&str> {
    text.lines().rev().find_map(|line| {
        let l = line.trim().trim_start_matches(['*', '-', ' ']);
        let lower = l.to_ascii_lowercase();
        lower.starts_with("action:").then(|| l["action:".len()..].trim())
    })
}

/// Parses `Thought: ...\nAction: ...`. Only the structure is checked here:
/// the action must match a schema's surface form (or `name arg...`), but its
/// arguments need not exist.
pub fn parse_react_response(text: &str, domain: &Domain) -> Result<ParsedAction, String> {
    let Some(line) = action_line(text) else {
        return Err("the response has no `Action:` line".into());
    };
    let cleaned: String = line
        .trim_matches(|c: char| matches!(c, '`' | '"' | '\'' | '[' | ']' | '*' | ' '))
        .trim_end_matches('.')
        .chars()
        .map(|c| if matches!(c, '(' | ')' | ',') { ' ' } else { c })
        .collect();
    let cleaned = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    if cleaned.is_empty() {
        return Err("the `Action:` line is empty".into());
    }
    let finish = |s: &str| FINISH_WORDS.contains(&s.to_ascii_lowercase().as_str());
    if finish(&cleaned) {
        return Ok(ParsedAction { name: String::new(), arguments: Vec::new(), raw_text: line.to_string(), is_finish: true });
    }
    if let Some((schema, args)) = domain.match_action_text(&cleaned) {
        return Ok(ParsedAction { name: schema.name.clone(), arguments: args, raw_text: line.to_string(), is_finish: false });
    }
    let words: Vec<&str> = cleaned.split_whitespace().collect();
    let head = words[0].to_ascii_lowercase();
    for schema in &domain.actions {
        if schema.name.replace('-', "") == head.replace(['-', '_'], "") && words.len() - 1 == schema.arguments().len() {
            let arguments = words[1..].iter().map(|w| w.to_ascii_lowercase()).collect();
            return Ok(ParsedAction { name: schema.name.clone(), arguments, raw_text: line.to_string(), is_finish: false });
        }
    }
    Err(format!("`{cleaned}` is not one of the available actions"))
}

/// Asks for the next action; unparsable responses are retried up to
/// `retries` times with the complaint appended to the conversation.
#[allow(clippy::too_many_arguments)]
pub fn react_next_action(
    session: &mut dyn Session,
    task: &str,
    state: &str,
    catalog: &[CatalogEntry],
    history: &[HistoryEntry],
    executed: &[String],
    domain: &Domain,
    retries: usize,
) -> Result<ReactOutcome, LlmError> {
    let mut turns = react_prompt(task, state, catalog, history);
    let mut usage = CompletionUsage::default();
    let mut calls = 0;
    loop {
        let c = session.complete(&turns, CallInfo { phase: Phase::React, attempt: calls, history: executed })?;
        calls += 1;
        usage += c.usage;
        match parse_react_response(&c.text, domain) {
            Ok(action) => return Ok(ReactOutcome { action: Ok(action), usage, calls }),
            Err(reason) if calls > retries => {
                return Ok(ReactOutcome { action: Err(ActionParseError { reason, raw_text: c.text }), usage, calls });
            }
            Err(reason) => {
                turns.push(ChatTurn::assistant(c.text));
                turns.push(ChatTurn::user(format!(
                    "Your response could not be used: {reason}. Answer again with a `Thought:` line and an `Action:` line naming one available action."
                )));
            }
        }
    }
}
