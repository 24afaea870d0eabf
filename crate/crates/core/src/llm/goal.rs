//! Phase 1: goal generation.

use crate::pddl::{parse_goal_lenient, Domain, Goal, TypedName};

use super::prompts::goal_prompt;
use super::{CallInfo, ChatTurn, CompletionUsage, LlmError, Phase, Session};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalOutcome {
    /// `None` means the goal is unavailable this iteration.
    pub goal: Option<Goal>,
    pub usage: CompletionUsage,
    pub calls: usize,
    /// Last parse complaint when `goal` is `None`.
    pub error: Option<String>,
}

/// Prompts for a goal over `domain`'s predicates and the known objects, and
/// parses the reply. A goal may name objects outside `objects`; whether they
/// exist is decided later, when the problem is built.
pub fn generate_goal(
    session: &mut dyn Session,
    task: &str,
    domain: &Domain,
    objects: &[TypedName],
    executed: &[String],
    retries: usize,
) -> Result<GoalOutcome, LlmError> {
    let mut turns = goal_prompt(task, domain, objects);
    let mut usage = CompletionUsage::default();
    let mut calls = 0;
    loop {
        let c = session.complete(&turns, CallInfo { phase: Phase::Goal, attempt: calls, history: executed })?;
        calls += 1;
        usage += c.usage;
        match parse_goal_lenient(&c.text, domain) {
            Ok(goal) => return Ok(GoalOutcome { goal: Some(goal), usage, calls, error: None }),
            Err(e) if calls > retries => {
                return Ok(GoalOutcome { goal: None, usage, calls, error: Some(e.to_string()) });
            }
            Err(e) => {
                turns.push(ChatTurn::assistant(c.text));
                turns.push(ChatTurn::user(format!("That goal could not be used: {e}. Reply with a corrected goal condition only.")));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Backend, EpisodeInfo, ScriptEntry, ScriptedBackend};
    use crate::sim::ActionSet;

    fn run(responses: &[&str]) -> GoalOutcome {
        let entries = responses
            .iter()
            .enumerate()
            .map(|(i, r)| ScriptEntry { fingerprint: format!("t/0/goal/{i}"), response: r.to_string() })
            .collect();
        let backend = ScriptedBackend::from_entries(entries).unwrap();
        let mut s = backend.open(&EpisodeInfo { suite: "x".into(), task_id: "t".into(), seed: 0, sample: 0 });
        generate_goal(s.as_mut(), "heat the egg", ActionSet::Alfworld.domain(), &[TypedName::new("egg-1", "item")], &[], 2).unwrap()
    }

    #[test]
    fn scripted_goal_parses() {
        let g = run(&["(and (isHot egg-1))"]);
        assert_eq!(g.goal.unwrap().literals.len(), 1);
        assert_eq!(g.calls, 1);
    }

    #[test]
    fn retries_until_valid() {
        let g = run(&["no idea", "(and (isShiny egg-1))", "The goal is: (ishot egg-1)"]);
        assert_eq!(g.goal.unwrap().literals.len(), 1);
        assert_eq!(g.calls, 3);
    }

    #[test]
    fn exhausted_retries_make_goal_unavailable() {
        let g = run(&["?", "??", "???"]);
        assert!(g.goal.is_none());
        assert!(g.error.is_some());
        assert_eq!(g.calls, 3);
        assert!(g.usage.total() > 0);
    }
}
