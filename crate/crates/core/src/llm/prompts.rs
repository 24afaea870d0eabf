//! Prompt templates. Both prompts are zero-shot: they describe the format
//! but never show a worked task. The ReAct prompt does not depend on which
//! planner components are enabled.

use crate::pddl::{Domain, TypedName};
use crate::sim::CatalogEntry;

use super::ChatTurn;

/// Marker that would introduce a worked example. No template may contain it.
pub const EXAMPLE_DELIMITER: &str = "### Example";

pub const REACT_SYSTEM: &str = "You are a household robot that completes tasks by acting in the world one step at a time.
Think about what to do, then choose exactly one action from the list of available actions, filling in object names you have seen.
Respond in this format:
Thought: <your reasoning>
Action: <the action>
When the task is complete, respond with `Action: finish`.";

pub const GOAL_SYSTEM: &str = "You translate household tasks into formal goal conditions written in PDDL.";

const GOAL_INSTRUCTIONS: &str = "Write the goal state of the task as a single PDDL conjunction of the form (and (predicate object ...) ...), using only the predicates above.
Name objects exactly as listed; write instance names such as apple-1, never bare class names.
Reply with the goal condition only.";

/// One executed step as the model sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub action: String,
    pub observation: String,
}

pub fn react_prompt(task: &str, state: &str, catalog: &[CatalogEntry], history: &[HistoryEntry]) -> Vec<ChatTurn> {
    let mut user = format!("Task: {task}\n\nAvailable actions:\n");
    for c in catalog {
        user.push_str(&format!("- {}: {}\n", c.syntax, c.description));
    }
    user.push_str("\nWhat you know about the environment:\n");
    user.push_str(state.trim_end());
    user.push_str("\n\nHistory of actions and observations:\n");
    if history.is_empty() {
        user.push_str("(none yet)\n");
    }
    for (i, h) in history.iter().enumerate() {
        user.push_str(&format!("{}. {} -> {}\n", i + 1, h.action, h.observation));
    }
    user.push_str("\nWhat is your next action?");
    vec![ChatTurn::system(REACT_SYSTEM), ChatTurn::user(user)]
}

pub fn goal_prompt(task: &str, domain: &Domain, objects: &[TypedName]) -> Vec<ChatTurn> {
    let mut user = format!("Task: {task}\n\nPredicates:\n");
    for p in &domain.predicates {
        let params: Vec<String> = p.params.iter().map(|t| format!("{} - {}", t.name, t.ty)).collect();
        if params.is_empty() {
            user.push_str(&format!("({})\n", p.name));
        } else {
            user.push_str(&format!("({} {})\n", p.name, params.join(" ")));
        }
    }
    user.push_str("\nKnown objects:\n");
    let names: Vec<String> = objects.iter().map(|o| format!("{} - {}", o.name, o.ty)).collect();
    user.push_str(&names.join(", "));
    user.push_str("\n\n");
    user.push_str(GOAL_INSTRUCTIONS);
    vec![ChatTurn::system(GOAL_SYSTEM), ChatTurn::user(user)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{action_catalog, ActionSet};

    fn rendered() -> Vec<String> {
        let history = [HistoryEntry { action: "go to fridge-1".into(), observation: "You arrive at fridge-1.".into() }];
        let mut out = Vec::new();
        for set in ActionSet::ALL {
            for t in react_prompt("put a mug in the cabinet.", "You are at room-1.", &action_catalog(set), &history) {
                out.push(t.content);
            }
            for t in goal_prompt("put a mug in the cabinet.", set.domain(), &[TypedName::new("mug-1", "item")]) {
                out.push(t.content);
            }
        }
        out.extend([REACT_SYSTEM, GOAL_SYSTEM, GOAL_INSTRUCTIONS].map(String::from));
        out
    }

    #[test]
    fn prompts_are_zero_shot() {
        for text in rendered() {
            assert!(!text.contains(EXAMPLE_DELIMITER));
            assert!(!text.to_lowercase().contains("example"), "{text}");
            // no worked Thought/Action exchange beyond the format line
            assert_eq!(text.matches("Thought:").count(), usize::from(text == REACT_SYSTEM), "{text}");
        }
    }

    #[test]
    fn react_prompt_lists_every_action() {
        let catalog = action_catalog(ActionSet::Alfworld);
        let turns = react_prompt("t", "s", &catalog, &[]);
        for c in &catalog {
            assert!(turns[1].content.contains(&c.syntax));
            assert!(turns[1].content.contains(&c.description));
        }
        assert!(turns[1].content.contains("(none yet)"));
    }
}
