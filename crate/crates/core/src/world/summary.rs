//! Natural-language rendering of a scene for prompts.

use std::fmt::Write;

use super::{RelationKind, SceneGraph};

const FLAG_WORDS: &[(&str, &str)] = &[
    ("isopen", "open"),
    ("isclean", "clean"),
    ("ishot", "hot"),
    ("iscold", "cold"),
    ("iscooked", "cooked"),
    ("issliced", "sliced"),
    ("istoggled", "on"),
    ("isfilled", "filled"),
];

/// Describes the agent and every discovered entity, one entity per line.
pub fn describe(scene: &SceneGraph) -> String {
    let mut out = String::new();
    match &scene.agent.location {
        Some(l) => {
            let _ = writeln!(out, "You are at {l}.");
        }
        None => {
            let _ = writeln!(out, "You are in the middle of the room.");
        }
    }
    match &scene.agent.holding {
        Some(h) => {
            let _ = writeln!(out, "You are holding {h}.");
        }
        None => {
            let _ = writeln!(out, "Your hand is empty.");
        }
    }
    if scene.agent.sitting {
        let _ = writeln!(out, "You are sitting.");
    }
    let _ = writeln!(out, "Known objects:");
    for id in &scene.discovered {
        let Some(e) = scene.entities.get(id) else { continue };
        let mut facts: Vec<String> = Vec::new();
        if let Some(c) = scene.container_of(id) {
            facts.push(format!("in/on {c}"));
        }
        for r in scene.relations.iter().filter(|r| r.kind == RelationKind::At && r.subject == *id) {
            facts.push(format!("beside {}", r.object));
        }
        if e.is("openable") && !e.is("isopen") {
            facts.push("closed".into());
        }
        for (pred, word) in FLAG_WORDS {
            if *pred == "isopen" && !e.is("openable") {
                continue;
            }
            if e.dynamic_predicates.contains(*pred) {
                facts.push((*word).to_string());
            }
        }
        if e.is("istoggled") {
            // already listed as "on"
        } else if e.is("toggleable") {
            facts.push("off".into());
        }
        if facts.is_empty() {
            let _ = writeln!(out, "- {id}");
        } else {
            let _ = writeln!(out, "- {id} ({})", facts.join(", "));
        }
    }
    out
}
