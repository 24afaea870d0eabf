//! Observation sentences. Only entities in the revealed set are ever named.

use std::collections::BTreeMap;

use crate::pddl::{ActionSchema, Literal};
use crate::world::SceneGraph;

pub const UNKNOWN_ACTION: &str = "Nothing happens. That is not an action you can take.";
pub const CANNOT_SEE: &str = "Nothing happens. You don't see that here.";
pub const NOT_POSSIBLE: &str = "Nothing happens. That is not possible right now.";

pub fn flag_word(predicate: &str) -> Option<&'static str> {
    Some(match predicate {
        "isclean" => "clean",
        "ishot" => "hot",
        "iscold" => "cold",
        "iscooked" => "cooked",
        "isfilled" => "filled",
        "issliced" => "sliced",
        "istoggled" => "on",
        "isopen" => "open",
        _ => return None,
    })
}

pub fn list(items: &[&str]) -> String {
    match items {
        [] => "nothing".into(),
        [one] => (*one).to_string(),
        _ => format!("{}, and {}", items[..items.len() - 1].join(", "), items[items.len() - 1]),
    }
}

/// What the agent sees at entity `x`.
pub fn describe_place(scene: &SceneGraph, x: &str) -> String {
    let Some(e) = scene.entity(x) else { return String::new() };
    if e.is("ishuman") {
        return format!("{x} is here.");
    }
    if e.is("openable") && !e.is("isopen") {
        return format!("{x} is closed.");
    }
    if !e.is("isreceptacle") {
        return String::new();
    }
    let contents: Vec<&str> = scene.contents_of(x).into_iter().filter(|c| scene.is_discovered(c)).collect();
    let prep = if e.is("openable") { "In" } else { "On" };
    format!("{prep} {x}, you see {}.", list(&contents))
}

fn verb(action: &str) -> &'static str {
    match action {
        "open" | "openobject" => "open it",
        "close" | "closeobject" => "close it",
        "take" | "pickupobject" => "pick that up",
        "put" | "placeobject" => "put something there",
        "clean" | "heat" | "cool" => "use it",
        "toggle" | "toggleobjecton" | "toggleobjectoff" => "switch it",
        "sliceobject" => "slice that",
        "speaktohuman" => "talk to them",
        _ => "do that",
    }
}

/// Explanation for the first unmet precondition.
pub fn failure(schema: &ActionSchema, literal: &Literal, scene: &SceneGraph) -> String {
    let args = &literal.atom.args;
    if args.iter().any(|a| !scene.is_discovered(a)) {
        return NOT_POSSIBLE.into();
    }
    let a0 = args.first().map(String::as_str).unwrap_or("");
    let a1 = args.get(1).map(String::as_str).unwrap_or("");
    let sentence = match (literal.atom.predicate.as_str(), literal.positive) {
        ("agent-at", true) => format!("You need to be at {a0} to {}.", verb(&schema.name)),
        ("=", false) if schema.name.contains("move") || schema.name == "go-to" => format!("You are already at {a1}."),
        ("=", false) => "You cannot put something into itself.".into(),
        ("holding", false) => format!("You cannot go to {a0} while holding it."),
        ("holding", true) => format!("You are not holding {a0}."),
        ("handempty", true) => match &scene.agent.holding {
            Some(h) if scene.is_discovered(h) => format!("Your hand is full; you are holding {h}."),
            _ => "Your hand is full.".into(),
        },
        ("issitting", false) => "You need to stand up first.".into(),
        ("issitting", true) => "You are already standing.".into(),
        ("isreceptacle", true) => format!("You cannot put things in or on {a0}."),
        ("openable", true) => format!("{a0} cannot be opened or closed."),
        ("isopen", true) => format!("{a0} is closed."),
        ("isopen", false) => format!("{a0} is already open."),
        ("in", true) => format!("{a0} is not in or on {a1}."),
        ("washsource", true) => format!("You cannot clean anything with {a0}."),
        ("heatsource", true) => format!("You cannot heat anything with {a0}."),
        ("coolsource", true) => format!("You cannot cool anything with {a0}."),
        ("toggleable", true) => format!("{a0} cannot be switched on or off."),
        ("istoggled", false) => format!("{a0} is already on."),
        ("istoggled", true) => format!("{a0} is already off."),
        ("sliceable", true) => format!("{a0} cannot be sliced."),
        ("issliced", false) => format!("{a0} is already sliced."),
        ("cutter", true) => "You need to hold a knife to slice.".into(),
        _ => return NOT_POSSIBLE.into(),
    };
    format!("Nothing happens. {sentence}")
}

/// Sentence for a successful explicit action.
pub fn success(schema: &ActionSchema, binding: &BTreeMap<String, String>, scene: &SceneGraph) -> String {
    let v = |name: &str| binding.get(name).map(String::as_str).unwrap_or("");
    match schema.name.as_str() {
        "go-to" | "movetoobject" => {
            let to = v("?to");
            let place = describe_place(scene, to);
            if place.is_empty() {
                format!("You arrive at {to}.")
            } else {
                format!("You arrive at {to}. {place}")
            }
        }
        "open" | "openobject" => {
            let r = v("?r");
            let contents: Vec<&str> = scene.contents_of(r).into_iter().filter(|c| scene.is_discovered(c)).collect();
            format!("You open {r}. In it, you see {}.", list(&contents))
        }
        "close" | "closeobject" => format!("You close {}.", v("?r")),
        "take" | "pickupobject" => format!("You pick up {} from {}.", v("?o"), v("?r")),
        "put" | "placeobject" => format!("You put {} in/on {}.", v("?o"), v("?r")),
        "clean" => format!("You clean {} using {}.", v("?o"), v("?r")),
        "heat" => format!("You heat {} using {}.", v("?o"), v("?r")),
        "cool" => format!("You cool {} using {}.", v("?o"), v("?r")),
        "toggle" | "toggleobjecton" => format!("You turn on {}.", v("?x")),
        "toggleobjectoff" => format!("You turn off {}.", v("?x")),
        "sliceobject" => format!("You slice {} with {}.", v("?o"), v("?k")),
        "sit" => "You sit down.".into(),
        "stand" => "You stand up.".into(),
        "lookatobject" => {
            let x = v("?x");
            let place = describe_place(scene, x);
            if place.is_empty() {
                format!("You look at {x}.")
            } else {
                format!("You look at {x}. {place}")
            }
        }
        "dropobject" => format!("You drop {}.", v("?o")),
        "speaktohuman" => format!("You speak to {}.", v("?h")),
        _ => "Done.".into(),
    }
}
