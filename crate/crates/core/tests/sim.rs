use std::collections::BTreeSet;

use sclplan::pddl::{parse_goal_lenient, Goal};
use sclplan::sim::{bundled_suite, ActionSet, SimState};
use sclplan::world::SceneGraph;

fn reset(suite: &str, task: &str) -> (SimState, SceneGraph) {
    let suite = bundled_suite(suite).unwrap();
    let (sim, obs) = SimState::reset(suite, task, 0).unwrap();
    let mut belief = SceneGraph::new();
    belief.merge_observation(&obs);
    (sim, belief)
}

fn step(sim: &mut SimState, belief: &mut SceneGraph, action: &str) -> (bool, String) {
    let r = sim.step(action);
    belief.merge_observation(&r.observation);
    (r.observation.success, r.observation.text)
}

fn goal(set: ActionSet, text: &str) -> Goal {
    parse_goal_lenient(text, set.domain()).unwrap()
}

#[test]
fn bundled_domains_have_expected_actions() {
    let names = |s: ActionSet| s.domain().actions.iter().map(|a| a.name.clone()).collect::<Vec<_>>();
    assert_eq!(names(ActionSet::Alfworld).len(), 9);
    assert_eq!(
        names(ActionSet::Thor),
        ["movetoobject", "openobject", "closeobject", "pickupobject", "placeobject", "sliceobject", "toggleobjecton", "toggleobjectoff"]
    );
    assert_eq!(names(ActionSet::Robot), ["sit", "stand", "movetoobject", "lookatobject", "pickupobject", "placeobject", "dropobject", "speaktohuman"]);
}

#[test]
fn bundled_suites_have_expected_sizes() {
    assert_eq!(bundled_suite("simple").unwrap().tasks.len(), 50);
    assert_eq!(bundled_suite("complex").unwrap().tasks.len(), 16);
    assert_eq!(bundled_suite("robot").unwrap().tasks.len(), 10);
    assert!(bundled_suite("nope").is_err());
}

#[test]
fn reset_is_deterministic_and_hides_contents() {
    let suite = bundled_suite("simple").unwrap();
    for task in &suite.tasks {
        let (a, oa) = SimState::reset(suite, &task.id, 7).unwrap();
        let (_, ob) = SimState::reset(suite, &task.id, 7).unwrap();
        assert_eq!(oa, ob);
        for e in a.truth().entities.values() {
            if a.truth().container_of(&e.id).is_some() {
                assert!(!oa.text.contains(&format!("{} ", e.id)) && !oa.text.contains(&format!("{},", e.id)));
                assert!(!a.truth().is_discovered(&e.id), "{} visible at reset", e.id);
            }
        }
        assert!(!a.is_success(), "{} solved at reset", task.id);
    }
}

#[test]
fn go_to_reveals_contents() {
    let (mut sim, mut belief) = reset("simple", "simple-01-pick");
    assert!(!belief.is_discovered("apple-1"));
    let (ok, text) = step(&mut sim, &mut belief, "go to countertop-1");
    assert!(ok, "{text}");
    assert!(text.contains("apple-1"));
    assert!(belief.is_discovered("apple-1"));
    assert_eq!(belief, sim.view());
}

#[test]
fn take_from_closed_fridge_fails_with_reason() {
    let (mut sim, mut belief) = reset("simple", "simple-01-pick");
    step(&mut sim, &mut belief, "go to fridge-1");
    let (ok, text) = step(&mut sim, &mut belief, "take apple-2 from fridge-1");
    assert!(!ok);
    assert!(text.contains("fridge-1 is closed"), "{text}");
    assert!(!text.contains("apple-2"));
    assert_eq!(sim.steps(), 2);
}

#[test]
fn failure_explains_missing_location() {
    let (mut sim, mut belief) = reset("simple", "simple-01-pick");
    let (ok, text) = step(&mut sim, &mut belief, "open fridge-1");
    assert!(!ok);
    assert_eq!(text, "Nothing happens. You need to be at fridge-1 to open it.");
}

#[test]
fn pick_and_place_reaches_success() {
    let (mut sim, mut belief) = reset("simple", "simple-01-pick");
    for a in ["go to countertop-1", "take apple-1 from countertop-1", "go to fridge-1", "open fridge-1", "put apple-1 in fridge-1"] {
        let (ok, text) = step(&mut sim, &mut belief, a);
        assert!(ok, "{a}: {text}");
    }
    assert!(sim.is_success());
    assert_eq!(belief, sim.view());
}

#[test]
fn stove_cooks_egg_in_pan() {
    let (mut sim, mut belief) = reset("complex", "complex-01");
    let plan = [
        "MoveToObject fridge-1",
        "OpenObject fridge-1",
        "PickupObject egg-1",
        "MoveToObject stoveburner-1",
        "MoveToObject pan-1",
        "PlaceObject egg-1 in pan-1",
        "MoveToObject stoveburner-1",
        "ToggleObjectOn stoveburner-1",
    ];
    for a in plan {
        let (ok, text) = step(&mut sim, &mut belief, a);
        assert!(ok, "{a}: {text}");
    }
    assert!(sim.truth().holds("egg-1", "ishot") && sim.truth().holds("egg-1", "iscooked"));
    assert!(sim.is_success());
    assert!(belief.holds("egg-1", "iscooked"));
}

#[test]
fn slicing_adds_declared_pieces() {
    let (mut sim, mut belief) = reset("complex", "complex-08");
    let before = sim.truth().entities.len();
    for a in ["MoveToObject drawer-1", "OpenObject drawer-1", "PickupObject knife-1", "MoveToObject diningtable-1"] {
        let (ok, text) = step(&mut sim, &mut belief, a);
        assert!(ok, "{a}: {text}");
    }
    let (ok, text) = step(&mut sim, &mut belief, "SliceObject lettuce-1");
    assert!(ok, "{text}");
    assert_eq!(sim.truth().entities.len(), before + 1);
    assert!(belief.is_discovered("lettuce-1-slice-2"));
    assert_eq!(sim.truth().container_of("lettuce-1-slice-2"), Some("diningtable-1"));
    assert!(sim.is_success());
}

#[test]
fn dialogue_trades_items() {
    let (mut sim, mut belief) = reset("robot", "robot-01");
    assert!(!belief.is_discovered("bag-1"));
    let (ok, text) = step(&mut sim, &mut belief, "MoveToObject alice-1");
    assert!(ok, "{text}");
    let (_, text) = step(&mut sim, &mut belief, "SpeakToHuman alice-1");
    assert!(text.contains("soda"), "{text}");
    for a in ["MoveToObject cart-1", "PickupObject soda-1", "MoveToObject alice-1", "SpeakToHuman alice-1"] {
        let (ok, text) = step(&mut sim, &mut belief, a);
        assert!(ok, "{a}: {text}");
    }
    assert_eq!(sim.truth().agent.holding.as_deref(), Some("bag-1"));
    assert!(belief.is_discovered("bag-1"));
    for a in ["MoveToObject diningtable-1", "PlaceObject bag-1 in diningtable-1"] {
        let (ok, text) = step(&mut sim, &mut belief, a);
        assert!(ok, "{a}: {text}");
    }
    assert!(sim.is_success());
}

#[test]
fn sitting_blocks_movement() {
    let (mut sim, mut belief) = reset("robot", "robot-02");
    assert!(step(&mut sim, &mut belief, "Sit").0);
    let (ok, text) = step(&mut sim, &mut belief, "MoveToObject shelf-1");
    assert!(!ok);
    assert!(text.contains("stand up"), "{text}");
    assert!(step(&mut sim, &mut belief, "Stand").0);
    assert!(step(&mut sim, &mut belief, "MoveToObject shelf-1").0);
}

#[test]
fn goal_over_missing_object_is_false() {
    let (sim, _) = reset("simple", "simple-01-pick");
    assert!(!sim.check_goal(&goal(ActionSet::Alfworld, "(and (not (isclean ghost-1)))")));
    assert!(sim.check_goal(&goal(ActionSet::Alfworld, "(and )")));
}

#[test]
fn garbage_text_costs_a_step() {
    let (mut sim, mut belief) = reset("simple", "simple-01-pick");
    let before = sim.view();
    let (ok, text) = step(&mut sim, &mut belief, "dance wildly");
    assert!(!ok);
    assert!(text.starts_with("Nothing happens."));
    assert_eq!(sim.steps(), 1);
    assert_eq!(sim.view(), before);
}

#[test]
fn seeds_permute_shuffled_items_only_when_listed() {
    let suite = bundled_suite("simple").unwrap();
    let mut layout = suite.layouts["kitchen-1"].clone();
    layout.shuffle = vec!["apple-1".into(), "potato-1".into(), "plate-1".into()];
    let containers = |seed| {
        let s = sclplan::sim::build_scene(&layout, seed).unwrap();
        layout.shuffle.iter().map(|i| s.container_of(i).unwrap().to_string()).collect::<Vec<_>>()
    };
    assert_eq!(containers(3), containers(3));
    let distinct: BTreeSet<Vec<String>> = (0..20).map(containers).collect();
    assert!(distinct.len() > 1);
}
