//! The bundled problem corpus under `assets/problems/<domain>/`.
//!
//! Files named after suite tasks are generated from the suite layouts: the
//! scene is cut down to the task's relevant entities (plus their containers
//! and the start room), fully observed, with the success condition as goal.
//! Set `SCLPLAN_BLESS=1` to rewrite them; otherwise they must match.
//! `fixture-*.pddl` files are written by hand.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sclplan::pddl::{ground, ground_with, parse_problem, serialize_problem, validate_plan, GroundOptions, Problem};
use sclplan::search::{solve, solve_oracle, SearchConfig, SolveOutcome};
use sclplan::sim::{build_scene, bundled_suite, ActionSet};
use sclplan::world::to_problem;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/problems")
}

fn set_dir(set: ActionSet) -> &'static str {
    match set {
        ActionSet::Alfworld => "alfworld",
        ActionSet::Thor => "thor",
        ActionSet::Robot => "robot",
    }
}

fn generated() -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    for name in ["simple", "complex", "robot"] {
        let suite = bundled_suite(name).unwrap();
        for task in &suite.tasks {
            let full = build_scene(suite.layout_of(task), 0).unwrap();
            let mut keep: BTreeSet<String> = task.relevant.iter().cloned().collect();
            for id in task.relevant.iter() {
                keep.extend(full.containers_of(id).into_iter().map(String::from));
            }
            keep.extend(full.agent.location.clone());
            keep.extend(full.agent.holding.clone());
            let mut scene = full.restricted_to(&keep);
            scene.discovered = scene.entities.keys().cloned().collect();
            let domain = task.action_set.domain();
            let mut problem = to_problem(&scene, domain, task.success_goal()).unwrap();
            problem.name = task.id.clone();
            let path = corpus_dir().join(set_dir(task.action_set)).join(format!("{}.pddl", task.id));
            out.insert(path, serialize_problem(&problem));
        }
    }
    out
}

fn load_corpus() -> Vec<(String, ActionSet, Problem)> {
    let mut out = Vec::new();
    for set in ActionSet::ALL {
        let dir = corpus_dir().join(set_dir(set));
        let mut files: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        for f in files {
            let text = fs::read_to_string(&f).unwrap();
            let problem = parse_problem(&text, set.domain()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
            out.push((f.file_stem().unwrap().to_string_lossy().into_owned(), set, problem));
        }
    }
    out
}

#[test]
fn generated_files_are_current() {
    let bless = std::env::var_os("SCLPLAN_BLESS").is_some();
    for (path, text) in generated() {
        if bless {
            fs::write(&path, &text).unwrap();
        } else {
            let on_disk = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
            assert_eq!(on_disk, text, "{} is stale; rerun with SCLPLAN_BLESS=1", path.display());
        }
    }
}

#[test]
fn corpus_is_large_enough() {
    assert!(load_corpus().len() >= 30);
}

#[test]
fn solver_agrees_with_oracle_and_plans_validate() {
    let start = Instant::now();
    let mut solved = 0;
    for (name, set, problem) in load_corpus() {
        let task = ground(set.domain(), &problem).unwrap();
        let outcome = solve(&task, &SearchConfig::default());
        let oracle = solve_oracle(&task).unwrap_or_else(|_| panic!("{name}: oracle budget"));
        assert_eq!(outcome.is_solved(), oracle.is_solved(), "{name}: {outcome:?} vs {oracle:?}");
        if let (SolveOutcome::Solved(plan), SolveOutcome::Solved(best)) = (&outcome, &oracle) {
            assert!(validate_plan(&task, &plan.actions).is_valid(), "{name}");
            assert!(validate_plan(&task, &best.actions).is_valid(), "{name}");
            assert!(plan.cost >= best.cost, "{name}");
            solved += 1;
        }
    }
    assert!(solved >= 30, "only {solved} solvable problems");
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn pruning_preserves_solvability() {
    for (name, set, problem) in load_corpus() {
        let pruned = ground(set.domain(), &problem).unwrap();
        let full = ground_with(set.domain(), &problem, GroundOptions { prune: false }).unwrap();
        assert!(full.actions.len() >= pruned.actions.len());
        let a = solve(&pruned, &SearchConfig::default()).is_solved();
        let b = solve_oracle(&full).unwrap().is_solved();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn corpus_round_trips() {
    for (name, set, problem) in load_corpus() {
        let again = parse_problem(&serialize_problem(&problem), set.domain()).unwrap();
        assert_eq!(again, problem, "{name}");
    }
}

#[test]
fn pick_place_fixture_has_oracle_optimal_cost() {
    let corpus = load_corpus();
    let (_, set, problem) = corpus.iter().find(|(n, _, _)| n == "fixture-pick-place").unwrap();
    let task = ground(set.domain(), problem).unwrap();
    let best = solve_oracle(&task).unwrap();
    // take, go to the fridge, open it, put
    assert_eq!(best.plan().unwrap().cost, 4);
    assert_eq!(solve(&task, &SearchConfig::default()).plan().unwrap().cost, 4);
}

#[test]
fn special_fixtures() {
    let corpus = load_corpus();
    let get = |n: &str| {
        let (_, set, p) = corpus.iter().find(|(m, _, _)| m == n).unwrap();
        ground(set.domain(), p).unwrap()
    };
    assert_eq!(solve(&get("fixture-already-done"), &SearchConfig::default()), SolveOutcome::Solved(sclplan::search::Plan::empty()));
    assert_eq!(solve(&get("fixture-empty"), &SearchConfig::default()).plan().unwrap().cost, 0);
    let unheatable = get("fixture-no-heat-source");
    assert!(unheatable.trivially_unsolvable());
    assert_eq!(solve(&unheatable, &SearchConfig::default()), SolveOutcome::Unsolvable);
}
