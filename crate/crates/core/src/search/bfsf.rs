use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;
use std::time::Instant;

use super::novelty::NoveltyTables;
use super::{
    applicable, apply, extract_plan, goal_count, initial_state, BudgetReason, Plan, SearchConfig, SolveOutcome, State,
};
use crate::pddl::StripsTask;

struct Node {
    h: usize,
    g: usize,
}

/// BFS(f) search. Deterministic for a fixed task and config as long as the
/// time budget is not hit.
pub fn solve(task: &StripsTask, config: &SearchConfig) -> SolveOutcome {
    run(task, config, None)
}

/// Like [`solve`], writing one line per expansion to `trace`:
/// `expand <node> novelty=<w> h=<h> g=<g> open=<n>`.
pub fn solve_traced(task: &StripsTask, config: &SearchConfig, trace: &mut dyn Write) -> SolveOutcome {
    run(task, config, Some(trace))
}

fn run(task: &StripsTask, config: &SearchConfig, mut trace: Option<&mut dyn Write>) -> SolveOutcome {
    config.validate();
    if task.trivially_unsolvable() {
        return SolveOutcome::Unsolvable;
    }
    let started = Instant::now();
    let init = initial_state(task);
    let h0 = goal_count(task, &init);
    if h0 == 0 {
        return SolveOutcome::Solved(Plan::empty());
    }

    let mut tables = NoveltyTables::new(task.num_atoms(), config.max_novelty_width);
    let w0 = tables.record(&init, h0, None);
    let mut states: Vec<State> = vec![init.clone()];
    let mut nodes = vec![Node { h: h0, g: 0 }];
    let mut parents: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    let mut seen: HashMap<State, usize> = HashMap::new();
    seen.insert(init, 0);
    let mut open = BinaryHeap::new();
    open.push(Reverse((w0, h0, 0usize)));

    let mut expanded = 0usize;
    while let Some(Reverse((novelty, h, id))) = open.pop() {
        if expanded >= config.node_budget {
            return SolveOutcome::Budget(BudgetReason::NodeLimit);
        }
        if expanded % 256 == 0 && started.elapsed() > config.time_budget {
            return SolveOutcome::Budget(BudgetReason::TimeLimit);
        }
        expanded += 1;
        if let Some(t) = trace.as_deref_mut() {
            let _ = writeln!(t, "expand {id} novelty={novelty} h={h} g={} open={}", nodes[id].g, open.len());
        }
        let state = states[id].clone();
        for (ai, action) in task.actions.iter().enumerate() {
            if !applicable(action, &state) {
                continue;
            }
            let child = apply(action, &state);
            let child_id = states.len();
            match seen.entry(child) {
                Entry::Occupied(_) => continue,
                Entry::Vacant(v) => {
                    states.push(v.key().clone());
                    v.insert(child_id);
                }
            }
            let child_state = &states[child_id];
            let ch = goal_count(task, child_state);
            parents.push((id, ai));
            nodes.push(Node { h: ch, g: nodes[id].g + 1 });
            if ch == 0 {
                return SolveOutcome::Solved(extract_plan(&parents, child_id));
            }
            let fresh: Vec<usize> = action.add.iter().copied().filter(|&a| !state.contains(a)).collect();
            let w = if ch >= nodes[id].h {
                tables.record(child_state, ch, Some(&fresh))
            } else {
                tables.record(child_state, ch, None)
            };
            open.push(Reverse((w, ch, child_id)));
        }
    }
    SolveOutcome::Unsolvable
}
