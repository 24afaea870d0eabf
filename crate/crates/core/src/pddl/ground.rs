//! Grounding to a propositional STRIPS task with delete-relaxation pruning.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::{parser::check_problem, ActionSchema, Atom, Domain, Literal, Problem, SemanticError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("problem does not match its domain: {0}")]
    Inconsistent(#[from] SemanticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// Drop atoms and actions that are unreachable under delete relaxation.
    pub prune: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        Self { prune: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    /// Index of the schema in `Domain::actions`.
    pub schema: usize,
    pub name: String,
    /// Bound objects in schema parameter order.
    pub args: Vec<String>,
    /// Surface form with only the explicit arguments, e.g. `go to fridge-1`.
    pub surface: String,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripsTask {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    pub actions: Vec<GroundAction>,
    /// Sorted atom indices true initially.
    pub init: Vec<usize>,
    /// Goal literals over the universe as (atom index, required truth).
    pub goal: Vec<(usize, bool)>,
    /// Goal literals that can never hold: positive atoms outside the
    /// universe and false equality literals.
    pub unreachable_goal: Vec<Literal>,
}

impl StripsTask {
    pub fn atom_index(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Finds the ground action with the given schema name and full argument list.
    pub fn find_action(&self, name: &str, args: &[String]) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name && a.args == args)
    }

    /// True when some goal literal can never be satisfied.
    pub fn trivially_unsolvable(&self) -> bool {
        !self.unreachable_goal.is_empty()
    }
}

pub fn ground(domain: &Domain, problem: &Problem) -> Result<StripsTask, GroundingError> {
    ground_with(domain, problem, GroundOptions::default())
}

struct Schema<'a> {
    index: usize,
    action: &'a ActionSchema,
    /// candidate objects per parameter
    candidates: Vec<Vec<&'a str>>,
    /// literals that become fully bound once parameter `i` is bound
    checks_at: Vec<Vec<&'a Literal>>,
    var_pos: HashMap<&'a str, usize>,
}

impl<'a> Schema<'a> {
    fn new(index: usize, action: &'a ActionSchema, domain: &Domain, problem: &'a Problem) -> Self {
        let var_pos: HashMap<&str, usize> =
            action.params.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
        let candidates = action
            .params
            .iter()
            .map(|p| {
                problem
                    .objects
                    .iter()
                    .filter(|o| domain.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut checks_at: Vec<Vec<&Literal>> = vec![Vec::new(); action.params.len().max(1)];
        for lit in &action.precondition {
            let last = lit.atom.args.iter().filter_map(|a| var_pos.get(a.as_str())).max().copied().unwrap_or(0);
            checks_at[last].push(lit);
        }
        Self { index, action, candidates, checks_at, var_pos }
    }

    fn bind(&self, atom: &Atom, binding: &[&str]) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom
                .args
                .iter()
                .map(|a| self.var_pos.get(a.as_str()).map_or_else(|| a.clone(), |&i| binding[i].to_string()))
                .collect(),
        }
    }

    /// Whether the literal can hold given the relaxed reached set. Negative
    /// non-equality literals are ignored under delete relaxation.
    fn relaxed_ok(&self, lit: &Literal, binding: &[&str], reached: Option<&HashSet<Atom>>) -> bool {
        if lit.atom.is_equality() {
            let g = self.bind(&lit.atom, binding);
            return (g.args[0] == g.args[1]) == lit.positive;
        }
        match reached {
            Some(reached) if lit.positive => reached.contains(&self.bind(&lit.atom, binding)),
            _ => true,
        }
    }

    fn enumerate(&self, reached: Option<&HashSet<Atom>>, out: &mut Vec<Vec<&'a str>>) {
        if self.action.params.is_empty() {
            if self.checks_at[0].iter().all(|l| self.relaxed_ok(l, &[], reached)) {
                out.push(Vec::new());
            }
            return;
        }
        let mut binding: Vec<&str> = Vec::with_capacity(self.candidates.len());
        self.recurse(reached, &mut binding, out);
    }

    fn recurse(&self, reached: Option<&HashSet<Atom>>, binding: &mut Vec<&'a str>, out: &mut Vec<Vec<&'a str>>) {
        let depth = binding.len();
        if depth == self.candidates.len() {
            out.push(binding.clone());
            return;
        }
        for &obj in &self.candidates[depth] {
            binding.push(obj);
            if self.checks_at[depth].iter().all(|l| self.relaxed_ok(l, binding, reached)) {
                self.recurse(reached, binding, out);
            }
            binding.pop();
        }
    }
}

struct Universe {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl Universe {
    fn intern(&mut self, atom: Atom) -> usize {
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        let i = self.atoms.len();
        self.index.insert(atom.clone(), i);
        self.atoms.push(atom);
        i
    }
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

pub fn ground_with(domain: &Domain, problem: &Problem, options: GroundOptions) -> Result<StripsTask, GroundingError> {
    check_problem(domain, problem)?;
    let schemas: Vec<Schema> =
        domain.actions.iter().enumerate().map(|(i, a)| Schema::new(i, a, domain, problem)).collect();

    // (schema index, binding) in discovery order
    let mut bindings: Vec<(usize, Vec<&str>)> = Vec::new();
    if options.prune {
        let mut reached: HashSet<Atom> = problem.init.iter().cloned().collect();
        let mut seen: HashSet<(usize, Vec<&str>)> = HashSet::new();
        loop {
            let mut grew = false;
            for s in &schemas {
                let mut found = Vec::new();
                s.enumerate(Some(&reached), &mut found);
                for b in found {
                    if seen.insert((s.index, b.clone())) {
                        for e in &s.action.add_effects {
                            reached.insert(s.bind(e, &b));
                        }
                        bindings.push((s.index, b));
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
    } else {
        for s in &schemas {
            let mut found = Vec::new();
            s.enumerate(None, &mut found);
            bindings.extend(found.into_iter().map(|b| (s.index, b)));
        }
    }

    let mut universe = Universe { atoms: Vec::new(), index: HashMap::new() };
    for a in &problem.init {
        universe.intern(a.clone());
    }
    if options.prune {
        // reachable atoms are exactly init plus every add effect of a kept action
        for (si, b) in &bindings {
            let s = &schemas[*si];
            for e in &s.action.add_effects {
                universe.intern(s.bind(e, b));
            }
        }
    } else {
        for (si, b) in &bindings {
            let s = &schemas[*si];
            let atoms = s
                .action
                .precondition
                .iter()
                .filter(|l| !l.atom.is_equality())
                .map(|l| &l.atom)
                .chain(&s.action.add_effects)
                .chain(&s.action.del_effects);
            for a in atoms {
                universe.intern(s.bind(a, b));
            }
        }
    }

    let mut actions = Vec::with_capacity(bindings.len());
    for (si, b) in &bindings {
        let s = &schemas[*si];
        let mut pre_pos = Vec::new();
        let mut pre_neg = Vec::new();
        for lit in &s.action.precondition {
            if lit.atom.is_equality() {
                continue;
            }
            let atom = s.bind(&lit.atom, b);
            match (lit.positive, universe.index.get(&atom)) {
                (true, Some(&i)) => pre_pos.push(i),
                (false, Some(&i)) => pre_neg.push(i),
                // a negated atom outside the universe is never true
                (false, None) => {}
                (true, None) => unreachable!("positive precondition outside the reached universe"),
            }
        }
        let add: Vec<usize> = sorted_unique(s.action.add_effects.iter().map(|e| universe.intern(s.bind(e, b))).collect());
        let del: Vec<usize> = sorted_unique(
            s.action
                .del_effects
                .iter()
                .filter_map(|e| universe.index.get(&s.bind(e, b)).copied())
                .filter(|i| !add.contains(i))
                .collect(),
        );
        let args: Vec<String> = b.iter().map(|o| o.to_string()).collect();
        let explicit: Vec<String> =
            s.action.syntax.slots().map(|slot| args[s.var_pos[slot]].clone()).collect();
        actions.push(GroundAction {
            schema: s.index,
            name: s.action.name.clone(),
            surface: s.action.render(&explicit),
            args,
            pre_pos: sorted_unique(pre_pos),
            pre_neg: sorted_unique(pre_neg),
            add,
            del,
        });
    }

    let init = sorted_unique(problem.init.iter().map(|a| universe.index[a]).collect());
    let mut goal = Vec::new();
    let mut unreachable_goal = Vec::new();
    for lit in &problem.goal.literals {
        if lit.atom.is_equality() {
            if (lit.atom.args[0] == lit.atom.args[1]) != lit.positive {
                unreachable_goal.push(lit.clone());
            }
            continue;
        }
        match (universe.index.get(&lit.atom), lit.positive) {
            (Some(&i), p) => {
                if !goal.contains(&(i, p)) {
                    goal.push((i, p));
                }
            }
            (None, true) => unreachable_goal.push(lit.clone()),
            (None, false) => {}
        }
    }
    Ok(StripsTask { atoms: universe.atoms, index: universe.index, actions, init, goal, unreachable_goal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    const DOMAIN: &str = "(define (domain m) (:requirements :typing :equality :negative-preconditions)
        (:types recep human - thing)
        (:predicates (at ?r - recep) (seen ?r - recep))
        (:action move :parameters (?r - recep) :precondition () :effect (and (at ?r) (seen ?r)))
        (:action look :parameters (?a - recep ?b - recep) :precondition (and (at ?a) (not (= ?a ?b)))
            :effect (seen ?b)))";

    #[test]
    fn cartesian_and_type_filter() {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain m) (:objects t1 t2 - recep bob - human) (:init) (:goal (and)))",
            &d,
        )
        .unwrap();
        let t = ground(&d, &p).unwrap();
        let moves: Vec<_> = t.actions.iter().filter(|a| a.name == "move").collect();
        assert_eq!(moves.len(), 2);
        assert!(t.actions.iter().all(|a| !a.args.contains(&"bob".to_string())));
        // look needs (at ?a) reached and ?a != ?b
        let looks: Vec<_> = t.actions.iter().filter(|a| a.name == "look").collect();
        assert_eq!(looks.len(), 2);
        assert!(looks.iter().all(|a| a.args[0] != a.args[1]));
    }

    #[test]
    fn unreachable_goal_recorded() {
        let d = parse_domain(
            "(define (domain u) (:predicates (p) (q)) (:action a :parameters () :precondition (q) :effect (p)))",
        )
        .unwrap();
        let pr = parse_problem("(define (problem x) (:domain u) (:init) (:goal (and (p) (not (q)))))", &d).unwrap();
        let t = ground(&d, &pr).unwrap();
        assert!(t.actions.is_empty());
        assert_eq!(t.unreachable_goal.len(), 1);
        assert!(t.goal.is_empty());
        let unpruned = ground_with(&d, &pr, GroundOptions { prune: false }).unwrap();
        assert_eq!(unpruned.actions.len(), 1);
        assert!(unpruned.unreachable_goal.is_empty());
    }
}
