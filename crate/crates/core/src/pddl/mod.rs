//! Typed-STRIPS PDDL: parsing, canonical serialization, grounding and plan
//! validation.
//!
//! The supported subset is `:strips`, `:typing`, `:negative-preconditions`
//! and `:equality`. Identifiers are case-insensitive and normalized to lower
//! case at parse time.
//!
//! Two non-standard action keys are accepted so that a domain file can carry
//! the natural-language side of each action alongside its logic:
//!
//! * `:description "..."` is the prompt text shown to a language model.
//! * `:syntax "take ?o from ?r"` is the surface form of the action. The
//!   variables it mentions are the action's *arguments*; any remaining
//!   parameters are *implicit* and are resolved from the current state.

mod error;
mod goal;
mod ground;
mod lexer;
mod parser;
mod serialize;
mod syntax;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

pub use error::{GoalParseError, PddlError, SemanticError};
pub use goal::{parse_goal, parse_goal_lenient};
pub use ground::{ground, ground_with, GroundAction, GroundOptions, GroundingError, StripsTask};
pub use parser::{parse_domain, parse_problem};
pub use serialize::{serialize_goal, serialize_problem};
pub use syntax::{ActionSyntax, SyntaxToken};
pub use validate::{validate_plan, PlanTrace, Violation, ViolationKind};

/// The implicit root of every type hierarchy.
pub const ROOT_TYPE: &str = "object";

/// Predicate name used for equality literals.
pub const EQUALITY: &str = "=";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    Equality,
}

impl Requirement {
    pub fn from_flag(flag: &str) -> Option<Self> {
        match flag {
            ":strips" => Some(Self::Strips),
            ":typing" => Some(Self::Typing),
            ":negative-preconditions" => Some(Self::NegativePreconditions),
            ":equality" => Some(Self::Equality),
            _ => None,
        }
    }

    pub fn flag(self) -> &'static str {
        match self {
            Self::Strips => ":strips",
            Self::Typing => ":typing",
            Self::NegativePreconditions => ":negative-preconditions",
            Self::Equality => ":equality",
        }
    }
}

/// A name with its declared type, as in `?o - item` or `apple-1 - item`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Self { name: name.into(), ty: ty.into() }
    }
}

/// A predicate applied to arguments. Arguments are variables (`?x`) inside
/// action schemas and object names everywhere else.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Self { predicate: predicate.into(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn is_equality(&self) -> bool {
        self.predicate == EQUALITY
    }

    /// Substitutes variables through `binding`; non-variables are kept.
    pub fn substitute(&self, binding: &BTreeMap<String, String>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| binding.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Self { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Self { atom, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub description: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    pub add_effects: Vec<Atom>,
    pub del_effects: Vec<Atom>,
    pub syntax: ActionSyntax,
}

impl ActionSchema {
    /// Parameters named by the surface syntax, in the order they appear there.
    pub fn arguments(&self) -> Vec<&TypedName> {
        self.syntax
            .slots()
            .filter_map(|slot| self.params.iter().find(|p| p.name == slot))
            .collect()
    }

    /// Parameters the surface syntax leaves out.
    pub fn implicit_params(&self) -> Vec<&TypedName> {
        let slots: Vec<&str> = self.syntax.slots().collect();
        self.params.iter().filter(|p| !slots.contains(&p.name.as_str())).collect()
    }

    pub fn param(&self, name: &str) -> Option<&TypedName> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Renders the surface form for explicit argument values.
    pub fn render(&self, arguments: &[String]) -> String {
        self.syntax.render(arguments)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<Requirement>,
    /// child type -> parent type; every declared type except the root appears as a key.
    pub types: BTreeMap<String, String>,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn has_type(&self, ty: &str) -> bool {
        ty == ROOT_TYPE || self.types.contains_key(ty)
    }

    /// Reflexive-transitive subtype check.
    pub fn is_subtype(&self, child: &str, ancestor: &str) -> bool {
        if ancestor == ROOT_TYPE {
            return self.has_type(child);
        }
        let mut cur = child;
        // bounded by the number of types; the hierarchy is acyclic after parsing
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.get(cur) {
                Some(parent) => cur = parent,
                None => return false,
            }
        }
        false
    }

    pub fn types_overlap(&self, a: &str, b: &str) -> bool {
        self.is_subtype(a, b) || self.is_subtype(b, a)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Predicates that no action adds or deletes.
    pub fn static_predicates(&self) -> Vec<&str> {
        self.predicates
            .iter()
            .filter(|p| {
                !self.actions.iter().any(|a| {
                    a.add_effects.iter().chain(&a.del_effects).any(|e| e.predicate == p.name)
                })
            })
            .map(|p| p.name.as_str())
            .collect()
    }

    /// Matches free text against every action's surface syntax. Returns the
    /// action and its explicit arguments for the first match.
    pub fn match_action_text(&self, text: &str) -> Option<(&ActionSchema, Vec<String>)> {
        self.actions
            .iter()
            .find_map(|a| a.syntax.matches(text).map(|args| (a, args)))
    }
}

/// A conjunction of ground literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Goal {
    pub literals: Vec<Literal>,
}

impl Goal {
    pub fn new(literals: Vec<Literal>) -> Self {
        Self { literals }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.literals.iter().flat_map(|l| l.atom.args.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    /// Ground atoms true initially, without duplicates, in declaration order.
    pub init: Vec<Atom>,
    pub goal: Goal,
}

impl Problem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }

    /// Builds a problem and checks it against `domain`.
    pub fn checked(
        domain: &Domain,
        name: impl Into<String>,
        objects: Vec<TypedName>,
        init: Vec<Atom>,
        goal: Goal,
    ) -> Result<Self, SemanticError> {
        let mut seen = std::collections::HashSet::new();
        let init = init.into_iter().filter(|a| seen.insert(a.clone())).collect();
        let problem = Problem { name: name.into(), domain_name: domain.name.clone(), objects, init, goal };
        parser::check_problem(domain, &problem)?;
        Ok(problem)
    }
}
