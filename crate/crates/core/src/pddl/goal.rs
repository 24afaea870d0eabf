//! Goal extraction from untrusted text such as model output.

use std::collections::HashMap;

use super::lexer::{read_one, Sexp};
use super::parser::{check_ground_atom, parse_conjunction};
use super::{Domain, Goal, GoalParseError, SemanticError, TypedName};

/// Top-level balanced parenthesized spans of `text`, in order.
fn balanced_spans(text: &str) -> Vec<&str> {
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            ')' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    spans.push(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    spans
}

fn head(e: &Sexp) -> Option<&str> {
    e.as_list()?.first()?.as_sym()
}

fn extract(text: &str, domain: &Domain) -> Result<Sexp, GoalParseError> {
    let parsed: Vec<Sexp> = balanced_spans(text).into_iter().filter_map(|s| read_one(s).ok()).collect();
    if let Some(e) = parsed.iter().find(|e| head(e) == Some("and")) {
        return Ok(e.clone());
    }
    let literal_shaped: Vec<&Sexp> = parsed
        .iter()
        .filter(|e| {
            let Some(items) = e.as_list() else { return false };
            match head(e) {
                Some("not") => items.len() == 2 && items[1].as_list().is_some(),
                Some(h) => !h.starts_with(':') && !h.starts_with('?') && items[1..].iter().all(|a| a.as_sym().is_some()),
                None => false,
            }
        })
        .collect();
    let known = |e: &&Sexp| {
        let atom_head = match head(e) {
            Some("not") => e.as_list().and_then(|i| head(&i[1])),
            h => h,
        };
        atom_head.is_some_and(|h| h == "=" || domain.predicate(h).is_some())
    };
    literal_shaped
        .iter()
        .find(|e| known(e))
        .or(literal_shaped.first())
        .map(|e| (*e).clone())
        .ok_or(GoalParseError::NoExpression)
}

fn parse(text: &str, domain: &Domain, objects: Option<&[TypedName]>) -> Result<Goal, GoalParseError> {
    let expr = extract(text, domain)?;
    let literals = parse_conjunction(&expr).map_err(|e| GoalParseError::Malformed(e.to_string()))?;
    let table: HashMap<&str, &str> = objects
        .unwrap_or_default()
        .iter()
        .map(|o| (o.name.as_str(), o.ty.as_str()))
        .collect();
    for lit in &literals {
        let atom = &lit.atom;
        if !atom.is_equality() {
            let schema =
                domain.predicate(&atom.predicate).ok_or_else(|| GoalParseError::UnknownPredicate(atom.predicate.clone()))?;
            if schema.arity() != atom.args.len() {
                return Err(GoalParseError::Arity {
                    predicate: atom.predicate.clone(),
                    expected: schema.arity(),
                    found: atom.args.len(),
                });
            }
        } else if atom.args.len() != 2 {
            return Err(GoalParseError::Arity { predicate: "=".into(), expected: 2, found: atom.args.len() });
        }
        if let Some(a) = atom.args.iter().find(|a| a.starts_with('?')) {
            return Err(GoalParseError::Malformed(format!("goal mentions variable `{a}`")));
        }
        if objects.is_some() {
            check_ground_atom(domain, &table, atom).map_err(|e| match e {
                SemanticError::UnknownObject(o) => GoalParseError::UnknownObject(o),
                other => GoalParseError::Malformed(other.to_string()),
            })?;
        }
    }
    let mut deduped = Vec::with_capacity(literals.len());
    for lit in literals {
        if !deduped.contains(&lit) {
            deduped.push(lit);
        }
    }
    Ok(Goal::new(deduped))
}

/// Extracts a goal from `text`: the first balanced expression starting with
/// `(and`, otherwise the first single literal. Every object must be in `objects`.
pub fn parse_goal(text: &str, domain: &Domain, objects: &[TypedName]) -> Result<Goal, GoalParseError> {
    parse(text, domain, Some(objects))
}

/// Like [`parse_goal`] but accepts objects that are not (yet) known, so that
/// a goal over undiscovered entities survives until they are found.
pub fn parse_goal_lenient(text: &str, domain: &Domain) -> Result<Goal, GoalParseError> {
    parse(text, domain, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    fn domain() -> Domain {
        parse_domain(
            "(define (domain k) (:types item recep)
               (:predicates (isclean ?x - item) (ishot ?x - item) (in ?x - item ?r - recep)))",
        )
        .unwrap()
    }

    fn objects() -> Vec<TypedName> {
        vec![TypedName::new("bowl-1", "item"), TypedName::new("cabinet-2", "recep"), TypedName::new("egg-1", "item")]
    }

    #[test]
    fn conjunction() {
        let g = parse_goal("(and (isClean bowl-1) (in bowl-1 cabinet-2))", &domain(), &objects()).unwrap();
        assert_eq!(g.literals.len(), 2);
        assert_eq!(g.literals[1].atom.args, vec!["bowl-1", "cabinet-2"]);
    }

    #[test]
    fn literal_inside_prose() {
        let g = parse_goal("The goal is: (isHot egg-1)", &domain(), &objects()).unwrap();
        assert_eq!(g.literals.len(), 1);
        assert_eq!(g.literals[0].atom.predicate, "ishot");
    }

    #[test]
    fn prefers_and_over_earlier_literal() {
        let text = "First (ishot egg-1), but really:\n```\n(and (isclean bowl-1))\n```";
        let g = parse_goal(text, &domain(), &objects()).unwrap();
        assert_eq!(g.literals[0].atom.predicate, "isclean");
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_goal("(and (isShiny bowl-1))", &domain(), &objects()).unwrap_err(),
            GoalParseError::UnknownPredicate("isshiny".into())
        );
        assert_eq!(parse_goal("no parens here", &domain(), &objects()).unwrap_err(), GoalParseError::NoExpression);
        assert_eq!(
            parse_goal("(and (ishot pan-1))", &domain(), &objects()).unwrap_err(),
            GoalParseError::UnknownObject("pan-1".into())
        );
        assert!(matches!(
            parse_goal("(in bowl-1)", &domain(), &objects()).unwrap_err(),
            GoalParseError::Arity { expected: 2, found: 1, .. }
        ));
    }

    #[test]
    fn lenient_accepts_unknown_objects() {
        let g = parse_goal_lenient("(and (in apple-1 fridge-1))", &domain()).unwrap();
        assert_eq!(g.literals.len(), 1);
    }
}
