//! Domain and problem parsing with semantic checks.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::lexer::{end_pos, read_one, Sexp};
use super::{
    ActionSchema, ActionSyntax, Atom, Domain, Goal, Literal, PddlError, PredicateSchema, Problem, Requirement,
    SemanticError, TypedName, EQUALITY, ROOT_TYPE,
};

fn err_at(e: &Sexp, message: impl Into<String>) -> PddlError {
    let p = e.pos();
    PddlError::parse(p.line, p.column, message)
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    e.as_list().ok_or_else(|| err_at(e, format!("expected {what}, found {}", e.describe())))
}

fn expect_sym<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.as_sym().ok_or_else(|| err_at(e, format!("expected {what}, found {}", e.describe())))
}

fn expect_name<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    let s = expect_sym(e, what)?;
    if s.starts_with('?') || s.starts_with(':') || s == "-" {
        return Err(err_at(e, format!("expected {what}, found `{s}`")));
    }
    Ok(s)
}

/// `(define (KIND name) ...)` -> (name, sections)
fn header<'a>(root: &'a Sexp, kind: &str) -> Result<(&'a str, &'a [Sexp]), PddlError> {
    let items = expect_list(root, "`(define ...)`")?;
    match items.first() {
        Some(Sexp::Sym(s, _)) if s == "define" => {}
        Some(e) => return Err(err_at(e, "expected `define`")),
        None => return Err(err_at(root, "expected `define`")),
    }
    let head = items.get(1).ok_or_else(|| err_at(root, format!("expected `({kind} <name>)`")))?;
    let head_items = expect_list(head, &format!("`({kind} <name>)`"))?;
    match head_items {
        [Sexp::Sym(k, _), name] if k == kind => Ok((expect_name(name, &format!("{kind} name"))?, &items[2..])),
        _ => Err(err_at(head, format!("expected `({kind} <name>)`"))),
    }
}

fn section_key<'a>(section: &'a Sexp) -> Result<(&'a str, &'a [Sexp]), PddlError> {
    let items = expect_list(section, "a section")?;
    let key = items.first().ok_or_else(|| err_at(section, "expected a section keyword"))?;
    let key = expect_sym(key, "a section keyword")?;
    if !key.starts_with(':') {
        return Err(err_at(section, format!("expected a section keyword, found `{key}`")));
    }
    Ok((key, &items[1..]))
}

/// Parses `a b - t c - u d`; untyped names default to the root type.
fn typed_list(items: &[Sexp], variables: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<&str> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        let s = expect_sym(e, if variables { "a variable" } else { "a name" })?;
        if s == "-" {
            let ty_e = items.get(i + 1).ok_or_else(|| err_at(e, "expected a type after `-`"))?;
            let ty = expect_name(ty_e, "a type name")?;
            if pending.is_empty() {
                return Err(err_at(e, "expected a name before `-`"));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
            i += 2;
            continue;
        }
        if variables != s.starts_with('?') || s.starts_with(':') {
            let what = if variables { "a variable" } else { "a name" };
            return Err(err_at(e, format!("expected {what}, found `{s}`")));
        }
        pending.push(s);
        i += 1;
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, ROOT_TYPE)));
    Ok(out)
}

fn parse_atom(e: &Sexp) -> Result<Atom, PddlError> {
    let items = expect_list(e, "an atom")?;
    let head = items.first().ok_or_else(|| err_at(e, "expected a predicate name"))?;
    let predicate = expect_sym(head, "a predicate name")?;
    if predicate == "and" || predicate == "not" || predicate.starts_with('?') || predicate.starts_with(':') {
        return Err(err_at(head, format!("expected a predicate name, found `{predicate}`")));
    }
    let args = items[1..]
        .iter()
        .map(|a| expect_sym(a, "an argument").map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom { predicate: predicate.to_string(), args })
}

pub(crate) fn parse_literal(e: &Sexp) -> Result<Literal, PddlError> {
    let items = expect_list(e, "a literal")?;
    if let Some(Sexp::Sym(s, _)) = items.first() {
        if s == "not" {
            return match &items[1..] {
                [inner] => Ok(Literal::neg(parse_atom(inner)?)),
                _ => Err(err_at(e, "expected exactly one atom inside `not`")),
            };
        }
    }
    Ok(Literal::pos(parse_atom(e)?))
}

/// A conjunction: `(and ...)` (nested `and`s are flattened), `()` or a single literal.
pub(crate) fn parse_conjunction(e: &Sexp) -> Result<Vec<Literal>, PddlError> {
    let items = expect_list(e, "a condition")?;
    match items.first() {
        None => Ok(Vec::new()),
        Some(Sexp::Sym(s, _)) if s == "and" => {
            let mut out = Vec::new();
            for item in &items[1..] {
                out.extend(parse_conjunction(item)?);
            }
            Ok(out)
        }
        Some(Sexp::Sym(s, _)) if matches!(s.as_str(), "or" | "imply" | "forall" | "exists" | "when") => {
            Err(err_at(e, format!("`{s}` is outside the supported STRIPS subset")))
        }
        _ => Ok(vec![parse_literal(e)?]),
    }
}

fn check_requirements(items: &[Sexp]) -> Result<Vec<Requirement>, PddlError> {
    let mut out = Vec::new();
    for e in items {
        let flag = expect_sym(e, "a requirement flag")?;
        let req = Requirement::from_flag(flag)
            .ok_or_else(|| PddlError::from(SemanticError::UnsupportedRequirement(flag.to_string())))?;
        if !out.contains(&req) {
            out.push(req);
        }
    }
    Ok(out)
}

fn check_types_acyclic(types: &BTreeMap<String, String>) -> Result<(), SemanticError> {
    for start in types.keys() {
        let mut seen = HashSet::new();
        let mut cur = start.as_str();
        while let Some(parent) = types.get(cur) {
            if !seen.insert(cur) {
                return Err(SemanticError::CyclicTypes(start.clone()));
            }
            cur = parent;
        }
    }
    Ok(())
}

fn check_schema_atom(
    domain_preds: &[PredicateSchema],
    types: &Domain,
    action: &str,
    params: &[TypedName],
    atom: &Atom,
) -> Result<(), SemanticError> {
    let expected_types: Vec<&str> = if atom.is_equality() {
        vec![ROOT_TYPE, ROOT_TYPE]
    } else {
        let schema = domain_preds
            .iter()
            .find(|p| p.name == atom.predicate)
            .ok_or_else(|| SemanticError::UndeclaredPredicate(atom.predicate.clone()))?;
        schema.params.iter().map(|p| p.ty.as_str()).collect()
    };
    if expected_types.len() != atom.args.len() {
        return Err(SemanticError::ArityMismatch {
            predicate: atom.predicate.clone(),
            expected: expected_types.len(),
            found: atom.args.len(),
        });
    }
    for (arg, expected) in atom.args.iter().zip(expected_types) {
        if !arg.starts_with('?') {
            return Err(SemanticError::UnknownObject(arg.clone()));
        }
        let param = params.iter().find(|p| &p.name == arg).ok_or_else(|| SemanticError::UnboundVariable {
            action: action.to_string(),
            variable: arg.clone(),
        })?;
        if !types.types_overlap(&param.ty, expected) {
            return Err(SemanticError::TypeMismatch {
                predicate: atom.predicate.clone(),
                object: arg.clone(),
                expected: expected.to_string(),
                found: param.ty.clone(),
            });
        }
    }
    Ok(())
}

fn parse_action(items: &[Sexp], whole: &Sexp, domain: &Domain) -> Result<ActionSchema, PddlError> {
    let name_e = items.first().ok_or_else(|| err_at(whole, "expected an action name"))?;
    let name = expect_name(name_e, "an action name")?.to_string();
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut effects = Vec::new();
    let mut description = String::new();
    let mut syntax_text: Option<(String, &Sexp)> = None;
    let mut rest = &items[1..];
    while let [key_e, value, tail @ ..] = rest {
        let key = expect_sym(key_e, "an action keyword")?;
        match key {
            ":parameters" => params = typed_list(expect_list(value, "a parameter list")?, true)?,
            ":precondition" => precondition = parse_conjunction(value)?,
            ":effect" => effects = parse_conjunction(value)?,
            ":description" => match value {
                Sexp::Str(s, _) => description = s.clone(),
                _ => return Err(err_at(value, "expected a string after `:description`")),
            },
            ":syntax" => match value {
                Sexp::Str(s, _) => syntax_text = Some((s.clone(), value)),
                _ => return Err(err_at(value, "expected a string after `:syntax`")),
            },
            _ => return Err(err_at(key_e, format!("unexpected action keyword `{key}`"))),
        }
        rest = tail;
    }
    if let [dangling, ..] = rest {
        return Err(err_at(dangling, "expected a value after the action keyword"));
    }

    let mut seen = HashSet::new();
    for p in &params {
        if !seen.insert(&p.name) {
            return Err(SemanticError::Duplicate { kind: "parameter", name: p.name.clone() }.into());
        }
        if !domain.has_type(&p.ty) {
            return Err(SemanticError::UndeclaredType(p.ty.clone()).into());
        }
    }
    for lit in &precondition {
        check_schema_atom(&domain.predicates, domain, &name, &params, &lit.atom)?;
    }
    let mut add_effects = Vec::new();
    let mut del_effects = Vec::new();
    for lit in effects {
        if lit.atom.is_equality() {
            return Err(SemanticError::UndeclaredPredicate(EQUALITY.into()).into());
        }
        check_schema_atom(&domain.predicates, domain, &name, &params, &lit.atom)?;
        let target = if lit.positive { &mut add_effects } else { &mut del_effects };
        if !target.contains(&lit.atom) {
            target.push(lit.atom);
        }
    }
    if let Some(conflict) = add_effects.iter().find(|a| del_effects.contains(a)) {
        return Err(SemanticError::AddDelConflict { action: name, atom: conflict.to_string() }.into());
    }
    let syntax = match syntax_text {
        Some((text, e)) => {
            let syntax = ActionSyntax::parse(&text).map_err(|m| err_at(e, m))?;
            for slot in syntax.slots() {
                if !params.iter().any(|p| p.name == slot) {
                    return Err(SemanticError::BadSyntax {
                        action: name,
                        message: format!("`{slot}` is not a parameter"),
                    }
                    .into());
                }
            }
            syntax
        }
        None => ActionSyntax::from_params(&name, params.iter().map(|p| p.name.as_str())),
    };
    Ok(ActionSchema { name, description, params, precondition, add_effects, del_effects, syntax })
}

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = read_one(text)?;
    let (name, sections) = header(&root, "domain")?;
    let mut domain = Domain {
        name: name.to_string(),
        requirements: Vec::new(),
        types: BTreeMap::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut action_sections = Vec::new();
    for section in sections {
        let (key, body) = section_key(section)?;
        match key {
            ":requirements" => domain.requirements = check_requirements(body)?,
            ":types" => {
                for t in typed_list(body, false)? {
                    if t.name == ROOT_TYPE {
                        continue;
                    }
                    if domain.types.insert(t.name.clone(), t.ty.clone()).is_some() {
                        return Err(SemanticError::Duplicate { kind: "type", name: t.name }.into());
                    }
                }
                // parents mentioned only as supertypes are declared implicitly
                let parents: Vec<String> = domain.types.values().cloned().collect();
                for p in parents {
                    if p != ROOT_TYPE {
                        domain.types.entry(p).or_insert_with(|| ROOT_TYPE.to_string());
                    }
                }
                check_types_acyclic(&domain.types)?;
            }
            ":predicates" => {
                for p in body {
                    let items = expect_list(p, "a predicate declaration")?;
                    let head = items.first().ok_or_else(|| err_at(p, "expected a predicate name"))?;
                    let pname = expect_name(head, "a predicate name")?.to_string();
                    let params = typed_list(&items[1..], true)?;
                    if domain.predicates.iter().any(|q| q.name == pname) {
                        return Err(SemanticError::Duplicate { kind: "predicate", name: pname }.into());
                    }
                    let mut seen = HashSet::new();
                    for q in &params {
                        if !seen.insert(&q.name) {
                            return Err(SemanticError::Duplicate { kind: "parameter", name: q.name.clone() }.into());
                        }
                        if !domain.has_type(&q.ty) {
                            return Err(SemanticError::UndeclaredType(q.ty.clone()).into());
                        }
                    }
                    domain.predicates.push(PredicateSchema { name: pname, params });
                }
            }
            ":action" => action_sections.push((section, body)),
            _ => return Err(err_at(section, format!("unsupported domain section `{key}`"))),
        }
    }
    for (section, body) in action_sections {
        let action = parse_action(body, section, &domain)?;
        if domain.action(&action.name).is_some() {
            return Err(SemanticError::Duplicate { kind: "action", name: action.name }.into());
        }
        domain.actions.push(action);
    }
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = read_one(text)?;
    let (name, sections) = header(&root, "problem")?;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut goal = None;
    for section in sections {
        let (key, body) = section_key(section)?;
        match key {
            ":domain" => match body {
                [d] => domain_name = Some(expect_name(d, "a domain name")?.to_string()),
                _ => return Err(err_at(section, "expected `(:domain <name>)`")),
            },
            ":objects" => objects = typed_list(body, false)?,
            ":init" => {
                for a in body {
                    let atom = parse_atom(a)?;
                    if !init.contains(&atom) {
                        init.push(atom);
                    }
                }
            }
            ":goal" => match body {
                [g] => goal = Some(Goal::new(parse_conjunction(g)?)),
                _ => return Err(err_at(section, "expected exactly one goal condition")),
            },
            _ => return Err(err_at(section, format!("unsupported problem section `{key}`"))),
        }
    }
    let end = end_pos(text);
    let domain_name =
        domain_name.ok_or_else(|| PddlError::parse(end.line, end.column, "expected a `(:domain ...)` section"))?;
    let goal = goal.ok_or_else(|| PddlError::parse(end.line, end.column, "expected a `(:goal ...)` section"))?;
    if domain_name != domain.name {
        return Err(SemanticError::DomainMismatch { expected: domain.name.clone(), found: domain_name }.into());
    }
    let problem = Problem { name: name.to_string(), domain_name, objects, init, goal };
    check_problem(domain, &problem)?;
    Ok(problem)
}

/// Checks a ground atom against the domain; `objects` maps object name to type.
pub(crate) fn check_ground_atom(
    domain: &Domain,
    objects: &HashMap<&str, &str>,
    atom: &Atom,
) -> Result<(), SemanticError> {
    let expected: Vec<&str> = if atom.is_equality() {
        vec![ROOT_TYPE, ROOT_TYPE]
    } else {
        let schema =
            domain.predicate(&atom.predicate).ok_or_else(|| SemanticError::UndeclaredPredicate(atom.predicate.clone()))?;
        schema.params.iter().map(|p| p.ty.as_str()).collect()
    };
    if expected.len() != atom.args.len() {
        return Err(SemanticError::ArityMismatch {
            predicate: atom.predicate.clone(),
            expected: expected.len(),
            found: atom.args.len(),
        });
    }
    for (arg, ty) in atom.args.iter().zip(expected) {
        let found = objects.get(arg.as_str()).ok_or_else(|| SemanticError::UnknownObject(arg.clone()))?;
        if !domain.is_subtype(found, ty) {
            return Err(SemanticError::TypeMismatch {
                predicate: atom.predicate.clone(),
                object: arg.clone(),
                expected: ty.to_string(),
                found: found.to_string(),
            });
        }
    }
    Ok(())
}

pub(crate) fn check_problem(domain: &Domain, problem: &Problem) -> Result<(), SemanticError> {
    let mut objects: HashMap<&str, &str> = HashMap::new();
    for o in &problem.objects {
        if !domain.has_type(&o.ty) {
            return Err(SemanticError::UndeclaredType(o.ty.clone()));
        }
        if objects.insert(&o.name, &o.ty).is_some() {
            return Err(SemanticError::Duplicate { kind: "object", name: o.name.clone() });
        }
    }
    for atom in &problem.init {
        if atom.is_equality() {
            return Err(SemanticError::UndeclaredPredicate(EQUALITY.into()));
        }
        check_ground_atom(domain, &objects, atom)?;
    }
    for lit in &problem.goal.literals {
        check_ground_atom(domain, &objects, &lit.atom)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "(define (domain mini) (:requirements :strips) (:predicates (p)) (:action a :parameters () :precondition () :effect (p)))";

    #[test]
    fn minimal_domain() {
        let d = parse_domain(MINI).unwrap();
        assert_eq!(d.predicates.len(), 1);
        assert_eq!(d.actions.len(), 1);
        assert_eq!(d.actions[0].add_effects, vec![Atom::new::<&str>("p", [])]);
    }

    #[test]
    fn unknown_requirement_rejected() {
        let text = MINI.replace(":strips", ":strips :conditional-effects");
        assert_eq!(
            parse_domain(&text).unwrap_err(),
            PddlError::Semantic(SemanticError::UnsupportedRequirement(":conditional-effects".into()))
        );
    }

    #[test]
    fn semantic_errors() {
        let undeclared_type = "(define (domain d) (:predicates (p ?x - thing)))";
        assert_eq!(
            parse_domain(undeclared_type).unwrap_err(),
            PddlError::Semantic(SemanticError::UndeclaredType("thing".into()))
        );
        let arity = "(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?x ?x) :effect ()))";
        assert!(matches!(
            parse_domain(arity).unwrap_err(),
            PddlError::Semantic(SemanticError::ArityMismatch { expected: 1, found: 2, .. })
        ));
        let unbound = "(define (domain d) (:predicates (p ?x)) (:action a :parameters () :precondition () :effect (p ?y)))";
        assert!(matches!(
            parse_domain(unbound).unwrap_err(),
            PddlError::Semantic(SemanticError::UnboundVariable { .. })
        ));
        let undeclared = "(define (domain d) (:predicates (p)) (:action a :parameters () :precondition (q) :effect ()))";
        assert_eq!(
            parse_domain(undeclared).unwrap_err(),
            PddlError::Semantic(SemanticError::UndeclaredPredicate("q".into()))
        );
        let cyclic = "(define (domain d) (:types a - b b - a))";
        assert!(matches!(parse_domain(cyclic).unwrap_err(), PddlError::Semantic(SemanticError::CyclicTypes(_))));
        let conflict = "(define (domain d) (:predicates (p)) (:action a :parameters () :precondition () :effect (and (p) (not (p)))))";
        assert!(matches!(
            parse_domain(conflict).unwrap_err(),
            PddlError::Semantic(SemanticError::AddDelConflict { .. })
        ));
    }

    #[test]
    fn case_is_normalized() {
        let d = parse_domain("(DEFINE (Domain Mini) (:PREDICATES (IsOpen ?X)))").unwrap();
        assert_eq!(d.name, "mini");
        assert_eq!(d.predicates[0].name, "isopen");
        assert_eq!(d.predicates[0].params[0].name, "?x");
    }

    #[test]
    fn syntax_splits_implicit_params() {
        let text = "(define (domain d) (:requirements :typing) (:types loc)
            (:predicates (at ?x - loc))
            (:action go-to :parameters (?from - loc ?to - loc) :syntax \"go to ?to\"
               :description \"Move somewhere.\"
               :precondition (at ?from) :effect (and (at ?to) (not (at ?from)))))";
        let d = parse_domain(text).unwrap();
        let a = &d.actions[0];
        assert_eq!(a.description, "Move somewhere.");
        assert_eq!(a.arguments().iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), vec!["?to"]);
        assert_eq!(a.implicit_params().iter().map(|p| p.name.as_str()).collect::<Vec<_>>(), vec!["?from"]);
        assert_eq!(a.render(&["kitchen".into()]), "go to kitchen");
    }

    #[test]
    fn problem_checks() {
        let d = parse_domain("(define (domain d) (:types item) (:predicates (held ?x - item)))").unwrap();
        let empty = parse_problem("(define (problem p) (:domain d) (:objects) (:init) (:goal (and)))", &d).unwrap();
        assert!(empty.objects.is_empty() && empty.init.is_empty() && empty.goal.is_empty());
        let unknown = parse_problem("(define (problem p) (:domain d) (:objects) (:init (held apple-1)) (:goal (and)))", &d);
        assert_eq!(unknown.unwrap_err(), PddlError::Semantic(SemanticError::UnknownObject("apple-1".into())));
        let dup =
            parse_problem("(define (problem p) (:domain d) (:objects a - item) (:init (held a) (held a)) (:goal ()))", &d)
                .unwrap();
        assert_eq!(dup.init.len(), 1);
        let wrong = parse_problem("(define (problem p) (:domain e) (:init) (:goal ()))", &d);
        assert!(matches!(wrong.unwrap_err(), PddlError::Semantic(SemanticError::DomainMismatch { .. })));
    }
}
