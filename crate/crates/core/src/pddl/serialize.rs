//! Canonical PDDL output: two-space indent, one object or literal per line.

use std::fmt::Write;

use super::{Goal, Problem};

fn write_goal(out: &mut String, goal: &Goal, indent: &str) {
    if goal.literals.is_empty() {
        let _ = writeln!(out, "{indent}(and )");
        return;
    }
    let _ = writeln!(out, "{indent}(and");
    for lit in &goal.literals {
        let _ = writeln!(out, "{indent}  {lit}");
    }
    let _ = writeln!(out, "{indent})");
}

pub fn serialize_goal(goal: &Goal) -> String {
    let mut out = String::new();
    write_goal(&mut out, goal, "");
    out
}

pub fn serialize_problem(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain_name);
    let _ = writeln!(out, "  (:objects");
    for o in &problem.objects {
        let _ = writeln!(out, "    {} - {}", o.name, o.ty);
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:init");
    for a in &problem.init {
        let _ = writeln!(out, "    {a}");
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:goal");
    write_goal(&mut out, &problem.goal, "    ");
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, ")");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem, Atom, Literal, TypedName};

    #[test]
    fn empty_goal() {
        assert_eq!(serialize_goal(&Goal::default()), "(and )\n");
    }

    #[test]
    fn golden_problem() {
        let domain =
            parse_domain("(define (domain d) (:types item) (:predicates (p ?x - item) (q ?x - item ?y - item)))").unwrap();
        let problem = Problem {
            name: "t".into(),
            domain_name: "d".into(),
            objects: vec![TypedName::new("b", "item"), TypedName::new("a", "item")],
            init: vec![Atom::new("q", ["b", "a"])],
            goal: Goal::new(vec![Literal::pos(Atom::new("p", ["a"])), Literal::neg(Atom::new("q", ["a", "b"]))]),
        };
        let text = serialize_problem(&problem);
        let expected = "(define (problem t)
  (:domain d)
  (:objects
    b - item
    a - item
  )
  (:init
    (q b a)
  )
  (:goal
    (and
      (p a)
      (not (q a b))
    )
  )
)
";
        assert_eq!(text, expected);
        assert_eq!(parse_problem(&text, &domain).unwrap(), problem);
    }
}
