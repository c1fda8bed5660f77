//! File formats: equation systems, automaton JSON and DOT export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::lexer::Tok;
use super::parser::Parser;
use super::printer::format_term;
use crate::calculus::{
    Action, ActionOrder, Calculus, OrderedAutomaton, Target, TargetOrder, Term, Var,
};
use crate::error::{Error, ParseError, Result, SourceSpan};
use crate::kernel::Theory;
use crate::solver::EquationSystem;

pub const FORMAT_VERSION: u64 = 1;

/// Parses a system file: equations `x = term` and order chains such as
/// `x1 <= x2 >= x3`, one per line, with `//` comments.
pub fn parse_system<T: Theory>(calc: &Calculus<T>, text: &str) -> Result<EquationSystem<T::Op>> {
    let mut equations: Vec<(Var, Term<T::Op>)> = Vec::new();
    let mut spans: BTreeMap<Var, SourceSpan> = BTreeMap::new();
    let mut chains: Vec<(Var, SourceSpan, Var, SourceSpan)> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let mut p = Parser::new(line, start)?;
        if matches!(p.peek(), Tok::Eof) {
            continue;
        }
        let (name, span) = p.expect_ident("an indeterminate")?;
        let x = Var::new(&name);
        if p.eat_sym("=") {
            let rhs = p.term(calc)?;
            p.finish()?;
            if spans.contains_key(&x) {
                return Err(ParseError::new(format!("`{name}` is defined twice"), span).into());
            }
            spans.insert(x.clone(), span);
            equations.push((x, rhs));
            continue;
        }
        let (mut left, mut left_span) = (x, span);
        loop {
            let up = if p.eat_sym("<=") {
                true
            } else if p.eat_sym(">=") {
                false
            } else {
                return Err(p.error("expected `=`, `<=` or `>=`").into());
            };
            let (name, span) = p.expect_ident("an indeterminate")?;
            let right = Var::new(&name);
            if up {
                chains.push((left.clone(), left_span, right.clone(), span));
            } else {
                chains.push((right.clone(), span, left.clone(), left_span));
            }
            (left, left_span) = (right, span);
            if matches!(p.peek(), Tok::Eof) {
                break;
            }
        }
    }
    let mut order = Vec::new();
    for (x, xs, y, ys) in chains {
        for (v, s) in [(&x, xs), (&y, ys)] {
            if !spans.contains_key(v) {
                return Err(ParseError::new(format!("unknown indeterminate `{v}`"), s).into());
            }
        }
        order.push((x, y));
    }
    EquationSystem::new(calc, equations, order)
}

/// Prints a system in the format read by [`parse_system`].
pub fn format_system<T: Theory>(theory: &T, sys: &EquationSystem<T::Op>) -> String {
    let mut out = String::new();
    for (i, x) in sys.indeterminates().iter().enumerate() {
        let _ = writeln!(out, "{x} = {}", format_term(theory, sys.rhs(i)));
    }
    for (x, y) in sys.order_pairs() {
        let _ = writeln!(out, "{x} <= {y}");
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    format_version: u64,
    theory: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<String>>,
    actions: Option<Vec<String>>,
    action_order: Vec<(String, String)>,
    states: Vec<StateEntry>,
    order: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    id: usize,
    label: String,
    branch: Value,
}

fn encode_target(t: &Target<usize>) -> Value {
    match t {
        Target::Ret(v) => json!({ "ret": v.as_str() }),
        Target::Next(a, s) => json!({ "action": a.as_str(), "state": s }),
    }
}

fn decode_target(v: &Value) -> Result<Target<usize>> {
    let bad = || Error::MalformedPayload(format!("invalid target {v}"));
    let obj = v.as_object().ok_or_else(bad)?;
    match (obj.get("ret"), obj.get("action"), obj.get("state")) {
        (Some(Value::String(r)), None, None) => Ok(Target::Ret(Var::new(r))),
        (None, Some(Value::String(a)), Some(s)) => {
            let s = s.as_u64().ok_or_else(bad)?;
            Ok(Target::Next(Action::new(a), s as usize))
        }
        _ => Err(bad()),
    }
}

/// Deterministic JSON: states by index, object keys sorted.
pub fn automaton_to_json<T: Theory>(a: &OrderedAutomaton<T>) -> String {
    let file = AutomatonFile {
        format_version: FORMAT_VERSION,
        theory: a.theory.kind().name().to_string(),
        atoms: a.theory.atom_names().map(<[String]>::to_vec),
        actions: a
            .actions
            .declared()
            .map(|d| d.iter().map(|x| x.as_str().to_string()).collect()),
        action_order: a
            .actions
            .strict_pairs()
            .into_iter()
            .map(|(x, y)| (x.as_str().to_string(), y.as_str().to_string()))
            .collect(),
        states: a
            .branches()
            .iter()
            .enumerate()
            .map(|(id, b)| StateEntry {
                id,
                label: a.labels()[id].clone(),
                branch: a.theory.encode(b, &encode_target),
            })
            .collect(),
        order: a.order_pairs(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("automaton JSON is serializable");
    s.push('\n');
    s
}

/// Reads an automaton written by [`automaton_to_json`] for `theory`.
pub fn automaton_from_json<T: Theory>(theory: T, text: &str) -> Result<OrderedAutomaton<T>> {
    let file: AutomatonFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("automaton JSON: {e}")))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Invalid(format!(
            "unsupported format_version {}",
            file.format_version
        )));
    }
    if file.theory != theory.kind().name() {
        return Err(Error::TheoryMismatch(format!(
            "file holds a {} automaton, expected {}",
            file.theory,
            theory.kind()
        )));
    }
    if file.atoms.as_deref() != theory.atom_names() {
        return Err(Error::TheoryMismatch(
            "declared atoms differ from the configured ones".into(),
        ));
    }
    let actions = ActionOrder::new(
        file.actions.map(|d| d.iter().map(Action::new).collect()),
        file.action_order
            .iter()
            .map(|(x, y)| (Action::new(x), Action::new(y)))
            .collect(),
    )?;
    let mut labels = Vec::new();
    let mut branches = Vec::new();
    {
        let ctx = TargetOrder::identity(&actions);
        for (i, st) in file.states.iter().enumerate() {
            if st.id != i {
                return Err(Error::Invalid(format!(
                    "state ids must be 0..n in order; found {} at position {i}",
                    st.id
                )));
            }
            labels.push(st.label.clone());
            branches.push(theory.decode(&ctx, &st.branch, &decode_target)?);
        }
    }
    OrderedAutomaton::from_parts(theory, actions, labels, branches, file.order)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: transitions labelled `label | action`, return
/// variables as plain nodes, and the Hasse diagram of the state order as
/// undirected blue edges.
pub fn automaton_to_dot<T: Theory>(a: &OrderedAutomaton<T>) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
    let mut rets = std::collections::BTreeSet::new();
    for (i, label) in a.labels().iter().enumerate() {
        let _ = writeln!(out, "  s{i} [label=\"{}\"];", dot_escape(label));
    }
    for (i, b) in a.branches().iter().enumerate() {
        for (label, t) in a.theory.edges(b) {
            match t {
                Target::Ret(v) => {
                    rets.insert(v.clone());
                    let _ = writeln!(
                        out,
                        "  s{i} -> \"ret_{}\" [label=\"{}\"];",
                        dot_escape(v.as_str()),
                        dot_escape(&label)
                    );
                }
                Target::Next(act, j) => {
                    let text = if label.is_empty() {
                        act.to_string()
                    } else {
                        format!("{label} | {act}")
                    };
                    let _ = writeln!(out, "  s{i} -> s{j} [label=\"{}\"];", dot_escape(&text));
                }
            }
        }
    }
    for v in &rets {
        let v = dot_escape(v.as_str());
        let _ = writeln!(out, "  \"ret_{v}\" [label=\"{v}\", shape=plaintext];");
    }
    let n = a.len();
    let lt = |i: usize, j: usize| a.declared_leq(i, j) && !a.declared_leq(j, i);
    for i in 0..n {
        for j in 0..n {
            let covers = if a.declared_leq(j, i) {
                i < j && a.declared_leq(i, j)
            } else {
                a.declared_leq(i, j) && !(0..n).any(|k| lt(i, k) && lt(k, j))
            };
            if covers {
                let _ = writeln!(out, "  s{i} -> s{j} [color=blue, dir=none, style=dashed];");
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Calculus;
    use crate::syntax::parse_term;
    use crate::theories::{Atoms, GuardedTheory, SemilatticeTheory};

    fn guarded() -> Calculus<GuardedTheory> {
        Calculus::new(GuardedTheory::new(Atoms::new(["al1", "al2"]).unwrap()))
    }

    #[test]
    fn three_equation_system_with_order_chain() {
        let calc = guarded();
        let text = "// guarded example system\n\
                    x1 = a.x2 ?{al1} v\n\
                    x2 = a.x2 ?{al1} v   // the middle one\n\
                    x3 = a.x2 ?{al1} 0\n\
                    x1 <= x2 >= x3\n";
        let sys = parse_system(&calc, text).unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(
            sys.order_pairs(),
            vec![
                (Var::new("x1"), Var::new("x2")),
                (Var::new("x3"), Var::new("x2"))
            ]
        );
        let bad = "x1 = a.x2 ?{al1} v\nx2 = a.x2 ?{al1} 0\nx1 <= x2\n";
        assert!(matches!(
            parse_system(&calc, bad),
            Err(Error::NotMonotone(_))
        ));
    }

    #[test]
    fn single_and_unguarded_lines() {
        let calc = Calculus::new(SemilatticeTheory);
        let sys = parse_system(&calc, "x = a.x").unwrap();
        assert_eq!(sys.len(), 1);
        assert!(sys.check_guarded().is_ok());
        let sys = parse_system(&calc, "x = x\n").unwrap();
        assert!(matches!(sys.check_guarded(), Err(Error::Unguarded { .. })));
    }

    #[test]
    fn duplicate_and_unknown_names_carry_spans() {
        let calc = Calculus::new(SemilatticeTheory);
        let text = "x = a.x\nx = b.x\n";
        match parse_system(&calc, text) {
            Err(Error::Parse(e)) => assert_eq!(e.span, SourceSpan::new(8, 9)),
            other => panic!("{other:?}"),
        }
        match parse_system(&calc, "x = a.x\nx <= y\n") {
            Err(Error::Parse(e)) => {
                assert_eq!(e.span, SourceSpan::new(13, 14));
                assert_eq!(
                    e.render("x = a.x\nx <= y\n"),
                    "2:6: unknown indeterminate `y`"
                );
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_system(&calc, "x a.x").is_err());
    }

    #[test]
    fn system_round_trips() {
        let calc = guarded();
        let text = "x1 = a.x1 ?{al1} v\nx2 = a.x2 ?{al1} v\nx1 <= x2\n";
        let sys = parse_system(&calc, text).unwrap();
        let printed = format_system(&calc.theory, &sys);
        let again = parse_system(&calc, &printed).unwrap();
        assert_eq!(format_system(&calc.theory, &again), printed);
        assert_eq!(sys.order_pairs(), again.order_pairs());
    }

    fn json_round_trip<T: Theory>(calc: &Calculus<T>, src: &str) -> String {
        let e = parse_term(calc, src).unwrap();
        let a = calc.reachable(&e).unwrap().automaton;
        let text = automaton_to_json(&a);
        let back = automaton_from_json(calc.theory.clone(), &text).unwrap();
        assert_eq!(automaton_to_json(&back), text);
        assert_eq!(back.branches(), a.branches());
        text
    }

    #[test]
    fn json_round_trips_every_theory() {
        let text = json_round_trip(&guarded(), "mu u. a.(a.u ?{al1} v)");
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["states"].as_array().unwrap().len(), 2);
        let text = json_round_trip(
            &Calculus::new(crate::Convex::new()),
            "mu x. (x +[1/3] a.(v +[1/2] b.x))",
        );
        assert!(
            text.contains("\"1/3\"") || text.contains("\"1/2\""),
            "{text}"
        );
        json_round_trip(&Calculus::new(SemilatticeTheory), "a.(b.0 + c.v) + a.v");
        let pg = crate::ProbGkat::new(Atoms::new(["b"]).unwrap());
        json_round_trip(&Calculus::new(pg), "mu u. (a.u +[1/2] v) ?{b} w");
    }

    #[test]
    fn json_rejects_wrong_theory_and_atoms() {
        let calc = guarded();
        let a = calc
            .reachable(&parse_term(&calc, "a.v ?{al1} w").unwrap())
            .unwrap()
            .automaton;
        let text = automaton_to_json(&a);
        assert!(matches!(
            automaton_from_json(SemilatticeTheory, &text),
            Err(Error::TheoryMismatch(_))
        ));
        let other = GuardedTheory::new(Atoms::new(["b1", "b2"]).unwrap());
        assert!(matches!(
            automaton_from_json(other, &text),
            Err(Error::TheoryMismatch(_))
        ));
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(automaton_from_json(calc.theory.clone(), &bumped).is_err());
    }

    #[test]
    fn json_keeps_the_declared_order() {
        let calc = Calculus::new(SemilatticeTheory);
        let th = SemilatticeTheory;
        let ord = TargetOrder::identity(&calc.actions);
        let v = |n: &str| th.unit(Target::<usize>::Ret(Var::new(n)));
        let both = th
            .apply(&ord, &crate::theories::Join, &[v("v"), v("w")])
            .unwrap();
        let a = OrderedAutomaton::from_parts(
            th,
            calc.actions.clone(),
            vec!["low".into(), "high".into()],
            vec![v("v"), both],
            vec![(0, 1)],
        )
        .unwrap();
        let text = automaton_to_json(&a);
        let back = automaton_from_json(SemilatticeTheory, &text).unwrap();
        assert!(back.declared_leq(0, 1) && !back.declared_leq(1, 0));
        let dot = automaton_to_dot(&back);
        assert!(
            dot.contains("s0 -> s1 [color=blue, dir=none, style=dashed];"),
            "{dot}"
        );
    }

    #[test]
    fn dot_uses_guard_action_labels() {
        let calc = guarded();
        let a = calc
            .reachable(&parse_term(&calc, "mu u. a.(a.u ?{al1} v)").unwrap())
            .unwrap()
            .automaton;
        let dot = automaton_to_dot(&a);
        assert!(dot.contains("[label=\"al1 | a\"]"), "{dot}");
        assert!(
            dot.contains("\"ret_v\" [label=\"v\", shape=plaintext]"),
            "{dot}"
        );
        assert!(dot.starts_with("digraph automaton {") && dot.ends_with("}\n"));
    }
}
