//! Property tests for the module invariants. Structured values (terms,
//! payloads, automata) come from the seeded generators; proptest picks seeds.

use opc_core::behaviour::{behaviour_preorder, similarity};
use opc_core::calculus::{Action, Calculus, Target, Term, Var};
use opc_core::fragments::{polystar_automaton, translate_polystar};
use opc_core::kernel::{normalize, Discrete};
use opc_core::random::{
    random_automaton, random_elem, random_star, random_term, seeded, RandomOps, StarFlavour,
    TermShape,
};
use opc_core::solver::{associated_system, solve_guarded, TieBreak};
use opc_core::syntax::{
    automaton_from_json, automaton_to_json, format_star, format_term, parse_star, parse_term,
};
use opc_core::theories::{AtomSet, Atoms, GuardedTheory, Mix, PgOp, SemilatticeTheory, SubDist};
use opc_core::{Convex, GenOrder, GeneratorContext, ProbGkat, Rational, STerm, Theory};
use proptest::prelude::*;
use rand::Rng;

type Check = Result<(), TestCaseError>;

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("{e:?}")))
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn guarded() -> GuardedTheory {
    GuardedTheory::new(Atoms::new(["b1", "b2", "other"]).unwrap())
}

fn probgkat() -> ProbGkat {
    ProbGkat::new(Atoms::new(["b1", "other"]).unwrap())
}

fn payload_order<T: RandomOps>(th: &T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let gens = names(&["x", "y", "z"]);
    let p = ok(random_elem(th, &mut rng, &gens, 6))?;
    let q = ok(random_elem(th, &mut rng, &gens, 6))?;
    let r = ok(random_elem(th, &mut rng, &gens, 6))?;
    let leq = |a: &T::Elem<String>, b: &T::Elem<String>| th.leq(&Discrete, a, b);
    prop_assert!(ok(leq(&p, &p))?);
    if ok(leq(&p, &q))? && ok(leq(&q, &r))? {
        prop_assert!(ok(leq(&p, &r))?);
    }
    if ok(leq(&p, &q))? && ok(leq(&q, &p))? {
        prop_assert_eq!(&p, &q);
    }
    // normalize is idempotent on canonical payloads
    let again = ok(normalize(th, &Discrete, &th.representative(&p)))?;
    prop_assert_eq!(again, p);
    Ok(())
}

fn lfp_laws<T: RandomOps>(th: &T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let gens = names(&["x", "c", "d"]);
    let x = "x".to_string();
    let p1 = ok(random_elem(th, &mut rng, &gens, 7))?;
    let p2 = ok(random_elem(th, &mut rng, &gens, 7))?;
    let l1 = th.lfp(&x, &p1);
    prop_assert!(!th.support(&l1).contains(&x));
    let back = th.bind(&Discrete, &p1, &mut |g: &String| {
        if *g == x {
            l1.clone()
        } else {
            th.unit(g.clone())
        }
    });
    prop_assert!(ok(th.leq(&Discrete, &back, &l1))? && ok(th.leq(&Discrete, &l1, &back))?);
    if ok(th.leq(&Discrete, &p1, &p2))? {
        prop_assert!(ok(th.leq(&Discrete, &l1, &th.lfp(&x, &p2)))?);
    }
    // renaming away from x commutes with lfp_x, also when it merges generators
    let mut h = |g: &String| if g == "d" { "c".to_string() } else { g.clone() };
    let lhs = th.map(&Discrete, &l1, &mut h);
    let rhs = th.lfp(&x, &th.map(&Discrete, &p1, &mut h));
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

fn reachable_agrees_with_step<T: RandomOps>(th: T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let calc = Calculus::new(th);
    let size = rng.gen_range(1..=10);
    let e = random_term(&calc.theory, &mut rng, &TermShape::default(), size);
    let ex = ok(calc.reachable(&e))?;
    let a = &ex.automaton;
    prop_assert_eq!(a.len(), ex.terms.len());
    let ctx = a.declared_order();
    for (i, t) in ex.terms.iter().enumerate() {
        let mut missing = false;
        let b = ok(calc.step(t))?;
        let mapped = calc
            .theory
            .map(&ctx, &b, &mut |g: &Target<Term<T::Op>>| match g {
                Target::Ret(v) => Target::Ret(v.clone()),
                Target::Next(act, f) => {
                    let j = ex.terms.iter().position(|s| s == f);
                    missing |= j.is_none();
                    Target::Next(act.clone(), j.unwrap_or(usize::MAX))
                }
            });
        prop_assert!(!missing, "successor of state {} not in the state list", i);
        prop_assert_eq!(&mapped, a.branch(i));
    }
    Ok(())
}

fn preorders<T: RandomOps>(th: T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let states = rng.gen_range(1..=5);
    let a = ok(random_automaton(
        &th,
        &mut rng,
        &[Action::new("a")],
        &[Var::new("v")],
        states,
        4,
    ))?;
    let b = ok(behaviour_preorder(&a))?;
    let s = ok(similarity(&a))?;
    for x in 0..states {
        prop_assert!(b.leq(x, x) && s.leq(x, x));
        for y in 0..states {
            for z in 0..states {
                prop_assert!(!(b.leq(x, y) && b.leq(y, z)) || b.leq(x, z));
                prop_assert!(!(s.leq(x, y) && s.leq(y, z)) || s.leq(x, z));
            }
        }
    }
    Ok(())
}

fn solutions_are_unique<T: RandomOps>(th: T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let states = rng.gen_range(1..=4);
    let acts = [Action::new("a"), Action::new("b")];
    let a = ok(random_automaton(
        &th,
        &mut rng,
        &acts,
        &[Var::new("v")],
        states,
        4,
    ))?;
    let sys = associated_system(&a);
    let fwd = ok(solve_guarded(&sys, TieBreak::DeclarationOrder))?;
    let rev = ok(solve_guarded(&sys, TieBreak::ReverseDeclarationOrder))?;
    let calc = Calculus::new(th);
    for (s, t) in fwd.terms.iter().zip(&rev.terms) {
        prop_assert!(
            ok(calc.behavioural_equiv(s, t))?,
            "{} vs {}",
            format_term(&calc.theory, s),
            format_term(&calc.theory, t)
        );
    }
    Ok(())
}

fn syntax_roundtrips<T: RandomOps>(th: T, flavour: StarFlavour, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let calc = Calculus::new(th);
    let th = &calc.theory;
    let size = rng.gen_range(1..=14);
    let e = random_term(th, &mut rng, &TermShape::default(), size);
    let text = format_term(th, &e);
    prop_assert_eq!(ok(parse_term(&calc, &text))?, e);
    let s = random_star(
        th,
        &mut rng,
        &[Action::new("a"), Action::new("b")],
        flavour,
        size,
    );
    let text = format_star(th, &s);
    let back = ok(parse_star(&calc, &text))?;
    prop_assert_eq!(format_star(th, &back), text);
    prop_assert_eq!(back, s);
    let a = ok(random_automaton(
        th,
        &mut rng,
        &[Action::new("a")],
        &[Var::new("v")],
        3,
        5,
    ))?;
    let json = automaton_to_json(&a);
    let b = ok(automaton_from_json(th.clone(), &json))?;
    prop_assert_eq!(a.branches(), b.branches());
    prop_assert_eq!(automaton_to_json(&b), json);
    Ok(())
}

fn polystar_agrees_with_translation<T: RandomOps>(th: T, seed: u64) -> Check {
    let mut rng = seeded(seed);
    let calc = Calculus::new(th);
    let size = rng.gen_range(1..=7);
    let s = random_star(
        &calc.theory,
        &mut rng,
        &[Action::new("a"), Action::new("b")],
        StarFlavour::Polystar,
        size,
    );
    let (direct, _) = ok(polystar_automaton(&calc, &s))?;
    let ex = ok(calc.reachable(&ok(translate_polystar(&calc, &s))?))?;
    let joint = ok(direct.disjoint_union(&ex.automaton))?;
    let b = ok(behaviour_preorder(&joint))?;
    prop_assert!(
        b.equivalent(0, direct.len() + ex.root()),
        "{}",
        format_star(&calc.theory, &s)
    );
    Ok(())
}

macro_rules! per_theory {
    ($name:ident, $check:ident) => {
        mod $name {
            use super::*;
            proptest! {
                #![proptest_config(ProptestConfig::with_cases(128))]
                #[test]
                fn guarded_theory(seed in any::<u64>()) { $check(guarded(), seed)?; }
                #[test]
                fn convex_theory(seed in any::<u64>()) { $check(Convex::new(), seed)?; }
                #[test]
                fn semilattice_theory(seed in any::<u64>()) { $check(SemilatticeTheory, seed)?; }
                #[test]
                fn probgkat_theory(seed in any::<u64>()) { $check(probgkat(), seed)?; }
            }
        }
    };
}

fn payload_order_owned<T: RandomOps>(th: T, seed: u64) -> Check {
    payload_order(&th, seed)
}

fn lfp_laws_owned<T: RandomOps>(th: T, seed: u64) -> Check {
    lfp_laws(&th, seed)
}

fn syntax_star<T: RandomOps>(th: T, seed: u64) -> Check {
    syntax_roundtrips(th, StarFlavour::Polystar, seed)
}

per_theory!(element_order_is_a_partial_order, payload_order_owned);
per_theory!(lfp_is_a_fixed_point_and_monotone, lfp_laws_owned);
per_theory!(
    reachable_states_step_consistently,
    reachable_agrees_with_step
);
per_theory!(behaviour_and_similarity_are_preorders, preorders);
per_theory!(tie_breaks_give_equivalent_solutions, solutions_are_unique);
per_theory!(parse_format_and_json_roundtrip, syntax_star);
per_theory!(
    polystar_step_matches_translation,
    polystar_agrees_with_translation
);

type Dist = SubDist<usize, Rational>;

fn dist(n: usize) -> impl Strategy<Value = Dist> {
    prop::collection::vec((0..n, 0i64..=6), 0..=4).prop_map(|ws| {
        let total: i64 = ws.iter().map(|(_, w)| w).sum::<i64>().max(6);
        SubDist::from_pairs(
            ws.into_iter()
                .map(|(g, w)| (g, Rational::new(w.into(), total.into()))),
        )
        .unwrap()
    })
}

fn poset(n: usize) -> impl Strategy<Value = GeneratorContext<usize>> {
    prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
        let pairs = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .zip(bits)
            .filter(|(_, b)| *b)
            .map(|(p, _)| p);
        GeneratorContext::with_order(0..n, pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn heavier_higher_is_antisymmetric(ctx in poset(4), p in dist(4), q in dist(4)) {
        let pq = p.hh_leq(&ctx, &q, 20).unwrap();
        let qp = q.hh_leq(&ctx, &p, 20).unwrap();
        prop_assert_eq!(pq, p.hh_leq_by_flow(&ctx, &q));
        if pq && qp {
            prop_assert_eq!(p, q);
        }
    }

    #[test]
    fn convex_rename_is_monotone(
        ctx in poset(4),
        p in dist(4),
        lift in prop::collection::vec(0usize..4, 4),
        h in prop::collection::vec(0usize..4, 4),
    ) {
        let th = Convex::new();
        let up = |g: &usize| {
            let above: Vec<usize> = (0..4).filter(|k| ctx.leq(g, k)).collect();
            above[lift[*g] % above.len()]
        };
        let q = th.map(&ctx, &p, &mut |g| up(g));
        prop_assert!(p.hh_leq(&ctx, &q, 20).unwrap());
        let monotone = (0..4).all(|i| (0..4).all(|j| !ctx.leq(&i, &j) || ctx.leq(&h[i], &h[j])));
        let h = |g: &usize| if monotone { h[*g] } else { h[0] };
        let hp = th.map(&ctx, &p, &mut |g| h(g));
        let hq = th.map(&ctx, &q, &mut |g| h(g));
        prop_assert!(hp.hh_leq(&ctx, &hq, 20).unwrap());
    }

    #[test]
    fn probgkat_distribution_axiom(r in 0i64..=6, atoms in 0u64..4, seed in any::<u64>()) {
        let th = probgkat();
        let mut rng = seeded(seed);
        let gens = names(&["x", "y", "z"]);
        let mut leaf = || {
            let p: <ProbGkat as Theory>::Elem<String> = random_elem(&th, &mut rng, &gens, 4).unwrap();
            th.representative(&p)
        };
        let (x, y, z) = (leaf(), leaf(), leaf());
        let mix = PgOp::Mix(Rational::new(r.into(), 6.into()));
        let guard = PgOp::Guard(AtomSet(atoms));
        let lhs = STerm::op(mix.clone(), vec![x.clone(), STerm::op(guard.clone(), vec![y.clone(), z.clone()])]);
        let rhs = STerm::op(
            guard,
            vec![STerm::op(mix.clone(), vec![x.clone(), y]), STerm::op(mix, vec![x, z])],
        );
        prop_assert_eq!(normalize(&th, &Discrete, &lhs).unwrap(), normalize(&th, &Discrete, &rhs).unwrap());
    }

    #[test]
    fn semilattice_behaviour_is_a_simulation(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let states = rng.gen_range(1..=5);
        let a = random_automaton(&SemilatticeTheory, &mut rng, &[Action::new("a"), Action::new("b")], &[Var::new("v")], states, 4).unwrap();
        prop_assert!(behaviour_preorder(&a).unwrap().is_subset_of(&similarity(&a).unwrap()));
    }

    #[test]
    fn convex_mix_is_below_the_heavier_side(r in 0i64..=6) {
        let th = Convex::new();
        let ctx = GeneratorContext::with_order(["lo".to_string(), "hi".to_string()], [("lo".to_string(), "hi".to_string())]).unwrap();
        let p = th.apply(&ctx, &Mix(Rational::new(r.into(), 6.into())), &[th.unit("lo".to_string()), th.unit("hi".to_string())]).unwrap();
        prop_assert!(th.leq(&ctx, &p, &th.unit("hi".to_string())).unwrap());
        prop_assert!(th.leq(&ctx, &th.unit("lo".to_string()), &p).unwrap());
    }
}
