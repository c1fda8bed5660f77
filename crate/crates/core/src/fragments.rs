//! Star and polystar expressions, their translations into process terms and
//! the direct small-step semantics of polystar expressions.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::calculus::{Action, Calculus, OrderedAutomaton, Target, TargetOrder, Term, Var};
use crate::error::{Error, Result};
use crate::kernel::{normalize, Discrete, STerm, Theory, TheoryKind};

/// The unit variable: successful termination.
pub const UNIT: &str = "u_";
/// The loop variable bound by translated loops.
pub const LOOP: &str = "l_";

pub fn is_reserved(name: &str) -> bool {
    name == UNIT || name == LOOP
}

/// The two variables of a loop payload `p(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopVar {
    X,
    Y,
}

impl fmt::Display for LoopVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoopVar::X => "x",
            LoopVar::Y => "y",
        })
    }
}

/// The payload of a loop: a binary operation `σ` or a polynomial `p(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoopGuard<O> {
    Op(O),
    Poly(STerm<O, LoopVar>),
}

impl<O: Clone> LoopGuard<O> {
    /// `σ` as the polynomial `σ(x, y)`.
    pub fn poly(&self) -> STerm<O, LoopVar> {
        match self {
            LoopGuard::Op(o) => STerm::Op(
                o.clone(),
                vec![STerm::Gen(LoopVar::X), STerm::Gen(LoopVar::Y)],
            ),
            LoopGuard::Poly(p) => p.clone(),
        }
    }
}

/// Star, polystar and ProbGKAT expressions share one tree; the fragment a
/// tree belongs to is checked on translation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StarExp<O> {
    Zero,
    One,
    Act(Action),
    /// A return constant, only in the ProbGKAT surface.
    Const(Var),
    Op(O, Box<StarExp<O>>, Box<StarExp<O>>),
    Seq(Box<StarExp<O>>, Box<StarExp<O>>),
    Loop(Box<StarExp<O>>, LoopGuard<O>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    Star,
    Polystar,
    ProbGkat,
}

impl Fragment {
    pub fn name(self) -> &'static str {
        match self {
            Fragment::Star => "star",
            Fragment::Polystar => "polystar",
            Fragment::ProbGkat => "probgkat",
        }
    }

    pub fn from_name(name: &str) -> Option<Fragment> {
        [Fragment::Star, Fragment::Polystar, Fragment::ProbGkat]
            .into_iter()
            .find(|f| f.name() == name)
    }
}

impl<O: Clone> StarExp<O> {
    pub fn act(a: impl AsRef<str>) -> Self {
        StarExp::Act(Action::new(a))
    }

    pub fn op(o: O, e: StarExp<O>, f: StarExp<O>) -> Self {
        StarExp::Op(o, Box::new(e), Box::new(f))
    }

    pub fn seq(e: StarExp<O>, f: StarExp<O>) -> Self {
        StarExp::Seq(Box::new(e), Box::new(f))
    }

    pub fn star(e: StarExp<O>, o: O) -> Self {
        StarExp::Loop(Box::new(e), LoopGuard::Op(o))
    }

    pub fn polystar(e: StarExp<O>, p: STerm<O, LoopVar>) -> Self {
        StarExp::Loop(Box::new(e), LoopGuard::Poly(p))
    }

    pub fn size(&self) -> usize {
        match self {
            StarExp::Zero | StarExp::One | StarExp::Act(_) | StarExp::Const(_) => 1,
            StarExp::Op(_, e, f) | StarExp::Seq(e, f) => 1 + e.size() + f.size(),
            StarExp::Loop(e, _) => 1 + e.size(),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&StarExp<O>)) {
        f(self);
        match self {
            StarExp::Op(_, a, b) | StarExp::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            StarExp::Loop(a, _) => a.visit(f),
            _ => {}
        }
    }

    /// Checks that the expression lies in `fragment` and that its payloads
    /// are valid for the theory.
    pub fn check<T: Theory<Op = O>>(&self, calc: &Calculus<T>, fragment: Fragment) -> Result<()> {
        if fragment == Fragment::ProbGkat && calc.theory.kind() != TheoryKind::ProbGkat {
            return Err(Error::TheoryMismatch(format!(
                "ProbGKAT expressions need the probgkat theory, not {}",
                calc.theory.kind()
            )));
        }
        let mut res = Ok(());
        self.visit(&mut |e| {
            if res.is_err() {
                return;
            }
            res = match e {
                StarExp::Act(a) => calc.actions.check(a),
                StarExp::Const(v) if fragment != Fragment::ProbGkat => Err(Error::Invalid(
                    format!("return constant `{v}` outside the ProbGKAT surface"),
                )),
                StarExp::Const(v) if is_reserved(v.as_str()) => {
                    Err(Error::ReservedVariable(v.to_string()))
                }
                StarExp::Op(o, ..) => check_binary(&calc.theory, o),
                StarExp::Loop(_, LoopGuard::Op(o)) => check_binary(&calc.theory, o),
                StarExp::Loop(_, LoopGuard::Poly(_)) if fragment == Fragment::Star => Err(
                    Error::Invalid("polynomial loop payload in a star expression".into()),
                ),
                StarExp::Loop(_, LoopGuard::Poly(p)) => {
                    normalize(&calc.theory, &Discrete, p).map(|_| ())
                }
                _ => Ok(()),
            };
        });
        res
    }
}

fn check_binary<T: Theory>(theory: &T, o: &T::Op) -> Result<()> {
    theory.validate_op(o)?;
    match theory.arity(o) {
        2 => Ok(()),
        n => Err(Error::ArityMismatch {
            expected: 2,
            found: n,
        }),
    }
}

/// `p(a, b)` as a process term.
fn fill<O: Clone>(p: &STerm<O, LoopVar>, x: &Term<O>, y: &Term<O>) -> Term<O> {
    p.fold(
        &mut |g: &LoopVar| match g {
            LoopVar::X => x.clone(),
            LoopVar::Y => y.clone(),
        },
        &mut || Term::Zero,
        &mut |o, kids| Term::Op(o.clone(), kids),
    )
}

/// `τ`, without fragment checks.
pub fn translate<O: Clone>(s: &StarExp<O>) -> Term<O> {
    let unit = Var::new(UNIT);
    match s {
        StarExp::Zero => Term::Zero,
        StarExp::One => Term::Ret(unit),
        StarExp::Act(a) => Term::Prefix(a.clone(), Box::new(Term::Ret(unit))),
        StarExp::Const(v) => Term::Ret(v.clone()),
        StarExp::Op(o, e, f) => Term::Op(o.clone(), vec![translate(e), translate(f)]),
        StarExp::Seq(e, f) => translate(e).substitute(&translate(f), &unit),
        StarExp::Loop(e, guard) => {
            let l = Var::new(LOOP);
            let body = translate(e).substitute(&Term::Ret(l.clone()), &unit);
            Term::Mu(l, Box::new(fill(&guard.poly(), &body, &Term::Ret(unit))))
        }
    }
}

pub fn translate_star<T: Theory>(calc: &Calculus<T>, s: &StarExp<T::Op>) -> Result<Term<T::Op>> {
    s.check(calc, Fragment::Star)?;
    Ok(translate(s))
}

pub fn translate_polystar<T: Theory>(
    calc: &Calculus<T>,
    s: &StarExp<T::Op>,
) -> Result<Term<T::Op>> {
    s.check(calc, Fragment::Polystar)?;
    Ok(translate(s))
}

/// ProbGKAT expressions: polystar with return constants. A constant has no
/// unit to continue from, so `v e` translates to `v`.
pub fn probgkat_translate<T: Theory>(
    calc: &Calculus<T>,
    s: &StarExp<T::Op>,
) -> Result<Term<T::Op>> {
    s.check(calc, Fragment::ProbGkat)?;
    Ok(translate(s))
}

pub fn translate_in<T: Theory>(
    calc: &Calculus<T>,
    fragment: Fragment,
    s: &StarExp<T::Op>,
) -> Result<Term<T::Op>> {
    s.check(calc, fragment)?;
    Ok(translate(s))
}

/// Branches of the polystar semantics `ℓ`: `✓` is the unit variable.
pub type PolyBranch<T> = <T as Theory>::Elem<Target<StarExp<<T as Theory>::Op>>>;

/// `ℓ(s)`, with `✓` represented by the return variable `u_`.
pub fn polystar_step<T: Theory>(calc: &Calculus<T>, s: &StarExp<T::Op>) -> Result<PolyBranch<T>> {
    let th = &calc.theory;
    let ctx = TargetOrder::identity(&calc.actions);
    let tick = Target::Ret(Var::new(UNIT));
    Ok(match s {
        StarExp::Zero => th.zero(),
        StarExp::One => th.unit(tick),
        StarExp::Act(a) => th.unit(Target::Next(a.clone(), StarExp::One)),
        StarExp::Const(v) => th.unit(Target::Ret(v.clone())),
        StarExp::Op(o, e, f) => {
            th.apply(&ctx, o, &[polystar_step(calc, e)?, polystar_step(calc, f)?])?
        }
        StarExp::Seq(e, f) => {
            let after = polystar_step(calc, f)?;
            th.bind(&ctx, &polystar_step(calc, e)?, &mut |g| match g {
                Target::Ret(v) if v.as_str() == UNIT => after.clone(),
                Target::Ret(v) => th.unit(Target::Ret(v.clone())),
                Target::Next(a, e1) => th.unit(Target::Next(
                    a.clone(),
                    StarExp::seq(e1.clone(), (**f).clone()),
                )),
            })
        }
        StarExp::Loop(e, guard) => {
            let x = Target::Ret(Var::new(LOOP));
            let body = th.bind(&ctx, &polystar_step(calc, e)?, &mut |g| match g {
                Target::Ret(v) if v.as_str() == UNIT => th.unit(x.clone()),
                Target::Ret(v) => th.unit(Target::Ret(v.clone())),
                Target::Next(a, e1) => {
                    th.unit(Target::Next(a.clone(), StarExp::seq(e1.clone(), s.clone())))
                }
            });
            let p = normalize(th, &Discrete, &guard.poly())?;
            let filled = th.bind(&ctx, &p, &mut |v: &LoopVar| match v {
                LoopVar::X => body.clone(),
                LoopVar::Y => th.unit(tick.clone()),
            });
            th.lfp(&x, &filled)
        }
    })
}

/// The automaton of polystar expressions reachable from `s` under `ℓ`.
pub fn polystar_automaton<T: Theory>(
    calc: &Calculus<T>,
    s: &StarExp<T::Op>,
) -> Result<(OrderedAutomaton<T>, Vec<StarExp<T::Op>>)> {
    s.check(calc, Fragment::ProbGkat)
        .or_else(|_| s.check(calc, Fragment::Polystar))?;
    let mut index: BTreeMap<StarExp<T::Op>, usize> = BTreeMap::new();
    let mut exps = vec![s.clone()];
    index.insert(s.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut steps = Vec::new();
    while let Some(i) = queue.pop_front() {
        let b = polystar_step(calc, &exps[i])?;
        for g in calc.theory.support(&b) {
            if let Target::Next(_, e) = g {
                if !index.contains_key(&e) {
                    if exps.len() >= calc.max_states {
                        return Err(Error::ResourceLimit {
                            what: "reachable states".into(),
                            limit: calc.max_states,
                        });
                    }
                    index.insert(e.clone(), exps.len());
                    queue.push_back(exps.len());
                    exps.push(e);
                }
            }
        }
        steps.push((i, b));
    }
    steps.sort_by_key(|(i, _)| *i);
    let ctx = TargetOrder::identity(&calc.actions);
    let branches = steps
        .into_iter()
        .map(|(_, b)| {
            calc.theory
                .map(&ctx, &b, &mut |t: &Target<StarExp<T::Op>>| match t {
                    Target::Ret(v) => Target::Ret(v.clone()),
                    Target::Next(a, e) => Target::Next(a.clone(), index[e]),
                })
        })
        .collect();
    let labels = exps
        .iter()
        .map(|e| crate::syntax::format_star(&calc.theory, e))
        .collect();
    let a = OrderedAutomaton::from_parts(
        calc.theory.clone(),
        calc.actions.clone(),
        labels,
        branches,
        Vec::new(),
    )?;
    Ok((a, exps))
}

/// The loop payload `lfp_v p(x +_σ v, y)` of the loop-guard rewrite
/// `(e +_σ 1)^[p] = e^[lfp_v p(x +_σ v, y)]`.
pub fn loop_guard_rewrite<T: Theory>(
    theory: &T,
    sigma: &T::Op,
    p: &STerm<T::Op, LoopVar>,
) -> Result<STerm<T::Op, LoopVar>> {
    #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
    enum G {
        Loop(LoopVar),
        V,
    }
    check_binary(theory, sigma)?;
    let lifted = p.fold(
        &mut |g: &LoopVar| match g {
            LoopVar::X => STerm::Op(
                sigma.clone(),
                vec![STerm::Gen(G::Loop(LoopVar::X)), STerm::Gen(G::V)],
            ),
            LoopVar::Y => STerm::Gen(G::Loop(LoopVar::Y)),
        },
        &mut || STerm::Zero,
        &mut |o, kids| STerm::Op(o.clone(), kids),
    );
    let fixed = theory.lfp(&G::V, &normalize(theory, &Discrete, &lifted)?);
    Ok(theory
        .representative(&fixed)
        .map_gens(&mut |g: &G| match g {
            G::Loop(v) => *v,
            G::V => unreachable!("lfp removes the bound generator"),
        }))
}

/// Whether `e` counts as guarded in the fixpoint rule: `u_` is guarded in `τ(e)`.
pub fn is_productive<O: Clone>(e: &StarExp<O>) -> bool {
    translate(e).is_guarded(&Var::new(UNIT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour::behaviour_preorder;
    use crate::syntax::{parse_star, parse_term};
    use crate::theories::{Atoms, Join, Mix, SubDist};
    use crate::{Convex, ProbGkat, Semilattice};
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn same_behaviour<T: Theory>(calc: &Calculus<T>, e: &Term<T::Op>, f: &Term<T::Op>) -> bool {
        calc.behavioural_equiv(e, f).unwrap()
    }

    #[test]
    fn translation_clauses() {
        let calc = Calculus::new(Semilattice);
        let a: StarExp<Join> = StarExp::act("a");
        assert_eq!(translate(&a), parse_term(&calc, "a.u_").unwrap());
        let l = StarExp::star(a.clone(), Join);
        assert_eq!(
            translate(&l),
            parse_term(&calc, "mu l_. (a.l_ + u_)").unwrap()
        );
        let one_e = StarExp::seq(StarExp::One, a.clone());
        assert!(same_behaviour(&calc, &translate(&one_e), &translate(&a)));
        let poly = StarExp::polystar(
            a.clone(),
            STerm::Op(Join, vec![STerm::Gen(LoopVar::X), STerm::Gen(LoopVar::Y)]),
        );
        assert_eq!(translate(&poly), translate(&l));
    }

    #[test]
    fn exit_only_loop_is_one() {
        let calc = Calculus::new(Semilattice);
        let l = StarExp::polystar(StarExp::act("a"), STerm::Gen(LoopVar::Y));
        assert!(same_behaviour(
            &calc,
            &translate(&l),
            &translate(&StarExp::One)
        ));
    }

    #[test]
    fn nested_loops_do_not_capture() {
        let calc = Calculus::new(Semilattice);
        let inner = StarExp::star(StarExp::act("a"), Join);
        let outer = StarExp::star(StarExp::seq(inner, StarExp::act("b")), Join);
        let t = translate(&outer);
        assert_eq!(
            t.free_vars().into_iter().collect::<Vec<_>>(),
            vec![Var::new(UNIT)]
        );
        let (a, _) = polystar_automaton(&calc, &outer).unwrap();
        let ex = calc.reachable(&t).unwrap();
        let u = ex.automaton.disjoint_union(&a).unwrap();
        assert!(behaviour_preorder(&u)
            .unwrap()
            .equivalent(ex.root(), ex.automaton.len()));
    }

    #[test]
    fn bernoulli_loop_exit_weight() {
        let calc = Calculus::new(Convex::new());
        let p = STerm::Op(
            Mix(q(1, 3)),
            vec![STerm::Gen(LoopVar::X), STerm::Gen(LoopVar::Y)],
        );
        let l = StarExp::polystar(StarExp::act("a"), p);
        let ex = calc
            .reachable(&translate_polystar(&calc, &l).unwrap())
            .unwrap();
        let root = ex.automaton.branch(ex.root());
        assert_eq!(root.weight(&Target::Ret(Var::new(UNIT))), q(2, 3));
    }

    #[test]
    fn polystar_step_clauses() {
        let calc = Calculus::new(Convex::new());
        let tick = Target::Ret(Var::new(UNIT));
        assert_eq!(
            polystar_step(&calc, &StarExp::One).unwrap(),
            SubDist::point(tick.clone())
        );
        let ab = StarExp::seq(StarExp::act("a"), StarExp::act("b"));
        assert_eq!(
            polystar_step(&calc, &ab).unwrap(),
            SubDist::point(Target::Next(
                Action::new("a"),
                StarExp::seq(StarExp::One, StarExp::act("b"))
            ))
        );
        // (a ⊕_{1/2} 1)^[x ⊕_{1/2} y]: continue 1/3, exit 2/3.
        let half = || Mix(q(1, 2));
        let body = StarExp::op(half(), StarExp::act("a"), StarExp::One);
        let p = STerm::Op(half(), vec![STerm::Gen(LoopVar::X), STerm::Gen(LoopVar::Y)]);
        let l = StarExp::polystar(body, p);
        let b = polystar_step(&calc, &l).unwrap();
        assert_eq!(b.weight(&tick), q(2, 3));
        assert_eq!(b.mass(), q(1, 1));
        let r = q(1, 2);
        let s = q(1, 2);
        let guard = &r * &s / (q(1, 1) - &r * (q(1, 1) - &s));
        assert_eq!(q(1, 1) - b.weight(&tick), guard);
    }

    #[test]
    fn probgkat_constants_absorb_continuations() {
        let atoms = Atoms::new(["b", "nb"]).unwrap();
        let calc = Calculus::new(ProbGkat::new(atoms));
        let v = StarExp::Const(Var::new("v"));
        let ve = StarExp::seq(v.clone(), StarExp::act("a"));
        let t = probgkat_translate(&calc, &ve).unwrap();
        assert!(same_behaviour(
            &calc,
            &t,
            &probgkat_translate(&calc, &v).unwrap()
        ));
        let sl = Calculus::new(Semilattice);
        let w: StarExp<Join> = StarExp::Const(Var::new("v"));
        assert!(matches!(
            w.check(&sl, Fragment::ProbGkat),
            Err(Error::TheoryMismatch(_))
        ));
        let bad = StarExp::Const(Var::new(UNIT));
        assert!(matches!(
            probgkat_translate(&calc, &bad),
            Err(Error::ReservedVariable(_))
        ));
    }

    #[test]
    fn probgkat_while_loop() {
        let atoms = Atoms::new(["b", "nb"]).unwrap();
        let calc = Calculus::new(ProbGkat::new(atoms));
        let s = parse_star(&calc, "a*{x ?{b} y}; c").unwrap();
        let t = probgkat_translate(&calc, &s).unwrap();
        assert_eq!(calc.reachable(&t).unwrap().automaton.len(), 2);
        let coin = parse_star(&calc, "a +[1/2] b").unwrap();
        let ex = calc
            .reachable(&probgkat_translate(&calc, &coin).unwrap())
            .unwrap();
        let root = ex.automaton.branch(ex.root());
        for d in &root.0 {
            assert_eq!(d.support().len(), 2);
        }
    }

    #[test]
    fn loop_guard_rewrite_for_convex() {
        let calc = Calculus::new(Convex::new());
        let p = STerm::Op(
            Mix(q(1, 2)),
            vec![STerm::Gen(LoopVar::X), STerm::Gen(LoopVar::Y)],
        );
        let rewritten = loop_guard_rewrite(&calc.theory, &Mix(q(1, 2)), &p).unwrap();
        let e = StarExp::act("a");
        let lhs = StarExp::polystar(StarExp::op(Mix(q(1, 2)), e.clone(), StarExp::One), p);
        let rhs = StarExp::polystar(e, rewritten);
        assert!(same_behaviour(&calc, &translate(&lhs), &translate(&rhs)));
    }

    #[test]
    fn star_check_rejects_polynomials() {
        let calc = Calculus::new(Semilattice);
        let poly = StarExp::polystar(StarExp::act("a"), STerm::Gen(LoopVar::Y));
        assert!(translate_star(&calc, &poly).is_err());
        assert!(translate_polystar(&calc, &poly).is_ok());
        assert!(is_productive(&StarExp::<Join>::act("a")));
        assert!(!is_productive(&StarExp::<Join>::One));
    }
}
