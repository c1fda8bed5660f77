//! Systems of equations, the guarded-system solver and axiom checking.

use std::collections::BTreeSet;

use crate::calculus::{fresh_var, Action, Calculus, OrderedAutomaton, Target, Term, Var};
use crate::error::{Error, Result};
use crate::kernel::{normalize, Discrete, STerm, Theory};
use crate::relation::close_transitively;

/// Preordered indeterminates, each with one right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSystem<O> {
    names: Vec<Var>,
    rhs: Vec<Term<O>>,
    order: Vec<Vec<bool>>,
}

impl<O: Clone + Ord> EquationSystem<O> {
    /// Builds a system and checks that declared order pairs have
    /// `≤_exp`-related right-hand sides.
    pub fn new<T: Theory<Op = O>>(
        calc: &Calculus<T>,
        equations: Vec<(Var, Term<O>)>,
        order: Vec<(Var, Var)>,
    ) -> Result<Self> {
        let sys = Self::unchecked(equations, order)?;
        for t in &sys.rhs {
            calc.validate(t)?;
        }
        for i in 0..sys.len() {
            for j in 0..sys.len() {
                if i != j && sys.order[i][j] && !sys.rhs_leq(calc, i, j) {
                    return Err(Error::NotMonotone(format!(
                        "`{}` is declared below `{}` but its right-hand side is not",
                        sys.names[i], sys.names[j]
                    )));
                }
            }
        }
        Ok(sys)
    }

    fn unchecked(equations: Vec<(Var, Term<O>)>, order: Vec<(Var, Var)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut rhs = Vec::new();
        for (x, t) in equations {
            if names.contains(&x) {
                return Err(Error::Invalid(format!("`{x}` is defined twice")));
            }
            names.push(x);
            rhs.push(t);
        }
        let n = names.len();
        let mut rel = vec![vec![false; n]; n];
        for (i, row) in rel.iter_mut().enumerate() {
            row[i] = true;
        }
        let index = |x: &Var| {
            names
                .iter()
                .position(|y| y == x)
                .ok_or_else(|| Error::Invalid(format!("unknown indeterminate `{x}`")))
        };
        for (x, y) in &order {
            rel[index(x)?][index(y)?] = true;
        }
        close_transitively(&mut rel);
        Ok(EquationSystem {
            names,
            rhs,
            order: rel,
        })
    }

    fn rhs_leq<T: Theory<Op = O>>(&self, calc: &Calculus<T>, i: usize, j: usize) -> bool {
        let vars = |u: &Var, v: &Var| {
            u == v
                || match (self.index_of(u), self.index_of(v)) {
                    (Some(a), Some(b)) => self.order[a][b],
                    _ => false,
                }
        };
        calc.exp_leq_with(&self.rhs[i], &self.rhs[j], &vars, true)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn indeterminates(&self) -> &[Var] {
        &self.names
    }

    pub fn rhs(&self, i: usize) -> &Term<O> {
        &self.rhs[i]
    }

    pub fn index_of(&self, x: &Var) -> Option<usize> {
        self.names.iter().position(|y| y == x)
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order[i][j]
    }

    /// Strictly declared pairs, in declaration order.
    pub fn order_pairs(&self) -> Vec<(Var, Var)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.order[i][j] {
                    out.push((self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        out
    }

    /// Every indeterminate must occur only under actions.
    pub fn check_guarded(&self) -> Result<()> {
        for (i, t) in self.rhs.iter().enumerate() {
            for x in &self.names {
                if !t.is_guarded(x) {
                    return Err(Error::Unguarded {
                        indeterminate: x.to_string(),
                        equation: self.names[i].to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Which minimal indeterminate the solver eliminates first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    DeclarationOrder,
    ReverseDeclarationOrder,
}

/// One closed term per indeterminate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution<O> {
    pub indeterminates: Vec<Var>,
    pub terms: Vec<Term<O>>,
}

impl<O> Solution<O> {
    pub fn get(&self, x: &Var) -> Option<&Term<O>> {
        self.indeterminates
            .iter()
            .position(|y| y == x)
            .map(|i| &self.terms[i])
    }
}

/// Solves a guarded system by repeatedly closing a minimal equation with `μ`
/// and substituting it into the others, then back-substituting.
pub fn solve_guarded<O: Clone + Ord>(
    sys: &EquationSystem<O>,
    tie: TieBreak,
) -> Result<Solution<O>> {
    sys.check_guarded()?;
    let n = sys.len();
    let mut rhs = sys.rhs.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut eliminated: Vec<(usize, Term<O>)> = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let minimal = |k: &usize| {
            remaining
                .iter()
                .all(|&j| j == *k || !sys.order[j][*k] || sys.order[*k][j])
        };
        let pick = match tie {
            TieBreak::DeclarationOrder => remaining.iter().copied().find(minimal),
            TieBreak::ReverseDeclarationOrder => remaining.iter().rev().copied().find(minimal),
        }
        .expect("a finite preorder has minimal elements");
        let x = &sys.names[pick];
        let f = if rhs[pick].is_free(x) {
            Term::Mu(x.clone(), Box::new(rhs[pick].clone()))
        } else {
            rhs[pick].clone()
        };
        remaining.retain(|&j| j != pick);
        for &j in &remaining {
            if rhs[j].is_free(x) {
                rhs[j] = rhs[j].substitute(&f, x);
            }
        }
        eliminated.push((pick, f));
    }
    let mut terms: Vec<Option<Term<O>>> = vec![None; n];
    let mut known: Vec<(Var, Term<O>)> = Vec::new();
    for (k, f) in eliminated.into_iter().rev() {
        let relevant: Vec<(Var, Term<O>)> = known
            .iter()
            .filter(|(y, _)| f.is_free(y))
            .cloned()
            .collect();
        let t = f.substitute_many(&relevant);
        known.push((sys.names[k].clone(), t.clone()));
        terms[k] = Some(t);
    }
    Ok(Solution {
        indeterminates: sys.names.clone(),
        terms: terms
            .into_iter()
            .map(|t| t.expect("every indeterminate is eliminated"))
            .collect(),
    })
}

/// Instantiates an S-term over branch generators as a process term, naming
/// state `i` by `names[i]`.
pub fn branch_term<O: Clone>(t: &STerm<O, Target<usize>>, names: &[Var]) -> Term<O> {
    match t {
        STerm::Zero => Term::Zero,
        STerm::Gen(Target::Ret(v)) => Term::Ret(v.clone()),
        STerm::Gen(Target::Next(a, s)) => {
            Term::Prefix(a.clone(), Box::new(Term::Ret(names[*s].clone())))
        }
        STerm::Op(o, args) => Term::Op(
            o.clone(),
            args.iter().map(|a| branch_term(a, names)).collect(),
        ),
    }
}

/// One guarded equation per state, built from a representative of its branch.
pub fn associated_system<T: Theory>(a: &OrderedAutomaton<T>) -> EquationSystem<T::Op> {
    let mut taken: BTreeSet<Var> = BTreeSet::new();
    for b in a.branches() {
        for g in a.theory.support(b) {
            if let Target::Ret(v) = g {
                taken.insert(v);
            }
        }
    }
    let mut names = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let base = Var::new(format!("x{i}"));
        let x = if taken.contains(&base) {
            fresh_var(&base, &taken)
        } else {
            base
        };
        taken.insert(x.clone());
        names.push(x);
    }
    let rhs = a
        .branches()
        .iter()
        .map(|b| branch_term(&a.theory.representative(b), &names))
        .collect();
    let mut order = vec![vec![false; a.len()]; a.len()];
    for (i, row) in order.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a.declared_leq(i, j);
        }
    }
    EquationSystem { names, rhs, order }
}

/// The term synthesised for state `x` by solving the associated system.
pub fn canonical_term<T: Theory>(a: &OrderedAutomaton<T>, x: usize) -> Result<Term<T::Op>> {
    Ok(canonical_terms(a)?.terms.swap_remove(x))
}

pub fn canonical_terms<T: Theory>(a: &OrderedAutomaton<T>) -> Result<Solution<T::Op>> {
    solve_guarded(&associated_system(a), TieBreak::default())
}

impl<T: Theory> Calculus<T> {
    /// Provability of `e ⊑ f`, which coincides with `e ≤_b f`.
    pub fn prove_leq(&self, e: &Term<T::Op>, f: &Term<T::Op>) -> Result<bool> {
        self.behavioural_leq(e, f)
    }

    /// Checks `φ(x) ≡_b rhs(x)[φ]` for every equation.
    pub fn is_solution(&self, sys: &EquationSystem<T::Op>, sol: &Solution<T::Op>) -> Result<bool> {
        let subst: Vec<(Var, Term<T::Op>)> = sys
            .names
            .iter()
            .cloned()
            .zip(sol.terms.iter().cloned())
            .collect();
        for (i, t) in sol.terms.iter().enumerate() {
            let unfolded = sys.rhs[i].substitute_many(&subst);
            if !self.behavioural_equiv(t, &unfolded)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Leaves of the S-terms in axiom instances: return variables or argument slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hole {
    Var(Var),
    Arg(usize),
}

/// `p(f⃗)`: fills argument slots with terms and variables with returns.
pub fn instantiate<O: Clone>(p: &STerm<O, Hole>, args: &[Term<O>]) -> Result<Term<O>> {
    Ok(match p {
        STerm::Zero => Term::Zero,
        STerm::Gen(Hole::Var(v)) => Term::Ret(v.clone()),
        STerm::Gen(Hole::Arg(i)) => args
            .get(*i)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("argument slot {i} has no term")))?,
        STerm::Op(o, xs) => Term::Op(
            o.clone(),
            xs.iter()
                .map(|x| instantiate(x, args))
                .collect::<Result<_>>()?,
        ),
    })
}

/// One instantiated rule of the axiomatic order.
#[derive(Clone, Debug)]
pub enum Derivation<O> {
    /// `p ⊑_Ie q` in the theory gives `p(f⃗) ⊑ q(f⃗)`.
    Ie {
        lhs: STerm<O, Hole>,
        rhs: STerm<O, Hole>,
        args: Vec<Term<O>>,
    },
    /// `σ₁ ≤ σ₂` gives `σ₁(e⃗) ⊑ σ₂(e⃗)`.
    S {
        lower: O,
        upper: O,
        args: Vec<Term<O>>,
    },
    /// `a₁ ≤ a₂` gives `a₁e ⊑ a₂e`.
    Act {
        lower: Action,
        upper: Action,
        body: Term<O>,
    },
    /// `βv p(v, f⃗) ≡ (lfp_v p)(f⃗)` when `v` is guarded in every `fᵢ`.
    R1a {
        var: Var,
        p: STerm<O, Hole>,
        args: Vec<Term<O>>,
    },
    /// `(βv e)⟪μv e // v⟫ ⊑ μv e`.
    R1b { var: Var, body: Term<O> },
    /// `p(g, f⃗) ⊑ g` and `v` guarded in every `fᵢ` give `βv p(v, f⃗) ⊑ g`.
    R2a {
        var: Var,
        p: STerm<O, Hole>,
        args: Vec<Term<O>>,
        bound: Term<O>,
    },
    /// `(βv e)⟪g // v⟫ ⊑ g` gives `μv e ⊑ g`.
    R2b {
        var: Var,
        body: Term<O>,
        bound: Term<O>,
    },
    /// `g ⊑ (βv e)⟪g // v⟫` gives `g ⊑ μv e`.
    R3 {
        var: Var,
        body: Term<O>,
        bound: Term<O>,
    },
    /// `v` guarded in `e` and `e[g/v] ≡ g` give `μv e ≡ g`.
    Ufp {
        var: Var,
        body: Term<O>,
        solution: Term<O>,
    },
}

impl<O> Derivation<O> {
    pub fn rule(&self) -> &'static str {
        match self {
            Derivation::Ie { .. } => "Ie",
            Derivation::S { .. } => "S",
            Derivation::Act { .. } => "Act",
            Derivation::R1a { .. } => "R1a",
            Derivation::R1b { .. } => "R1b",
            Derivation::R2a { .. } => "R2a",
            Derivation::R2b { .. } => "R2b",
            Derivation::R3 { .. } => "R3",
            Derivation::Ufp { .. } => "UFP",
        }
    }
}

pub const RULES: [&str; 9] = ["Ie", "S", "Act", "R1a", "R1b", "R2a", "R2b", "R3", "UFP"];

/// The outcome of checking one rule instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceCheck {
    pub side_conditions: bool,
    pub premises: bool,
    pub conclusion: bool,
}

impl InstanceCheck {
    /// Side conditions hold and the conclusion holds whenever the premises do.
    pub fn holds(&self) -> bool {
        self.side_conditions && (!self.premises || self.conclusion)
    }

    /// A counterexample to soundness.
    pub fn violated(&self) -> bool {
        self.side_conditions && self.premises && !self.conclusion
    }
}

fn check_arity<T: Theory>(theory: &T, p: &STerm<T::Op, Hole>, args: usize) -> Result<()> {
    let mut res = Ok(());
    p.fold(&mut |_| (), &mut || (), &mut |o, kids: Vec<()>| {
        if res.is_ok() {
            res = theory.validate_op(o).and_then(|_| {
                if theory.arity(o) == kids.len() {
                    Ok(())
                } else {
                    Err(Error::ArityMismatch {
                        expected: theory.arity(o),
                        found: kids.len(),
                    })
                }
            });
        }
    });
    res?;
    for h in p.generators() {
        if let Hole::Arg(i) = h {
            if i >= args {
                return Err(Error::Invalid(format!("argument slot {i} has no term")));
            }
        }
    }
    Ok(())
}

impl<T: Theory> Calculus<T> {
    /// Validates one rule application: side conditions, then behavioural
    /// truth of the conclusion given behavioural truth of the premises.
    pub fn check_axiom_instance(&self, d: &Derivation<T::Op>) -> Result<InstanceCheck> {
        let th = &self.theory;
        let leq = |e: &Term<T::Op>, f: &Term<T::Op>| self.behavioural_leq(e, f);
        let equiv = |e: &Term<T::Op>, f: &Term<T::Op>| self.behavioural_equiv(e, f);
        let all_guarded = |v: &Var, args: &[Term<T::Op>]| args.iter().all(|f| f.is_guarded(v));
        let check = |side: bool,
                     premises: &dyn Fn() -> Result<bool>,
                     conclusion: &dyn Fn() -> Result<bool>| {
            if !side {
                return Ok(InstanceCheck {
                    side_conditions: false,
                    premises: false,
                    conclusion: false,
                });
            }
            let premises = premises()?;
            Ok(InstanceCheck {
                side_conditions: true,
                premises,
                conclusion: conclusion()?,
            })
        };
        match d {
            Derivation::Ie { lhs, rhs, args } => {
                check_arity(th, lhs, args.len())?;
                check_arity(th, rhs, args.len())?;
                let side = th.leq(
                    &Discrete,
                    &normalize(th, &Discrete, lhs)?,
                    &normalize(th, &Discrete, rhs)?,
                )?;
                let (e, f) = (instantiate(lhs, args)?, instantiate(rhs, args)?);
                check(side, &|| Ok(true), &|| leq(&e, &f))
            }
            Derivation::S { lower, upper, args } => {
                let e = Term::Op(lower.clone(), args.clone());
                let f = Term::Op(upper.clone(), args.clone());
                self.validate(&e)?;
                self.validate(&f)?;
                check(th.op_leq(lower, upper), &|| Ok(true), &|| leq(&e, &f))
            }
            Derivation::Act { lower, upper, body } => {
                let e = Term::Prefix(lower.clone(), Box::new(body.clone()));
                let f = Term::Prefix(upper.clone(), Box::new(body.clone()));
                check(self.actions.leq(lower, upper), &|| Ok(true), &|| {
                    leq(&e, &f)
                })
            }
            Derivation::R1a { var, p, args } => {
                check_arity(th, p, args.len())?;
                let e = Term::Beta(var.clone(), Box::new(instantiate(p, args)?));
                let fixed = th.lfp(&Hole::Var(var.clone()), &normalize(th, &Discrete, p)?);
                let f = instantiate(&th.representative(&fixed), args)?;
                check(all_guarded(var, args), &|| Ok(true), &|| equiv(&e, &f))
            }
            Derivation::R1b { var, body } => {
                let mu = Term::Mu(var.clone(), Box::new(body.clone()));
                let e =
                    Term::Beta(var.clone(), Box::new(body.clone())).guarded_substitute(&mu, var);
                check(true, &|| Ok(true), &|| leq(&e, &mu))
            }
            Derivation::R2a {
                var,
                p,
                args,
                bound,
            } => {
                check_arity(th, p, args.len())?;
                let mut with_bound = args.clone();
                with_bound.push(bound.clone());
                let v_hole = Hole::Var(var.clone());
                let slot = Hole::Arg(args.len());
                let at_bound = p.map_gens(&mut |h: &Hole| {
                    if *h == v_hole {
                        slot.clone()
                    } else {
                        h.clone()
                    }
                });
                let premise_term = instantiate(&at_bound, &with_bound)?;
                let e = Term::Beta(var.clone(), Box::new(instantiate(p, args)?));
                check(
                    all_guarded(var, args),
                    &|| leq(&premise_term, bound),
                    &|| leq(&e, bound),
                )
            }
            Derivation::R2b { var, body, bound } => {
                let unfolded =
                    Term::Beta(var.clone(), Box::new(body.clone())).guarded_substitute(bound, var);
                let mu = Term::Mu(var.clone(), Box::new(body.clone()));
                check(true, &|| leq(&unfolded, bound), &|| leq(&mu, bound))
            }
            Derivation::R3 { var, body, bound } => {
                let unfolded =
                    Term::Beta(var.clone(), Box::new(body.clone())).guarded_substitute(bound, var);
                let mu = Term::Mu(var.clone(), Box::new(body.clone()));
                check(true, &|| leq(bound, &unfolded), &|| leq(bound, &mu))
            }
            Derivation::Ufp {
                var,
                body,
                solution,
            } => {
                let unfolded = body.substitute(solution, var);
                let mu = Term::Mu(var.clone(), Box::new(body.clone()));
                check(
                    body.is_guarded(var),
                    &|| equiv(&unfolded, solution),
                    &|| equiv(&mu, solution),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ActionOrder;
    use crate::syntax::parse_term;
    use crate::theories::{Atoms, GuardedTheory, Join};
    use crate::{Convex, Semilattice};

    fn eqs<T: Theory>(calc: &Calculus<T>, lines: &[(&str, &str)]) -> Vec<(Var, Term<T::Op>)> {
        lines
            .iter()
            .map(|(x, t)| (Var::new(x), parse_term(calc, t).unwrap()))
            .collect()
    }

    fn gkat() -> Calculus<GuardedTheory> {
        Calculus::new(GuardedTheory::new(Atoms::new(["al1", "al2"]).unwrap()))
    }

    #[test]
    fn single_loop_solves_to_mu() {
        let calc = Calculus::new(Semilattice);
        let sys = EquationSystem::new(&calc, eqs(&calc, &[("x", "a.x")]), vec![]).unwrap();
        let sol = solve_guarded(&sys, TieBreak::default()).unwrap();
        assert_eq!(sol.terms[0], parse_term(&calc, "mu x. a.x").unwrap());
    }

    #[test]
    fn chained_system_back_substitutes() {
        let calc = Calculus::new(Semilattice);
        let sys =
            EquationSystem::new(&calc, eqs(&calc, &[("x", "a.y"), ("y", "b.y")]), vec![]).unwrap();
        let sol = solve_guarded(&sys, TieBreak::default()).unwrap();
        let expected = parse_term(&calc, "a.(mu y. b.y)").unwrap();
        assert!(sol.terms[0].free_vars().is_empty());
        assert!(calc.behavioural_equiv(&sol.terms[0], &expected).unwrap());
        assert!(calc.is_solution(&sys, &sol).unwrap());
    }

    #[test]
    fn unguarded_equation_is_reported() {
        let calc = Calculus::new(Semilattice);
        let sys = EquationSystem::new(&calc, eqs(&calc, &[("x", "x")]), vec![]).unwrap();
        match solve_guarded(&sys, TieBreak::default()) {
            Err(Error::Unguarded {
                indeterminate,
                equation,
            }) => {
                assert_eq!((indeterminate.as_str(), equation.as_str()), ("x", "x"));
            }
            other => panic!("expected an unguarded error, got {other:?}"),
        }
    }

    fn eg2(calc: &Calculus<GuardedTheory>) -> EquationSystem<crate::theories::AtomSet> {
        EquationSystem::new(
            calc,
            eqs(
                calc,
                &[
                    ("x1", "a.x2 ?{al1} v"),
                    ("x2", "a.x2 ?{al1} v"),
                    ("x3", "a.x2 ?{al1} 0"),
                ],
            ),
            vec![
                (Var::new("x1"), Var::new("x2")),
                (Var::new("x3"), Var::new("x2")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ordered_gkat_system_solutions_are_ordered() {
        let calc = gkat();
        let sys = eg2(&calc);
        let a = solve_guarded(&sys, TieBreak::DeclarationOrder).unwrap();
        let b = solve_guarded(&sys, TieBreak::ReverseDeclarationOrder).unwrap();
        assert!(calc.is_solution(&sys, &a).unwrap());
        assert!(calc.is_solution(&sys, &b).unwrap());
        for i in 0..3 {
            assert!(calc.behavioural_equiv(&a.terms[i], &b.terms[i]).unwrap());
        }
        assert!(calc.behavioural_leq(&a.terms[0], &a.terms[1]).unwrap());
        assert!(calc.behavioural_leq(&a.terms[2], &a.terms[1]).unwrap());
        assert!(!calc.behavioural_leq(&a.terms[1], &a.terms[2]).unwrap());
    }

    #[test]
    fn non_monotone_system_is_rejected() {
        let calc = gkat();
        let res = EquationSystem::new(
            &calc,
            eqs(&calc, &[("x", "a.x ?{al1} v"), ("y", "a.y ?{al1} 0")]),
            vec![(Var::new("x"), Var::new("y"))],
        );
        assert!(matches!(res, Err(Error::NotMonotone(_))));
        let dup = EquationSystem::new(&calc, eqs(&calc, &[("x", "v"), ("x", "v")]), vec![]);
        assert!(matches!(dup, Err(Error::Invalid(_))));
    }

    #[test]
    fn associated_system_of_the_gkat_automaton() {
        let calc = gkat();
        let th = calc.theory.clone();
        let next = |s| Some(Target::Next(Action::new("a"), s));
        let ret = Some(Target::Ret(Var::new("v")));
        let branches = vec![
            th.table(vec![next(1), ret.clone()]).unwrap(),
            th.table(vec![next(1), ret]).unwrap(),
            th.table(vec![next(1), None]).unwrap(),
        ];
        let a = OrderedAutomaton::from_parts(
            th,
            ActionOrder::discrete(),
            vec!["x1".into(), "x2".into(), "x3".into()],
            branches,
            vec![(0, 1), (2, 1)],
        )
        .unwrap();
        let sys = associated_system(&a);
        let expected = ["a.x1 ?{al1} v", "a.x1 ?{al1} v", "a.x1 ?{al1} 0"];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(sys.rhs(i), &parse_term(&calc, e).unwrap());
        }
        assert!(sys.leq(0, 1) && sys.leq(2, 1) && !sys.leq(1, 0));
    }

    #[test]
    fn canonical_terms_round_trip() {
        let calc = Calculus::new(Semilattice);
        for src in ["mu u. a.u", "v", "a.0 + a.a.v", "mu x. (a.x + b.v)"] {
            let e = parse_term(&calc, src).unwrap();
            let ex = calc.reachable(&e).unwrap();
            let c = canonical_term(&ex.automaton, ex.root()).unwrap();
            assert!(calc.behavioural_equiv(&e, &c).unwrap(), "{src}");
        }
        let v = parse_term(&calc, "v").unwrap();
        let ex = calc.reachable(&v).unwrap();
        assert_eq!(canonical_term(&ex.automaton, 0).unwrap(), v);
    }

    #[test]
    fn prove_leq_examples() {
        let calc = Calculus::new(Convex::new());
        let e1 = parse_term(&calc, "mu x. (x +[1/2] a.x)").unwrap();
        let e3 = parse_term(&calc, "mu x. a.x").unwrap();
        assert!(calc.prove_leq(&e1, &e3).unwrap() && calc.prove_leq(&e3, &e1).unwrap());
        assert!(calc.prove_leq(&Term::Zero, &e1).unwrap());
        assert!(calc.prove_leq(&e1, &e1).unwrap());
    }

    #[test]
    fn axiom_instances() {
        let calc = Calculus::new(Semilattice);
        let t = |s: &str| parse_term(&calc, s).unwrap();
        let v = Var::new("v");
        let r1b = Derivation::R1b {
            var: v.clone(),
            body: t("v + a.v + b.w"),
        };
        assert!(calc.check_axiom_instance(&r1b).unwrap().holds());

        let ufp = Derivation::Ufp {
            var: v.clone(),
            body: t("a.v"),
            solution: t("mu w. a.a.w"),
        };
        let c = calc.check_axiom_instance(&ufp).unwrap();
        assert!(c.side_conditions && c.premises && c.conclusion);

        let s = Derivation::S {
            lower: Join,
            upper: Join,
            args: vec![t("a.v"), t("b.v")],
        };
        assert!(calc.check_axiom_instance(&s).unwrap().holds());

        // v ∨ x₀ under lfp_v is x₀.
        let p = STerm::Op(
            Join,
            vec![STerm::Gen(Hole::Var(v.clone())), STerm::Gen(Hole::Arg(0))],
        );
        let r1a = Derivation::R1a {
            var: v.clone(),
            p: p.clone(),
            args: vec![t("a.v")],
        };
        let c = calc.check_axiom_instance(&r1a).unwrap();
        assert!(c.side_conditions && c.conclusion);
        let unguarded = Derivation::R1a {
            var: v.clone(),
            p,
            args: vec![t("v")],
        };
        assert!(
            !calc
                .check_axiom_instance(&unguarded)
                .unwrap()
                .side_conditions
        );

        let r2b = Derivation::R2b {
            var: v.clone(),
            body: t("a.v"),
            bound: t("mu u. a.u"),
        };
        let c = calc.check_axiom_instance(&r2b).unwrap();
        assert!(c.premises && c.conclusion);

        let r3 = Derivation::R3 {
            var: v.clone(),
            body: t("a.v + b.0"),
            bound: t("0"),
        };
        assert!(calc.check_axiom_instance(&r3).unwrap().holds());

        let bad = Derivation::Ie {
            lhs: STerm::Gen(Hole::Arg(3)),
            rhs: STerm::Zero,
            args: vec![],
        };
        assert!(calc.check_axiom_instance(&bad).is_err());
    }
}
