//! The small-step semantics `ε` and reachable-automaton extraction.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::automaton::OrderedAutomaton;
use super::term::{Action, ActionOrder, Term, Var};
use crate::error::{Error, Result};
use crate::kernel::{GenOrder, Theory};

/// Generators of a branch: `Var ⊎ Act × S`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target<S> {
    Ret(Var),
    Next(Action, S),
}

impl<S> Target<S> {
    pub fn state(&self) -> Option<&S> {
        match self {
            Target::Ret(_) => None,
            Target::Next(_, s) => Some(s),
        }
    }
}

/// Return variables discrete, pairs ordered by `≤_act × states`.
pub struct TargetOrder<'a, F> {
    pub actions: &'a ActionOrder,
    pub states: F,
    pub discrete: bool,
}

impl<'a, F> TargetOrder<'a, F> {
    pub fn new(actions: &'a ActionOrder, states: F) -> Self {
        TargetOrder {
            actions,
            states,
            discrete: false,
        }
    }
}

impl<S: PartialEq> TargetOrder<'_, fn(&S, &S) -> bool> {
    /// Pairs compared by action order and state identity.
    pub fn identity(actions: &ActionOrder) -> TargetOrder<'_, fn(&S, &S) -> bool> {
        TargetOrder {
            actions,
            states: |a: &S, b: &S| a == b,
            discrete: actions.is_discrete(),
        }
    }
}

impl<S, F: Fn(&S, &S) -> bool> GenOrder<Target<S>> for TargetOrder<'_, F> {
    fn leq(&self, a: &Target<S>, b: &Target<S>) -> bool {
        match (a, b) {
            (Target::Ret(u), Target::Ret(v)) => u == v,
            (Target::Next(a, x), Target::Next(b, y)) => {
                self.actions.leq(a, b) && (self.states)(x, y)
            }
            _ => false,
        }
    }

    fn is_discrete(&self) -> bool {
        self.discrete
    }
}

pub type TermBranch<T> = <T as Theory>::Elem<Target<Term<<T as Theory>::Op>>>;

/// A theory together with the declared actions and resource caps.
#[derive(Clone, Debug)]
pub struct Calculus<T: Theory> {
    pub theory: T,
    pub actions: ActionOrder,
    pub max_states: usize,
}

/// The automaton of states reachable from some roots.
#[derive(Clone, Debug)]
pub struct Explored<T: Theory> {
    pub automaton: OrderedAutomaton<T>,
    pub terms: Vec<Term<T::Op>>,
    pub roots: Vec<usize>,
}

impl<T: Theory> Explored<T> {
    pub fn root(&self) -> usize {
        self.roots[0]
    }
}

pub const DEFAULT_MAX_STATES: usize = 10_000;

impl<T: Theory> Calculus<T> {
    pub fn new(theory: T) -> Self {
        Calculus {
            theory,
            actions: ActionOrder::discrete(),
            max_states: DEFAULT_MAX_STATES,
        }
    }

    pub fn with_actions(theory: T, actions: ActionOrder) -> Self {
        Calculus {
            theory,
            actions,
            max_states: DEFAULT_MAX_STATES,
        }
    }

    /// Checks operation payloads and declared actions.
    pub fn validate(&self, e: &Term<T::Op>) -> Result<()> {
        let mut res = Ok(());
        e.visit(&mut |t| {
            if res.is_err() {
                return;
            }
            res = match t {
                Term::Op(o, args) => self.theory.validate_op(o).and_then(|_| {
                    let n = self.theory.arity(o);
                    if n == args.len() {
                        Ok(())
                    } else {
                        Err(Error::ArityMismatch {
                            expected: n,
                            found: args.len(),
                        })
                    }
                }),
                Term::Prefix(a, _) => self.actions.check(a),
                _ => Ok(()),
            };
        });
        res
    }

    fn order(&self) -> TargetOrder<'_, fn(&Term<T::Op>, &Term<T::Op>) -> bool> {
        TargetOrder::identity(&self.actions)
    }

    /// `ε(e)`.
    pub fn step(&self, e: &Term<T::Op>) -> Result<TermBranch<T>> {
        let th = &self.theory;
        let ctx = self.order();
        Ok(match e {
            Term::Ret(v) => th.unit(Target::Ret(v.clone())),
            Term::Zero => th.zero(),
            Term::Op(o, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.step(a))
                    .collect::<Result<Vec<_>>>()?;
                th.apply(&ctx, o, &vals)?
            }
            Term::Prefix(a, f) => th.unit(Target::Next(a.clone(), (**f).clone())),
            Term::Beta(v, f) => th.lfp(&Target::Ret(v.clone()), &self.step(f)?),
            Term::Mu(v, f) => {
                let inner = self.step(f)?;
                let subst = self.guarded_substitute(&inner, e, v);
                th.lfp(&Target::Ret(v.clone()), &subst)
            }
        })
    }

    /// `p[g // v]` on branch elements.
    pub fn guarded_substitute(&self, p: &TermBranch<T>, g: &Term<T::Op>, v: &Var) -> TermBranch<T> {
        let th = &self.theory;
        th.map(&self.order(), p, &mut |t| match t {
            Target::Ret(_) => t.clone(),
            Target::Next(a, f) => Target::Next(a.clone(), f.substitute(g, v)),
        })
    }

    /// Monotonicity witness order: compares branches with `≤_act × ≤_exp`.
    pub fn branch_leq_exp(&self, p: &TermBranch<T>, q: &TermBranch<T>) -> Result<bool> {
        let ord = TargetOrder::new(&self.actions, |x: &Term<T::Op>, y: &Term<T::Op>| {
            self.exp_leq(x, y)
        });
        self.theory.leq(&ord, p, q)
    }

    /// The term order `≤_exp` generated by the action and operation orders.
    pub fn exp_leq(&self, e: &Term<T::Op>, f: &Term<T::Op>) -> bool {
        self.exp_leq_with(e, f, &|u, v| u == v, false)
    }

    /// `≤_exp` extended with a variable order and, optionally, `0 ≤ e`.
    pub fn exp_leq_with(
        &self,
        e: &Term<T::Op>,
        f: &Term<T::Op>,
        vars: &dyn Fn(&Var, &Var) -> bool,
        zero_least: bool,
    ) -> bool {
        match (e, f) {
            (Term::Zero, _) if zero_least => true,
            (Term::Zero, Term::Zero) => true,
            (Term::Ret(u), Term::Ret(v)) => vars(u, v),
            (Term::Op(o1, a1), Term::Op(o2, a2)) => {
                self.theory.op_leq(o1, o2)
                    && a1.len() == a2.len()
                    && a1
                        .iter()
                        .zip(a2)
                        .all(|(x, y)| self.exp_leq_with(x, y, vars, zero_least))
            }
            (Term::Prefix(a, x), Term::Prefix(b, y)) => {
                self.actions.leq(a, b) && self.exp_leq_with(x, y, vars, zero_least)
            }
            (Term::Beta(u, x), Term::Beta(v, y)) | (Term::Mu(u, x), Term::Mu(v, y)) => {
                u == v && self.exp_leq_with(x, y, vars, zero_least)
            }
            _ => false,
        }
    }

    pub fn reachable(&self, e: &Term<T::Op>) -> Result<Explored<T>> {
        self.reachable_many(std::slice::from_ref(e))
    }

    /// Explores the states reachable from every root, sharing identical terms.
    pub fn reachable_many(&self, roots: &[Term<T::Op>]) -> Result<Explored<T>> {
        let mut index: BTreeMap<Term<T::Op>, usize> = BTreeMap::new();
        let mut terms: Vec<Term<T::Op>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut root_ids = Vec::new();
        let intern = |t: &Term<T::Op>,
                      index: &mut BTreeMap<Term<T::Op>, usize>,
                      terms: &mut Vec<Term<T::Op>>,
                      queue: &mut VecDeque<usize>|
         -> Result<usize> {
            if let Some(&i) = index.get(t) {
                return Ok(i);
            }
            if terms.len() >= self.max_states {
                return Err(Error::ResourceLimit {
                    what: "reachable states".into(),
                    limit: self.max_states,
                });
            }
            let i = terms.len();
            index.insert(t.clone(), i);
            terms.push(t.clone());
            queue.push_back(i);
            Ok(i)
        };
        for r in roots {
            self.validate(r)?;
            root_ids.push(intern(r, &mut index, &mut terms, &mut queue)?);
        }
        let mut steps: Vec<Option<TermBranch<T>>> = Vec::new();
        while let Some(i) = queue.pop_front() {
            let b = self.step(&terms[i].clone())?;
            for g in self.theory.support(&b) {
                if let Target::Next(_, s) = g {
                    intern(&s, &mut index, &mut terms, &mut queue)?;
                }
            }
            if steps.len() <= i {
                steps.resize(i + 1, None);
            }
            steps[i] = Some(b);
        }
        let ctx = TargetOrder::identity(&self.actions);
        let branches = steps
            .into_iter()
            .map(|b| {
                let b = b.expect("every interned state is stepped");
                self.theory
                    .map(&ctx, &b, &mut |t: &Target<Term<T::Op>>| match t {
                        Target::Ret(v) => Target::Ret(v.clone()),
                        Target::Next(a, s) => Target::Next(a.clone(), index[s]),
                    })
            })
            .collect();
        let labels = terms
            .iter()
            .map(|t| crate::syntax::format_term(&self.theory, t))
            .collect();
        let automaton = OrderedAutomaton::from_parts(
            self.theory.clone(),
            self.actions.clone(),
            labels,
            branches,
            Vec::new(),
        )?;
        Ok(Explored {
            automaton,
            terms,
            roots: root_ids,
        })
    }
}

/// The finite set `U(e)` bounding the reachable states of `e`.
pub fn closure_bound<O: Clone + Ord>(e: &Term<O>) -> BTreeSet<Term<O>> {
    let mut out = BTreeSet::new();
    out.insert(e.clone());
    match e {
        Term::Ret(_) | Term::Zero => {}
        Term::Prefix(_, f) => out.extend(closure_bound(f)),
        Term::Op(_, args) => args.iter().for_each(|a| out.extend(closure_bound(a))),
        Term::Beta(v, f) => out.extend(closure_bound(&f.zero_unguarded(v))),
        Term::Mu(v, f) => {
            for g in closure_bound(&f.zero_unguarded(v)) {
                out.insert(g.substitute(e, v));
            }
        }
    }
    out
}
