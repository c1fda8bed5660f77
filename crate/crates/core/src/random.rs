//! Seeded generators for terms, S-terms, star expressions and automata.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{Action, ActionOrder, OrderedAutomaton, Target, Term, Var};
use crate::error::Result;
use crate::fragments::{LoopGuard, LoopVar, StarExp};
use crate::kernel::{normalize, Discrete, Gen, STerm, Theory};
use crate::theories::{
    AtomSet, ConvexTheory, GuardedTheory, Join, Mix, PgOp, ProbGkatTheory, SemilatticeTheory,
};
use crate::weight::Weight;

pub type SeededRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_0fc0;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `OPC_SEED` if set and numeric, else the fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var("OPC_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// A weight `k/d` with `0 ≤ k ≤ d ≤ max_den`.
pub fn random_probability<W: Weight, R: Rng + ?Sized>(rng: &mut R, max_den: i64) -> W {
    let d = rng.gen_range(1..=max_den.max(1));
    W::ratio(rng.gen_range(0..=d), d)
}

/// Theories whose operation symbols can be sampled.
pub trait RandomOps: Theory {
    fn random_op<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Op;
}

fn random_atoms<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AtomSet {
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    AtomSet(rng.gen::<u64>() & full)
}

impl RandomOps for GuardedTheory {
    fn random_op<R: Rng + ?Sized>(&self, rng: &mut R) -> AtomSet {
        random_atoms(rng, self.atoms.len())
    }
}

impl<W: Weight> RandomOps for ConvexTheory<W> {
    fn random_op<R: Rng + ?Sized>(&self, rng: &mut R) -> Mix<W> {
        Mix(random_probability(rng, 12))
    }
}

impl RandomOps for SemilatticeTheory {
    fn random_op<R: Rng + ?Sized>(&self, _: &mut R) -> Join {
        Join
    }
}

impl<W: Weight> RandomOps for ProbGkatTheory<W> {
    fn random_op<R: Rng + ?Sized>(&self, rng: &mut R) -> PgOp<W> {
        if rng.gen_bool(0.5) {
            PgOp::Guard(random_atoms(rng, self.atoms.len()))
        } else {
            PgOp::Mix(random_probability(rng, 12))
        }
    }
}

/// Names available to the term generator.
#[derive(Clone, Debug)]
pub struct TermShape {
    pub actions: Vec<Action>,
    /// Free return variables.
    pub returns: Vec<Var>,
    /// Binder names; a binder is never reused inside its own scope.
    pub binders: Vec<Var>,
    /// Whether `β` binders may be generated.
    pub beta: bool,
}

impl Default for TermShape {
    fn default() -> Self {
        TermShape {
            actions: vec![Action::new("a"), Action::new("b")],
            returns: vec![Var::new("v"), Var::new("w")],
            binders: vec![Var::new("x"), Var::new("y")],
            beta: true,
        }
    }
}

/// Splits `total` into `parts` positive summands.
fn split<R: Rng + ?Sized>(rng: &mut R, total: usize, parts: usize) -> Vec<usize> {
    let mut out = vec![1; parts];
    for _ in parts..total {
        out[rng.gen_range(0..parts)] += 1;
    }
    out
}

/// A term with exactly `size` nodes.
pub fn random_term<T: RandomOps, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    shape: &TermShape,
    size: usize,
) -> Term<T::Op> {
    term_in(theory, rng, shape, size.max(1), &mut Vec::new())
}

fn term_in<T: RandomOps, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    shape: &TermShape,
    size: usize,
    bound: &mut Vec<Var>,
) -> Term<T::Op> {
    if size == 1 {
        let pool: Vec<&Var> = shape.returns.iter().chain(bound.iter()).collect();
        return match pool.choose(rng) {
            Some(v) if rng.gen_ratio(3, 4) => Term::Ret((*v).clone()),
            _ => Term::Zero,
        };
    }
    let free_binders: Vec<Var> = shape
        .binders
        .iter()
        .filter(|b| !bound.contains(b))
        .cloned()
        .collect();
    loop {
        match rng.gen_range(0..4) {
            0 if !shape.actions.is_empty() => {
                let a = shape.actions.choose(rng).expect("nonempty").clone();
                return Term::Prefix(a, Box::new(term_in(theory, rng, shape, size - 1, bound)));
            }
            1 if !free_binders.is_empty() => {
                let v = free_binders.choose(rng).expect("nonempty").clone();
                bound.push(v.clone());
                let body = term_in(theory, rng, shape, size - 1, bound);
                bound.pop();
                return if shape.beta && rng.gen_bool(0.4) {
                    Term::Beta(v, Box::new(body))
                } else {
                    Term::Mu(v, Box::new(body))
                };
            }
            2 | 3 => {
                let op = theory.random_op(rng);
                let n = theory.arity(&op);
                if size > n {
                    let args = split(rng, size - 1, n.max(1))
                        .into_iter()
                        .take(n)
                        .map(|k| term_in(theory, rng, shape, k, bound))
                        .collect();
                    return Term::Op(op, args);
                }
            }
            _ => {}
        }
    }
}

/// An S-term with `size` nodes over `gens`, or a leaf when no operation fits.
pub fn random_sterm<T: RandomOps, G: Clone, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    gens: &[G],
    size: usize,
) -> STerm<T::Op, G> {
    if size <= 1 {
        return match gens.choose(rng) {
            Some(g) if rng.gen_ratio(4, 5) => STerm::Gen(g.clone()),
            _ => STerm::Zero,
        };
    }
    for _ in 0..16 {
        let op = theory.random_op(rng);
        let n = theory.arity(&op);
        if size > n {
            let args = split(rng, size - 1, n.max(1))
                .into_iter()
                .take(n)
                .map(|k| random_sterm(theory, rng, gens, k))
                .collect();
            return STerm::Op(op, args);
        }
    }
    random_sterm(theory, rng, gens, 1)
}

/// A random payload over `gens`, normalized in the discrete order.
pub fn random_elem<T: RandomOps, G: Gen, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    gens: &[G],
    max_size: usize,
) -> Result<T::Elem<G>> {
    let size = rng.gen_range(1..=max_size.max(1));
    normalize(theory, &Discrete, &random_sterm(theory, rng, gens, size))
}

/// Which star layer to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarFlavour {
    Star,
    Polystar,
    /// Polystar with return constants.
    ProbGkat,
}

/// A star expression with about `size` nodes.
pub fn random_star<T: RandomOps, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    actions: &[Action],
    flavour: StarFlavour,
    size: usize,
) -> StarExp<T::Op> {
    if size <= 1 {
        return match rng.gen_range(0..6) {
            0 => StarExp::Zero,
            1 => StarExp::One,
            2 if flavour == StarFlavour::ProbGkat => StarExp::Const(Var::new("w")),
            _ => StarExp::Act(
                actions
                    .choose(rng)
                    .cloned()
                    .unwrap_or_else(|| Action::new("a")),
            ),
        };
    }
    match rng.gen_range(0..3) {
        0 if size >= 3 => {
            let k = rng.gen_range(1..size - 1);
            StarExp::op(
                theory.random_op(rng),
                random_star(theory, rng, actions, flavour, k),
                random_star(theory, rng, actions, flavour, size - 1 - k),
            )
        }
        1 if size >= 3 => {
            let k = rng.gen_range(1..size - 1);
            StarExp::seq(
                random_star(theory, rng, actions, flavour, k),
                random_star(theory, rng, actions, flavour, size - 1 - k),
            )
        }
        _ => {
            let body = random_star(theory, rng, actions, flavour, size - 1);
            let guard = if flavour == StarFlavour::Star || rng.gen_bool(0.3) {
                LoopGuard::Op(theory.random_op(rng))
            } else {
                let k = rng.gen_range(1..=4);
                LoopGuard::Poly(random_sterm(theory, rng, &[LoopVar::X, LoopVar::Y], k))
            };
            StarExp::Loop(Box::new(body), guard)
        }
    }
}

/// A discrete automaton on `states` states.
pub fn random_automaton<T: RandomOps, R: Rng + ?Sized>(
    theory: &T,
    rng: &mut R,
    actions: &[Action],
    returns: &[Var],
    states: usize,
    branch_size: usize,
) -> Result<OrderedAutomaton<T>> {
    let mut gens: Vec<Target<usize>> = returns.iter().cloned().map(Target::Ret).collect();
    for a in actions {
        gens.extend((0..states).map(|j| Target::Next(a.clone(), j)));
    }
    let branches = (0..states)
        .map(|_| random_elem(theory, rng, &gens, branch_size))
        .collect::<Result<Vec<_>>>()?;
    OrderedAutomaton::discrete(theory.clone(), ActionOrder::discrete(), branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::Atoms;
    use crate::Convex;

    #[test]
    fn terms_have_the_requested_size_and_no_shadowing() {
        let th = GuardedTheory::new(Atoms::new(["b1", "b2"]).unwrap());
        let mut rng = seeded(7);
        let shape = TermShape::default();
        for size in 1..12 {
            for _ in 0..50 {
                let t = random_term(&th, &mut rng, &shape, size);
                assert_eq!(t.size(), size);
                let mut nested = true;
                t.visit(&mut |s| {
                    if let Term::Mu(v, b) | Term::Beta(v, b) = s {
                        b.visit(&mut |inner| {
                            if let Term::Mu(u, _) | Term::Beta(u, _) = inner {
                                nested &= u != v;
                            }
                        });
                    }
                });
                assert!(nested, "{t}");
            }
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let th = Convex::new();
        let shape = TermShape::default();
        let a = random_term(&th, &mut seeded(3), &shape, 9);
        let b = random_term(&th, &mut seeded(3), &shape, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn probabilities_stay_in_range() {
        let mut rng = seeded(1);
        for _ in 0..200 {
            let r: crate::Rational = random_probability(&mut rng, 12);
            assert!(r.is_probability());
            assert!(*r.denom() <= 12.into());
        }
    }

    #[test]
    fn automata_are_well_formed() {
        let th = Convex::new();
        let mut rng = seeded(11);
        let a =
            random_automaton(&th, &mut rng, &[Action::new("a")], &[Var::new("v")], 6, 5).unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.is_discrete());
    }
}
