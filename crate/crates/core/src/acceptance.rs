//! Executable acceptance suites, shared by the integration tests and `selftest`.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::behaviour::{behaviour_preorder, ordinary_bisimilarity, similarity};
use crate::calculus::{Action, ActionOrder, Calculus, OrderedAutomaton, Target, Term, Var};
use crate::error::Result;
use crate::fragments::{translate_star, StarExp};
use crate::kernel::{Discrete, GenOrder, GeneratorContext, STerm, Theory};
use crate::random::{
    random_elem, random_probability, random_star, random_sterm, random_term, seeded, RandomOps,
    SeededRng, StarFlavour, TermShape,
};
use crate::solver::{canonical_term, Derivation, Hole};
use crate::syntax::{format_star, format_sterm, format_term, parse_star, parse_sterm, parse_term};
use crate::theories::{Atoms, GuardedTheory, Mix, SemilatticeTheory, SubDist};
use crate::{Convex, ProbGkat, Rational};

/// One acceptance criterion.
#[derive(Clone, Copy, Debug)]
pub struct Suite {
    pub id: u8,
    pub name: &'static str,
    pub limit: Duration,
    run: fn(u64) -> Result<Tally>,
}

impl Suite {
    pub fn run(&self, seed: u64) -> Report {
        let start = Instant::now();
        let outcome = (self.run)(seed ^ u64::from(self.id).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let elapsed = start.elapsed();
        let tally = outcome.unwrap_or_else(|e| Tally {
            cases: 0,
            violations: 1,
            first: Some(format!("suite aborted: {e}")),
            note: String::new(),
        });
        Report {
            suite: *self,
            tally,
            elapsed,
        }
    }
}

/// Counts of one suite run.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub cases: usize,
    pub violations: usize,
    /// The first violation, for diagnostics.
    pub first: Option<String>,
    pub note: String,
}

impl Tally {
    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.cases += other.cases;
        self.violations += other.violations;
        if self.first.is_none() {
            self.first = other.first;
        }
        if !other.note.is_empty() {
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(&other.note);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub tally: Tally,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.tally.violations == 0 && self.tally.cases > 0 && self.elapsed <= self.suite.limit
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<24} cases={} violations={} time={:.2}s limit={}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite.id,
            self.suite.name,
            self.tally.cases,
            self.tally.violations,
            self.elapsed.as_secs_f64(),
            self.suite.limit.as_secs()
        )?;
        if !self.tally.note.is_empty() {
            write!(f, " ({})", self.tally.note)?;
        }
        if let Some(first) = &self.tally.first {
            write!(f, "\n      first violation: {first}")?;
        }
        Ok(())
    }
}

const fn suite(id: u8, name: &'static str, secs: u64, run: fn(u64) -> Result<Tally>) -> Suite {
    Suite {
        id,
        name,
        limit: Duration::from_secs(secs),
        run,
    }
}

pub const SUITES: [Suite; 11] = [
    suite(1, "intro-equivalence", 1, intro_equivalence),
    suite(2, "unrolling", 1, unrolling),
    suite(3, "gkat-example", 1, gkat_example),
    suite(4, "semilattice-separation", 1, semilattice_separation),
    suite(5, "lfp-oracle", 60, lfp_oracle),
    suite(6, "axiom-soundness", 120, axiom_soundness),
    suite(7, "completeness", 120, completeness),
    suite(8, "collapse", 120, collapse),
    suite(9, "tightening", 60, tightening),
    suite(10, "hh-order", 30, hh_order),
    suite(11, "parser-roundtrip", 30, parser_roundtrip),
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES
        .iter()
        .find(|s| s.name == name || s.id.to_string() == name)
}

fn guarded_theory() -> GuardedTheory {
    GuardedTheory::new(Atoms::new(["b1", "b2"]).expect("two atoms"))
}

fn probgkat_theory() -> ProbGkat {
    ProbGkat::new(Atoms::new(["b1", "b2"]).expect("two atoms"))
}

fn intro_equivalence(_: u64) -> Result<Tally> {
    let calc = Calculus::new(Convex::new());
    let target = parse_term(&calc, "mu x. a.x")?;
    let mut t = Tally::default();
    let lazy = parse_term(&calc, "mu x. (x +[1/2] a.x)")?;
    t.case(calc.behavioural_equiv(&lazy, &target)?, || {
        "lazy loop differs from its target".into()
    });
    let lossy = parse_term(&calc, "mu x. (0 +[1/2] a.x)")?;
    t.case(!calc.behavioural_equiv(&lossy, &target)?, || {
        "lossy loop equals its target".into()
    });
    Ok(t)
}

fn unrolling_in<T: Theory>(theory: T) -> Result<Tally> {
    let calc = Calculus::new(theory);
    let once = parse_term(&calc, "mu u. a.u")?;
    let twice = parse_term(&calc, "mu u. a.a.u")?;
    let mut t = Tally::default();
    let kind = calc.theory.kind();
    t.case(calc.behavioural_equiv(&once, &twice)?, || {
        format!("{kind}: unrollings differ")
    });
    let sizes = (
        calc.reachable(&once)?.automaton.len(),
        calc.reachable(&twice)?.automaton.len(),
    );
    t.case(sizes == (1, 2), || {
        format!("{kind}: reachable sizes {sizes:?}")
    });
    Ok(t)
}

fn unrolling(_: u64) -> Result<Tally> {
    let mut t = unrolling_in(guarded_theory())?;
    t.absorb(unrolling_in(Convex::new())?);
    t.absorb(unrolling_in(SemilatticeTheory)?);
    t.absorb(unrolling_in(probgkat_theory())?);
    Ok(t)
}

fn gkat_example(_: u64) -> Result<Tally> {
    let th = GuardedTheory::new(Atoms::new(["b", "other"])?);
    let calc = Calculus::new(th.clone());
    let ex = calc.reachable(&parse_term(&calc, "mu u. a.(a.u ?{b} v)")?)?;
    let a = &ex.automaton;
    let mut t = Tally::default();
    t.case(a.len() == 2, || format!("{} states", a.len()));
    if a.len() == 2 {
        let act = Action::new("a");
        let root = ex.root();
        let inner = 1 - root;
        let loop_in = th.table(vec![Some(Target::Next(act.clone(), inner)); 2])?;
        let split = th.table(vec![
            Some(Target::Next(act, root)),
            Some(Target::Ret(Var::new("v"))),
        ])?;
        t.case(a.branch(root) == &loop_in, || {
            format!("root branch {:?}", a.branch(root))
        });
        t.case(a.branch(inner) == &split, || {
            format!("inner branch {:?}", a.branch(inner))
        });
    }
    Ok(t)
}

fn semilattice_separation(_: u64) -> Result<Tally> {
    let calc = Calculus::new(SemilatticeTheory);
    let e = parse_term(&calc, "a.0 + a.a.v")?;
    let f = parse_term(&calc, "a.a.v")?;
    let mut t = Tally::default();
    t.case(calc.behavioural_equiv(&e, &f)?, || {
        "not behaviourally equivalent".into()
    });
    t.case(!calc.bisimilar(&e, &f)?, || "ordinarily bisimilar".into());
    Ok(t)
}

fn equivalent<T: Theory>(th: &T, p: &T::Elem<String>, q: &T::Elem<String>) -> Result<bool> {
    Ok(th.leq(&Discrete, p, q)? && th.leq(&Discrete, q, p)?)
}

fn lfp_in<T: RandomOps>(th: T, rng: &mut SeededRng, terms: usize, samples: usize) -> Result<Tally> {
    let names: Vec<String> = ["x", "y", "c", "d"].iter().map(|s| s.to_string()).collect();
    let mut t = Tally::default();
    let mut prefixed = 0usize;
    for _ in 0..terms {
        let rec = names[rng.gen_range(0..2)].clone();
        let rest: Vec<String> = names.iter().filter(|n| **n != rec).cloned().collect();
        let p = random_elem(&th, rng, &names, 9)?;
        let l = th.lfp(&rec, &p);
        let subst = |q: &T::Elem<String>| {
            th.bind(&Discrete, &p, &mut |g: &String| {
                if *g == rec {
                    q.clone()
                } else {
                    th.unit(g.clone())
                }
            })
        };
        let free = !th.support(&l).contains(&rec);
        let fixed = free && equivalent(&th, &subst(&l), &l)?;
        let mut least = true;
        for k in 0..samples {
            let q = match k % 3 {
                0 => random_elem(&th, rng, &rest, 7)?,
                1 => {
                    let r = random_elem(&th, rng, &rest, 5)?;
                    subst(&r)
                }
                _ => {
                    let r = random_elem(&th, rng, &rest, 5)?;
                    let op = th.random_op(rng);
                    let args: Vec<_> = (0..th.arity(&op))
                        .map(|i| if i == 0 { l.clone() } else { r.clone() })
                        .collect();
                    th.apply(&Discrete, &op, &args)?
                }
            };
            if th.support(&q).contains(&rec) {
                continue;
            }
            if th.leq(&Discrete, &subst(&q), &q)? {
                prefixed += 1;
                least &= th.leq(&Discrete, &l, &q)?;
            }
        }
        t.case(fixed && least, || {
            format!(
                "{}: lfp_{rec} of {p:?} gave {l:?} (fixed={fixed}, least={least})",
                th.kind()
            )
        });
    }
    t.note = format!("{}: {prefixed} prefixed samples", th.kind());
    Ok(t)
}

fn lfp_oracle(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = lfp_in(guarded_theory(), &mut rng, 1000, 200)?;
    t.absorb(lfp_in(Convex::new(), &mut rng, 1000, 200)?);
    t.absorb(lfp_in(SemilatticeTheory, &mut rng, 1000, 200)?);
    t.absorb(lfp_in(probgkat_theory(), &mut rng, 1000, 200)?);
    Ok(t)
}

struct AxiomGen<T: RandomOps> {
    calc: Calculus<T>,
    actions: Vec<Action>,
}

impl<T: RandomOps> AxiomGen<T> {
    fn new(theory: T) -> Self {
        let actions: Vec<Action> = ["a", "b", "c"].into_iter().map(Action::new).collect();
        let order = ActionOrder::new(
            Some(actions.clone()),
            vec![(Action::new("a"), Action::new("b"))],
        )
        .expect("valid action order");
        AxiomGen {
            calc: Calculus::with_actions(theory, order),
            actions,
        }
    }

    fn shape(&self, with_x: bool) -> TermShape {
        let mut returns = vec![Var::new("v"), Var::new("w")];
        if with_x {
            returns.push(Var::new("x"));
        }
        TermShape {
            actions: self.actions.clone(),
            returns,
            binders: vec![Var::new("y"), Var::new("z")],
            beta: true,
        }
    }

    fn term(&self, rng: &mut SeededRng, with_x: bool, max: usize) -> Term<T::Op> {
        let size = rng.gen_range(1..=max);
        random_term(&self.calc.theory, rng, &self.shape(with_x), size)
    }

    /// A term in which `x` only occurs under a prefix.
    fn guarded_arg(&self, rng: &mut SeededRng) -> Term<T::Op> {
        if rng.gen_bool(0.5) {
            let a = self.actions.choose(rng).expect("actions").clone();
            Term::Prefix(a, Box::new(self.term(rng, true, 4)))
        } else {
            self.term(rng, false, 4)
        }
    }

    fn sterm(&self, rng: &mut SeededRng, holes: &[Hole]) -> STerm<T::Op, Hole> {
        let size = rng.gen_range(1..=5);
        random_sterm(&self.calc.theory, rng, holes, size)
    }

    fn op_with(&self, rng: &mut SeededRng, first: Term<T::Op>) -> Term<T::Op> {
        let op = self.calc.theory.random_op(rng);
        let n = self.calc.theory.arity(&op);
        let mut args = vec![first];
        while args.len() < n {
            args.push(self.term(rng, false, 3));
        }
        args.truncate(n);
        Term::Op(op, args)
    }

    fn derivation(&self, rule: &str, rng: &mut SeededRng) -> Derivation<T::Op> {
        let th = &self.calc.theory;
        let x = Var::new("x");
        let holes = [Hole::Arg(0), Hole::Arg(1)];
        let xholes = [Hole::Var(x.clone()), Hole::Arg(0), Hole::Arg(1)];
        match rule {
            "Ie" => {
                let lhs = self.sterm(rng, &holes);
                let rhs = match rng.gen_range(0..3) {
                    0 => crate::kernel::normalize(th, &Discrete, &lhs)
                        .map(|p| th.representative(&p))
                        .unwrap_or(STerm::Zero),
                    1 => self.sterm(rng, &holes),
                    _ => lhs.clone(),
                };
                let (lhs, rhs) = if rng.gen_bool(0.5) {
                    (lhs, rhs)
                } else {
                    (rhs, lhs)
                };
                let (lhs, rhs) = if rng.gen_bool(0.2) {
                    (STerm::Zero, rhs)
                } else {
                    (lhs, rhs)
                };
                Derivation::Ie {
                    lhs,
                    rhs,
                    args: vec![self.term(rng, false, 5), self.term(rng, false, 5)],
                }
            }
            "S" => {
                let o = th.random_op(rng);
                let args = (0..th.arity(&o))
                    .map(|_| self.term(rng, false, 5))
                    .collect();
                Derivation::S {
                    lower: o.clone(),
                    upper: o,
                    args,
                }
            }
            "Act" => {
                let (lower, upper) = match rng.gen_range(0..3) {
                    0 => (Action::new("a"), Action::new("b")),
                    _ => {
                        let a = self.actions.choose(rng).expect("actions").clone();
                        (a.clone(), a)
                    }
                };
                Derivation::Act {
                    lower,
                    upper,
                    body: self.term(rng, false, 6),
                }
            }
            "R1a" => Derivation::R1a {
                var: x,
                p: self.sterm(rng, &xholes),
                args: vec![self.guarded_arg(rng), self.guarded_arg(rng)],
            },
            "R1b" => Derivation::R1b {
                var: x,
                body: self.term(rng, true, 6),
            },
            "R2a" => {
                let p = self.sterm(rng, &xholes);
                let args = vec![self.guarded_arg(rng), self.guarded_arg(rng)];
                let beta = Term::Beta(
                    x.clone(),
                    Box::new(crate::solver::instantiate(&p, &args).expect("slots 0 and 1")),
                );
                let bound = match rng.gen_range(0..3) {
                    0 => self.term(rng, false, 5),
                    1 => beta,
                    _ => self.op_with(rng, beta),
                };
                Derivation::R2a {
                    var: x,
                    p,
                    args,
                    bound,
                }
            }
            "R2b" | "R3" => {
                let body = self.term(rng, true, 6);
                let mu = Term::Mu(x.clone(), Box::new(body.clone()));
                let bound = match rng.gen_range(0..4) {
                    0 => self.term(rng, false, 5),
                    1 => mu,
                    2 => self.op_with(rng, mu),
                    _ => Term::Beta(x.clone(), Box::new(body.clone())).guarded_substitute(&mu, &x),
                };
                if rule == "R3" {
                    Derivation::R3 {
                        var: x,
                        body,
                        bound,
                    }
                } else {
                    Derivation::R2b {
                        var: x,
                        body,
                        bound,
                    }
                }
            }
            _ => {
                let body = self.term(rng, true, 6).zero_unguarded(&x);
                let solution = if rng.gen_bool(0.6) {
                    Term::Mu(x.clone(), Box::new(body.clone()))
                } else {
                    self.term(rng, false, 5)
                };
                Derivation::Ufp {
                    var: x,
                    body,
                    solution,
                }
            }
        }
    }
}

fn axioms_in<T: RandomOps>(theory: T, rng: &mut SeededRng, per_rule: usize) -> Result<Tally> {
    let gen = AxiomGen::new(theory);
    let kind = gen.calc.theory.kind();
    let mut t = Tally::default();
    let mut live = 0usize;
    for rule in crate::solver::RULES {
        let mut done = 0;
        let mut attempts = 0;
        while done < per_rule && attempts < per_rule * 20 {
            attempts += 1;
            let d = gen.derivation(rule, rng);
            let check = gen.calc.check_axiom_instance(&d)?;
            if !check.side_conditions {
                continue;
            }
            done += 1;
            live += usize::from(check.premises);
            t.case(check.holds(), || format!("{kind} {rule}: {d:?}"));
        }
        t.case(done == per_rule, || {
            format!("{kind} {rule}: only {done} instances met the side conditions")
        });
    }
    t.note = format!("{kind}: {live} with valid premises");
    Ok(t)
}

fn axiom_soundness(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = axioms_in(guarded_theory(), &mut rng, 500)?;
    t.absorb(axioms_in(Convex::new(), &mut rng, 500)?);
    t.absorb(axioms_in(SemilatticeTheory, &mut rng, 500)?);
    t.absorb(axioms_in(probgkat_theory(), &mut rng, 500)?);
    Ok(t)
}

fn completeness_in<T: RandomOps>(theory: T, rng: &mut SeededRng, n: usize) -> Result<Tally> {
    let calc = Calculus::new(theory);
    let shape = TermShape::default();
    let mut t = Tally::default();
    for _ in 0..n {
        let size = rng.gen_range(1..=8);
        let e = random_term(&calc.theory, rng, &shape, size);
        let ex = calc.reachable(&e)?;
        let c = canonical_term(&ex.automaton, ex.root())?;
        let ok = calc.behavioural_leq(&e, &c)? && calc.behavioural_leq(&c, &e)?;
        t.case(ok, || {
            format!(
                "{}: {} vs canonical {}",
                calc.theory.kind(),
                format_term(&calc.theory, &e),
                format_term(&calc.theory, &c)
            )
        });
    }
    Ok(t)
}

fn completeness(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = completeness_in(guarded_theory(), &mut rng, 300)?;
    t.absorb(completeness_in(Convex::new(), &mut rng, 300)?);
    t.absorb(completeness_in(SemilatticeTheory, &mut rng, 300)?);
    t.absorb(completeness_in(probgkat_theory(), &mut rng, 300)?);
    Ok(t)
}

fn collapse_check<T: Theory>(a: &OrderedAutomaton<T>, t: &mut Tally) -> Result<()> {
    let sim = similarity(a)?.symmetric_core();
    let beh = behaviour_preorder(a)?.symmetric_core();
    let bis = ordinary_bisimilarity(a)?;
    t.case(
        sim.matrix() == beh.matrix() && beh.matrix() == bis.matrix(),
        || {
            format!(
                "{}: similarity {:?}, behaviour {:?}, bisimilarity {:?} on {:?}",
                a.theory.kind(),
                sim.pairs(),
                beh.pairs(),
                bis.pairs(),
                a.branches()
            )
        },
    );
    Ok(())
}

/// Every tuple of `n` choices from `options`.
fn tuples<X: Clone>(options: &[X], n: usize) -> Vec<Vec<X>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn targets(n: usize) -> Vec<Target<usize>> {
    let mut out = vec![Target::Ret(Var::new("v"))];
    out.extend((0..n).map(|j| Target::Next(Action::new("a"), j)));
    out
}

/// Subdistributions over `gens` with weights in multiples of `1/den`.
fn grid_dists(gens: &[Target<usize>], den: i64) -> Vec<SubDist<Target<usize>, Rational>> {
    let counts: Vec<i64> = (0..=den).collect();
    tuples(&counts, gens.len())
        .into_iter()
        .filter(|ks| ks.iter().sum::<i64>() <= den)
        .map(|ks| {
            SubDist::from_pairs(
                gens.iter()
                    .cloned()
                    .zip(ks.into_iter().map(|k| Rational::new(k.into(), den.into()))),
            )
            .expect("mass at most one")
        })
        .collect()
}

fn collapse(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    let g = guarded_theory();
    for n in 1..=3 {
        let mut entries: Vec<Option<Target<usize>>> = vec![None];
        entries.extend(targets(n).into_iter().map(Some));
        let tables: Vec<_> = tuples(&entries, 2)
            .into_iter()
            .map(|row| g.table(row))
            .collect::<Result<_>>()?;
        for branches in tuples(&tables, n) {
            let a = OrderedAutomaton::discrete(g.clone(), ActionOrder::discrete(), branches)?;
            collapse_check(&a, &mut t)?;
        }
    }
    let c = Convex::new();
    for n in 1..=3 {
        let dists = grid_dists(&targets(n), if n < 3 { 3 } else { 2 });
        for branches in tuples(&dists, n) {
            let a = OrderedAutomaton::discrete(c.clone(), ActionOrder::discrete(), branches)?;
            collapse_check(&a, &mut t)?;
        }
    }
    let exhaustive = t.cases;
    let act = [Action::new("a")];
    let ret = [Var::new("v")];
    for _ in 0..500 {
        let a = crate::random::random_automaton(&g, &mut rng, &act, &ret, 6, 5)?;
        collapse_check(&a, &mut t)?;
        let a = crate::random::random_automaton(&c, &mut rng, &act, &ret, 6, 5)?;
        collapse_check(&a, &mut t)?;
    }
    t.note = format!("{exhaustive} exhaustive, {} random", t.cases - exhaustive);
    Ok(t)
}

fn tightening(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let calc = Calculus::new(Convex::new());
    let acts = [Action::new("a"), Action::new("b")];
    let one = Rational::from_integer(1.into());
    let mut t = Tally::default();
    while t.cases < 200 {
        let r: Rational = random_probability(&mut rng, 12);
        let s: Rational = random_probability(&mut rng, 12);
        let stuck = &r * (&one - &s);
        if stuck == one {
            continue;
        }
        let guard = &r * &s / (&one - stuck);
        let size = rng.gen_range(1..=5);
        let e = random_star(&calc.theory, &mut rng, &acts, StarFlavour::Star, size);
        let lhs = StarExp::star(
            StarExp::op(Mix(s.clone()), e.clone(), StarExp::One),
            Mix(r.clone()),
        );
        let rhs = StarExp::star(e.clone(), Mix(guard));
        let (tl, tr) = (translate_star(&calc, &lhs)?, translate_star(&calc, &rhs)?);
        t.case(calc.behavioural_equiv(&tl, &tr)?, || {
            format!(
                "{} vs {}",
                format_star(&calc.theory, &lhs),
                format_star(&calc.theory, &rhs)
            )
        });
    }
    Ok(t)
}

type Dist = SubDist<usize, Rational>;

fn random_dist(rng: &mut SeededRng, n: usize) -> Dist {
    let k = rng.gen_range(0..=4.min(n));
    let mut gens: Vec<usize> = (0..n).collect();
    gens.shuffle(rng);
    let mut left = 12i64;
    let pairs: Vec<(usize, Rational)> = gens[..k]
        .iter()
        .map(|&g| {
            let w = rng.gen_range(0..=left);
            left -= w;
            (g, Rational::new(w.into(), 12.into()))
        })
        .collect();
    SubDist::from_pairs(pairs).expect("mass at most one")
}

/// Moves mass upward and adds mass, staying within support four.
fn push_up(rng: &mut SeededRng, ctx: &GeneratorContext<usize>, p: &Dist) -> Dist {
    let n = ctx.generators().len();
    for _ in 0..8 {
        let mut pairs: Vec<(usize, Rational)> = Vec::new();
        for (g, w) in p.weights() {
            let above: Vec<usize> = (0..n).filter(|h| ctx.leq(g, h)).collect();
            let h = *above.choose(rng).expect("reflexive");
            let keep: Rational = w * random_probability::<Rational, _>(rng, 4);
            pairs.push((*g, keep.clone()));
            pairs.push((h, w - keep));
        }
        let spare = Rational::from_integer(1.into()) - p.mass();
        if rng.gen_bool(0.5) {
            let extra = spare * random_probability::<Rational, _>(rng, 3);
            pairs.push((rng.gen_range(0..n), extra));
        }
        let q = SubDist::from_pairs(pairs).expect("mass at most one");
        if q.weights().len() <= 4 {
            return q;
        }
    }
    p.clone()
}

fn hh_order(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    let mut comparable = 0usize;
    for round in 0..1000 {
        let n = 5;
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|_| rng.gen_bool(0.35))
            .collect();
        let ctx = GeneratorContext::with_order(0..n, pairs)?;
        let p = random_dist(&mut rng, n);
        let q = if round % 4 == 0 {
            random_dist(&mut rng, n)
        } else {
            push_up(&mut rng, &ctx, &p)
        };
        let r = if round % 5 == 0 {
            random_dist(&mut rng, n)
        } else {
            push_up(&mut rng, &ctx, &q)
        };
        let cmp = |a: &Dist, b: &Dist| -> Result<(bool, bool)> {
            Ok((a.hh_leq(&ctx, b, 20)?, a.hh_leq_by_flow(&ctx, b)))
        };
        let (pq, pq_flow) = cmp(&p, &q)?;
        let (qp, qp_flow) = cmp(&q, &p)?;
        let (qr, qr_flow) = cmp(&q, &r)?;
        let (pr, pr_flow) = cmp(&p, &r)?;
        let (pp, _) = cmp(&p, &p)?;
        comparable += usize::from(pq) + usize::from(qr);
        let routes = pq == pq_flow && qp == qp_flow && qr == qr_flow && pr == pr_flow;
        let antisym = !(pq && qp) || p == q;
        let trans = !(pq && qr) || pr;
        t.case(pp && routes && antisym && trans, || {
            format!("p={p:?} q={q:?} r={r:?} reflexive={pp} routes={routes} antisymmetric={antisym} transitive={trans}")
        });
    }
    t.note = format!("{comparable} comparable pairs");
    Ok(t)
}

fn roundtrip_terms<T: RandomOps>(
    theory: T,
    rng: &mut SeededRng,
    n: usize,
    t: &mut Tally,
) -> Result<()> {
    let calc = Calculus::new(theory);
    let shape = TermShape::default();
    let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let kind = calc.theory.kind();
    for _ in 0..n {
        let size = rng.gen_range(1..=12);
        let e = random_term(&calc.theory, rng, &shape, size);
        let text = format_term(&calc.theory, &e);
        let back = parse_term(&calc, &text);
        t.case(back.as_ref() == Ok(&e), || {
            format!("{kind} term `{text}`: {back:?}")
        });
        let s = random_sterm(&calc.theory, rng, &names, size);
        let text = format_sterm(&calc.theory, &s);
        let back = parse_sterm(&calc.theory, &text);
        t.case(back.as_ref() == Ok(&s), || {
            format!("{kind} S-term `{text}`: {back:?}")
        });
    }
    Ok(())
}

fn roundtrip_stars<T: RandomOps>(
    theory: T,
    flavour: StarFlavour,
    rng: &mut SeededRng,
    n: usize,
    t: &mut Tally,
) -> Result<()> {
    let calc = Calculus::new(theory);
    let acts = [Action::new("a"), Action::new("b")];
    for _ in 0..n {
        let size = rng.gen_range(1..=10);
        let e = random_star(&calc.theory, rng, &acts, flavour, size);
        let text = format_star(&calc.theory, &e);
        let back = parse_star(&calc, &text);
        t.case(back.as_ref() == Ok(&e), || {
            format!("{} {flavour:?} `{text}`: {back:?}", calc.theory.kind())
        });
    }
    Ok(())
}

fn parser_roundtrip(seed: u64) -> Result<Tally> {
    let mut rng = seeded(seed);
    let mut t = Tally::default();
    roundtrip_terms(guarded_theory(), &mut rng, 1000, &mut t)?;
    roundtrip_terms(Convex::new(), &mut rng, 1000, &mut t)?;
    roundtrip_terms(SemilatticeTheory, &mut rng, 1000, &mut t)?;
    roundtrip_terms(probgkat_theory(), &mut rng, 1000, &mut t)?;
    roundtrip_stars(guarded_theory(), StarFlavour::Star, &mut rng, 1000, &mut t)?;
    roundtrip_stars(Convex::new(), StarFlavour::Star, &mut rng, 1000, &mut t)?;
    roundtrip_stars(SemilatticeTheory, StarFlavour::Star, &mut rng, 1000, &mut t)?;
    roundtrip_stars(Convex::new(), StarFlavour::Polystar, &mut rng, 1000, &mut t)?;
    roundtrip_stars(
        SemilatticeTheory,
        StarFlavour::Polystar,
        &mut rng,
        1000,
        &mut t,
    )?;
    roundtrip_stars(
        probgkat_theory(),
        StarFlavour::ProbGkat,
        &mut rng,
        1000,
        &mut t,
    )?;
    Ok(t)
}
