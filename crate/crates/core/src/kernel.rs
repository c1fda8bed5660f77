//! The theory-instance interface and the generator-context machinery shared
//! by every branching theory.
//!
//! A theory presents a monad `M` on preorders. Elements of `M(X, ≤)` are kept
//! in a canonical payload so that structural equality of payloads coincides
//! with provable equivalence of the terms they represent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug};
use std::hash::Hash;

use num_rational::BigRational;
use serde_json::Value;

use crate::error::{Error, Result};

/// Anything usable as a generator of a free algebra.
pub trait Gen: Clone + Ord + Hash + Debug + Send + Sync + 'static {}
impl<T: Clone + Ord + Hash + Debug + Send + Sync + 'static> Gen for T {}

/// A preorder on generators, queried pointwise.
pub trait GenOrder<G> {
    fn leq(&self, a: &G, b: &G) -> bool;

    /// True when the order is known to be equality. Enables fast paths.
    fn is_discrete(&self) -> bool {
        false
    }
}

/// The discrete order (equality).
#[derive(Clone, Copy, Debug, Default)]
pub struct Discrete;

impl<G: PartialEq> GenOrder<G> for Discrete {
    fn leq(&self, a: &G, b: &G) -> bool {
        a == b
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// Adapter turning a closure into a generator order.
pub struct OrderFn<F>(pub F);

impl<G, F: Fn(&G, &G) -> bool> GenOrder<G> for OrderFn<F> {
    fn leq(&self, a: &G, b: &G) -> bool {
        (self.0)(a, b)
    }
}

/// Theory identifiers for the shipped instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryKind {
    Guarded,
    Convex,
    Semilattice,
    ProbGkat,
}

impl TheoryKind {
    pub const ALL: [TheoryKind; 4] = [
        TheoryKind::Guarded,
        TheoryKind::Convex,
        TheoryKind::Semilattice,
        TheoryKind::ProbGkat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoryKind::Guarded => "guarded",
            TheoryKind::Convex => "convex",
            TheoryKind::Semilattice => "semilattice",
            TheoryKind::ProbGkat => "probgkat",
        }
    }

    pub fn from_name(name: &str) -> Option<TheoryKind> {
        TheoryKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for TheoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Concrete syntax of a binary operation symbol, shared by all grammars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpSyntax {
    /// `e + f`
    Join,
    /// `e +[r] f`
    Mix(BigRational),
    /// `e ?{a1,a2} f`
    Guard(Vec<String>),
}

/// Terms over a signature with generator leaves.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum STerm<O, G> {
    Gen(G),
    Zero,
    Op(O, Vec<STerm<O, G>>),
}

impl<O: Clone, G: Clone> STerm<O, G> {
    pub fn op(op: O, args: Vec<STerm<O, G>>) -> Self {
        STerm::Op(op, args)
    }

    pub fn map_gens<H>(&self, f: &mut impl FnMut(&G) -> H) -> STerm<O, H> {
        match self {
            STerm::Gen(g) => STerm::Gen(f(g)),
            STerm::Zero => STerm::Zero,
            STerm::Op(o, args) => {
                STerm::Op(o.clone(), args.iter().map(|a| a.map_gens(f)).collect())
            }
        }
    }

    /// Replaces generators by arbitrary values built from the leaves.
    pub fn fold<R>(
        &self,
        leaf: &mut impl FnMut(&G) -> R,
        zero: &mut impl FnMut() -> R,
        node: &mut impl FnMut(&O, Vec<R>) -> R,
    ) -> R {
        match self {
            STerm::Gen(g) => leaf(g),
            STerm::Zero => zero(),
            STerm::Op(o, args) => {
                let vals = args.iter().map(|a| a.fold(leaf, zero, node)).collect();
                node(o, vals)
            }
        }
    }

    pub fn generators(&self) -> BTreeSet<G>
    where
        G: Ord,
    {
        let mut out = BTreeSet::new();
        self.collect_gens(&mut out);
        out
    }

    fn collect_gens(&self, out: &mut BTreeSet<G>)
    where
        G: Ord,
    {
        match self {
            STerm::Gen(g) => {
                out.insert(g.clone());
            }
            STerm::Zero => {}
            STerm::Op(_, args) => args.iter().for_each(|a| a.collect_gens(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            STerm::Gen(_) | STerm::Zero => 1,
            STerm::Op(_, args) => 1 + args.iter().map(STerm::size).sum::<usize>(),
        }
    }
}

/// An inequational theory presenting a monad on preorders.
///
/// `Elem<G>` is the canonical payload of `M(G, ≤)`. Operations that may need to
/// drop order-redundant data (the semilattice antichain) take the generator
/// order of their result.
pub trait Theory: Clone + Debug + Send + Sync + 'static {
    type Op: Clone + Eq + Ord + Hash + Debug + Send + Sync + 'static;
    type Elem<G: Gen>: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn kind(&self) -> TheoryKind;

    /// Declared atoms, for theories branching on tests.
    fn atom_names(&self) -> Option<&[String]> {
        None
    }

    fn arity(&self, op: &Self::Op) -> usize;

    fn validate_op(&self, op: &Self::Op) -> Result<()>;

    /// Order on operation symbols of equal arity. Every shipped theory is discrete.
    fn op_leq(&self, a: &Self::Op, b: &Self::Op) -> bool {
        a == b
    }

    fn zero<G: Gen>(&self) -> Self::Elem<G>;

    fn unit<G: Gen>(&self, g: G) -> Self::Elem<G>;

    fn apply<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        op: &Self::Op,
        args: &[Self::Elem<G>],
    ) -> Result<Self::Elem<G>>;

    /// Decides `p ⊑ q` with generators ordered by `ctx`.
    fn leq<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        p: &Self::Elem<G>,
        q: &Self::Elem<G>,
    ) -> Result<bool>;

    /// Least `g`-prefixed point. `g` must be order-isolated in the ambient context.
    fn lfp<G: Gen>(&self, g: &G, p: &Self::Elem<G>) -> Self::Elem<G>;

    /// Monad extension: substitutes an element for every generator.
    fn bind<G: Gen, H: Gen>(
        &self,
        ctx: &dyn GenOrder<H>,
        p: &Self::Elem<G>,
        f: &mut dyn FnMut(&G) -> Self::Elem<H>,
    ) -> Self::Elem<H>;

    /// Functorial action `M(h)`.
    fn map<G: Gen, H: Gen>(
        &self,
        ctx: &dyn GenOrder<H>,
        p: &Self::Elem<G>,
        f: &mut dyn FnMut(&G) -> H,
    ) -> Self::Elem<H> {
        self.bind(ctx, p, &mut |g| self.unit(f(g)))
    }

    /// Re-establishes the canonical form after the generator order changed.
    fn canonicalize<G: Gen>(&self, ctx: &dyn GenOrder<G>, p: &Self::Elem<G>) -> Self::Elem<G> {
        self.map(ctx, p, &mut |g| g.clone())
    }

    /// Generators occurring in the payload, sorted and deduplicated.
    fn support<G: Gen>(&self, p: &Self::Elem<G>) -> Vec<G>;

    /// Decides whether there is an element `r` over admissible pairs with
    /// `p ⊑ r(left)` and `r(right) ⊑ q`, where the orders on either side are
    /// already folded into `admissible`.
    fn coupling_exists<G: Gen, H: Gen>(
        &self,
        p: &Self::Elem<G>,
        q: &Self::Elem<H>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> Result<bool>;

    /// One representative term of the equivalence class.
    fn representative<G: Gen>(&self, p: &Self::Elem<G>) -> STerm<Self::Op, G>;

    fn op_syntax(&self, op: &Self::Op) -> OpSyntax;

    fn op_from_syntax(&self, syntax: &OpSyntax) -> Result<Self::Op>;

    /// Labelled outgoing edges of a branch, for diagrams.
    fn edges<G: Gen>(&self, p: &Self::Elem<G>) -> Vec<(String, G)>;

    fn encode<G: Gen>(&self, p: &Self::Elem<G>, gen: &dyn Fn(&G) -> Value) -> Value;

    fn decode<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        value: &Value,
        gen: &dyn Fn(&Value) -> Result<G>,
    ) -> Result<Self::Elem<G>>;
}

/// A finite set of generators carrying a preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorContext<G> {
    gens: Vec<G>,
    index: BTreeMap<G, usize>,
    below: Vec<Vec<bool>>,
    discrete: bool,
}

impl<G: Gen> GeneratorContext<G> {
    pub fn discrete(gens: impl IntoIterator<Item = G>) -> Self {
        Self::with_order(gens, std::iter::empty()).expect("discrete context is always valid")
    }

    /// Builds the reflexive-transitive closure of `pairs` over `gens`.
    pub fn with_order(
        gens: impl IntoIterator<Item = G>,
        pairs: impl IntoIterator<Item = (G, G)>,
    ) -> Result<Self> {
        let gens: Vec<G> = gens
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<G, usize> = gens
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, g)| (g, i))
            .collect();
        let n = gens.len();
        let mut below = vec![vec![false; n]; n];
        for (i, row) in below.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in pairs {
            let ia = *index
                .get(&a)
                .ok_or_else(|| Error::UnknownGenerator(format!("{a:?}")))?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| Error::UnknownGenerator(format!("{b:?}")))?;
            below[ia][ib] = true;
        }
        crate::relation::close_transitively(&mut below);
        let discrete = (0..n).all(|i| (0..n).all(|j| i == j || !below[i][j]));
        Ok(GeneratorContext {
            gens,
            index,
            below,
            discrete,
        })
    }

    pub fn generators(&self) -> &[G] {
        &self.gens
    }

    pub fn contains(&self, g: &G) -> bool {
        self.index.contains_key(g)
    }

    pub fn require(&self, g: &G) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::UnknownGenerator(format!("{g:?}")))
        }
    }

    /// True when `g` is comparable with no other generator.
    pub fn is_isolated(&self, g: &G) -> bool {
        match self.index.get(g) {
            None => true,
            Some(&i) => {
                (0..self.gens.len()).all(|j| i == j || (!self.below[i][j] && !self.below[j][i]))
            }
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&G, &G)> + '_ {
        (0..self.gens.len()).flat_map(move |i| {
            (0..self.gens.len())
                .filter(move |&j| self.below[i][j])
                .map(move |j| (&self.gens[i], &self.gens[j]))
        })
    }
}

impl<G: Gen> GenOrder<G> for GeneratorContext<G> {
    fn leq(&self, a: &G, b: &G) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.below[i][j],
            _ => a == b,
        }
    }

    fn is_discrete(&self) -> bool {
        self.discrete
    }
}

fn require_support<T: Theory, G: Gen>(
    theory: &T,
    ctx: &GeneratorContext<G>,
    p: &T::Elem<G>,
) -> Result<()> {
    for g in theory.support(p) {
        if !ctx.contains(&g) {
            return Err(Error::ContextMismatch(format!(
                "generator {g:?} is not in the context"
            )));
        }
    }
    Ok(())
}

/// `η(g)`: the element represented by the bare generator.
pub fn unit<T: Theory, G: Gen>(theory: &T, ctx: &GeneratorContext<G>, g: G) -> Result<T::Elem<G>> {
    ctx.require(&g)?;
    Ok(theory.unit(g))
}

/// Applies an operation symbol to canonical arguments.
pub fn apply<T: Theory, G: Gen>(
    theory: &T,
    ctx: &GeneratorContext<G>,
    op: &T::Op,
    args: &[T::Elem<G>],
) -> Result<T::Elem<G>> {
    theory.validate_op(op)?;
    for a in args {
        require_support(theory, ctx, a)?;
    }
    theory.apply(ctx, op, args)
}

/// Folds `unit`/`apply` over a term.
pub fn normalize<T: Theory, G: Gen>(
    theory: &T,
    ctx: &dyn GenOrder<G>,
    term: &STerm<T::Op, G>,
) -> Result<T::Elem<G>> {
    match term {
        STerm::Gen(g) => Ok(theory.unit(g.clone())),
        STerm::Zero => Ok(theory.zero()),
        STerm::Op(op, args) => {
            theory.validate_op(op)?;
            let vals = args
                .iter()
                .map(|a| normalize(theory, ctx, a))
                .collect::<Result<Vec<_>>>()?;
            theory.apply(ctx, op, &vals)
        }
    }
}

/// `normalize` with membership checks against a finite context.
pub fn normalize_in<T: Theory, G: Gen>(
    theory: &T,
    ctx: &GeneratorContext<G>,
    term: &STerm<T::Op, G>,
) -> Result<T::Elem<G>> {
    for g in term.generators() {
        ctx.require(&g)?;
    }
    normalize(theory, ctx, term)
}

pub fn element_leq<T: Theory, G: Gen>(
    theory: &T,
    ctx: &GeneratorContext<G>,
    p: &T::Elem<G>,
    q: &T::Elem<G>,
) -> Result<bool> {
    require_support(theory, ctx, p)?;
    require_support(theory, ctx, q)?;
    theory.leq(ctx, p, q)
}

pub fn lfp<T: Theory, G: Gen>(
    theory: &T,
    ctx: &GeneratorContext<G>,
    g: &G,
    p: &T::Elem<G>,
) -> Result<T::Elem<G>> {
    ctx.require(g)?;
    if !ctx.is_isolated(g) {
        return Err(Error::NotIsolated(format!("{g:?}")));
    }
    require_support(theory, ctx, p)?;
    Ok(theory.lfp(g, p))
}

/// `p[q/g]`: substitutes an element for one generator.
pub fn substitute<T: Theory, G: Gen>(
    theory: &T,
    ctx: &dyn GenOrder<G>,
    p: &T::Elem<G>,
    g: &G,
    q: &T::Elem<G>,
) -> T::Elem<G> {
    theory.bind(ctx, p, &mut |x| {
        if x == g {
            q.clone()
        } else {
            theory.unit(x.clone())
        }
    })
}

/// `M(h)(p)` for a monotone generator map `h` between finite contexts.
pub fn rename<T: Theory, G: Gen, H: Gen>(
    theory: &T,
    source: &GeneratorContext<G>,
    target: &GeneratorContext<H>,
    h: &dyn Fn(&G) -> Option<H>,
    p: &T::Elem<G>,
) -> Result<T::Elem<H>> {
    let mut image = BTreeMap::new();
    for g in source.generators() {
        let hg = h(g).ok_or_else(|| Error::UnknownGenerator(format!("{g:?} has no image")))?;
        target.require(&hg)?;
        image.insert(g.clone(), hg);
    }
    for (a, b) in source.pairs() {
        if !target.leq(&image[a], &image[b]) {
            return Err(Error::NonMonotoneMap(format!(
                "{a:?} ≤ {b:?} but {:?} ≰ {:?}",
                image[a], image[b]
            )));
        }
    }
    require_support(theory, source, p)?;
    Ok(theory.map(target, p, &mut |g| image[g].clone()))
}

/// Decides the weak-coupling property for a monotone map `h`: an element `r`
/// over pairs `(u, v)` with `h(u) ≤ h(v)` such that `p ⊑ r(left)` and
/// `r(right) ⊑ q`. Composing the pair condition with the orders on both sides
/// collapses, for monotone `h`, to `h(x) ≤ h(y)` between support elements.
pub fn weak_coupling_exists<T: Theory, G: Gen, H: Gen>(
    theory: &T,
    target: &dyn GenOrder<H>,
    h: &dyn Fn(&G) -> H,
    p: &T::Elem<G>,
    q: &T::Elem<G>,
) -> Result<bool> {
    theory.coupling_exists(p, q, &|x: &G, y: &G| target.leq(&h(x), &h(y)))
}
