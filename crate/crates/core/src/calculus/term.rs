//! Process terms, variable analysis and substitution.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::GenOrder;
use crate::kernel::GeneratorContext;

macro_rules! name_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                $name(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

name_type!(
    /// A return variable.
    Var
);
name_type!(
    /// An action label.
    Action
);

/// The declared action set with its preorder `≤_act`.
#[derive(Clone, Debug)]
pub struct ActionOrder {
    declared: Option<BTreeSet<Action>>,
    ctx: GeneratorContext<Action>,
}

impl Default for ActionOrder {
    fn default() -> Self {
        ActionOrder::discrete()
    }
}

impl ActionOrder {
    /// Any action, discretely ordered.
    pub fn discrete() -> Self {
        ActionOrder {
            declared: None,
            ctx: GeneratorContext::discrete([]),
        }
    }

    /// `declared = None` admits any action name.
    pub fn new(declared: Option<Vec<Action>>, pairs: Vec<(Action, Action)>) -> Result<Self> {
        let declared: Option<BTreeSet<Action>> = declared.map(|d| d.into_iter().collect());
        let mut gens: BTreeSet<Action> = declared.clone().unwrap_or_default();
        for (a, b) in &pairs {
            for x in [a, b] {
                if let Some(d) = &declared {
                    if !d.contains(x) {
                        return Err(Error::Invalid(format!(
                            "action `{x}` in the order is not declared"
                        )));
                    }
                }
                gens.insert(x.clone());
            }
        }
        Ok(ActionOrder {
            declared,
            ctx: GeneratorContext::with_order(gens, pairs)?,
        })
    }

    pub fn leq(&self, a: &Action, b: &Action) -> bool {
        self.ctx.leq(a, b)
    }

    pub fn is_discrete(&self) -> bool {
        self.ctx.is_discrete()
    }

    pub fn declared(&self) -> Option<&BTreeSet<Action>> {
        self.declared.as_ref()
    }

    pub fn check(&self, a: &Action) -> Result<()> {
        match &self.declared {
            Some(d) if !d.contains(a) => Err(Error::Invalid(format!("undeclared action `{a}`"))),
            _ => Ok(()),
        }
    }

    /// Strictly ordered pairs `(a, b)` with `a ≤ b`, `a ≠ b`.
    pub fn strict_pairs(&self) -> Vec<(Action, Action)> {
        self.ctx
            .pairs()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect()
    }
}

/// Process terms over the operation symbols `O` of a theory.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term<O> {
    Ret(Var),
    Zero,
    Op(O, Vec<Term<O>>),
    Prefix(Action, Box<Term<O>>),
    Beta(Var, Box<Term<O>>),
    Mu(Var, Box<Term<O>>),
}

/// Variable classification of a term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Analysis {
    pub free: BTreeSet<Var>,
    pub bound: BTreeSet<Var>,
    pub guarded: BTreeSet<Var>,
}

impl<O: Clone> Term<O> {
    pub fn ret(v: impl AsRef<str>) -> Self {
        Term::Ret(Var::new(v))
    }

    pub fn prefix(a: impl AsRef<str>, e: Term<O>) -> Self {
        Term::Prefix(Action::new(a), Box::new(e))
    }

    pub fn beta(v: impl AsRef<str>, e: Term<O>) -> Self {
        Term::Beta(Var::new(v), Box::new(e))
    }

    pub fn mu(v: impl AsRef<str>, e: Term<O>) -> Self {
        Term::Mu(Var::new(v), Box::new(e))
    }

    pub fn op(op: O, args: Vec<Term<O>>) -> Self {
        Term::Op(op, args)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Ret(_) | Term::Zero => 1,
            Term::Op(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Prefix(_, e) | Term::Beta(_, e) | Term::Mu(_, e) => 1 + e.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, binders: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            Term::Ret(v) => {
                if !binders.contains(v) {
                    out.insert(v.clone());
                }
            }
            Term::Zero => {}
            Term::Op(_, args) => args.iter().for_each(|a| a.collect_free(binders, out)),
            Term::Prefix(_, e) => e.collect_free(binders, out),
            Term::Beta(v, e) | Term::Mu(v, e) => {
                binders.push(v.clone());
                e.collect_free(binders, out);
                binders.pop();
            }
        }
    }

    pub fn is_free(&self, v: &Var) -> bool {
        match self {
            Term::Ret(u) => u == v,
            Term::Zero => false,
            Term::Op(_, args) => args.iter().any(|a| a.is_free(v)),
            Term::Prefix(_, e) => e.is_free(v),
            Term::Beta(u, e) | Term::Mu(u, e) => u != v && e.is_free(v),
        }
    }

    /// Every variable name mentioned, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Ret(v) => {
                out.insert(v.clone());
            }
            Term::Zero => {}
            Term::Op(_, args) => args.iter().for_each(|a| a.collect_all(out)),
            Term::Prefix(_, e) => e.collect_all(out),
            Term::Beta(v, e) | Term::Mu(v, e) => {
                out.insert(v.clone());
                e.collect_all(out);
            }
        }
    }

    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Prefix(a, _) = t {
                out.insert(a.clone());
            }
        });
        out
    }

    pub fn ops(&self) -> Vec<&O> {
        let mut out = Vec::new();
        fn go<'a, O>(t: &'a Term<O>, out: &mut Vec<&'a O>) {
            match t {
                Term::Op(o, args) => {
                    out.push(o);
                    args.iter().for_each(|a| go(a, out));
                }
                Term::Prefix(_, e) | Term::Beta(_, e) | Term::Mu(_, e) => go(e, out),
                Term::Ret(_) | Term::Zero => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Term<O>)) {
        f(self);
        match self {
            Term::Op(_, args) => args.iter().for_each(|a| a.visit(f)),
            Term::Prefix(_, e) | Term::Beta(_, e) | Term::Mu(_, e) => e.visit(f),
            Term::Ret(_) | Term::Zero => {}
        }
    }

    /// True when no free occurrence of `v` lies outside the scope of an action.
    pub fn is_guarded(&self, v: &Var) -> bool {
        match self {
            Term::Ret(u) => u != v,
            Term::Zero | Term::Prefix(..) => true,
            Term::Op(_, args) => args.iter().all(|a| a.is_guarded(v)),
            Term::Beta(u, e) | Term::Mu(u, e) => u == v || e.is_guarded(v),
        }
    }

    pub fn analyze(&self) -> Analysis {
        let free = self.free_vars();
        let all = self.all_vars();
        let bound = all.difference(&free).cloned().collect();
        let guarded = all.iter().filter(|v| self.is_guarded(v)).cloned().collect();
        Analysis {
            free,
            bound,
            guarded,
        }
    }

    /// `e[g/v]`, capture-avoiding.
    pub fn substitute(&self, g: &Term<O>, v: &Var) -> Term<O> {
        self.substitute_many(&[(v.clone(), g.clone())])
    }

    /// Simultaneous substitution `e[g_1/v_1, …, g_n/v_n]`.
    pub fn substitute_many(&self, subst: &[(Var, Term<O>)]) -> Term<O> {
        if subst.is_empty() {
            return self.clone();
        }
        let mut avoid: BTreeSet<Var> = BTreeSet::new();
        for (v, g) in subst {
            avoid.insert(v.clone());
            avoid.extend(g.free_vars());
        }
        self.subst_rec(subst, &avoid)
    }

    fn subst_rec(&self, subst: &[(Var, Term<O>)], avoid: &BTreeSet<Var>) -> Term<O> {
        match self {
            Term::Ret(u) => subst
                .iter()
                .find(|(v, _)| v == u)
                .map_or_else(|| self.clone(), |(_, g)| g.clone()),
            Term::Zero => Term::Zero,
            Term::Op(o, args) => Term::Op(
                o.clone(),
                args.iter().map(|a| a.subst_rec(subst, avoid)).collect(),
            ),
            Term::Prefix(a, e) => Term::Prefix(a.clone(), Box::new(e.subst_rec(subst, avoid))),
            Term::Beta(u, e) | Term::Mu(u, e) => {
                let active: Vec<(Var, Term<O>)> = subst
                    .iter()
                    .filter(|(v, _)| v != u && e.is_free(v))
                    .cloned()
                    .collect();
                if active.is_empty() {
                    return self.clone();
                }
                let is_mu = matches!(self, Term::Mu(..));
                let needs_rename = active.iter().any(|(_, g)| g.is_free(u));
                let (u, body) = if needs_rename {
                    let mut taken = avoid.clone();
                    taken.extend(e.all_vars());
                    let fresh = fresh_var(u, &taken);
                    let renamed = if is_mu {
                        e.substitute(&Term::Ret(fresh.clone()), u)
                    } else {
                        e.rename_unguarded(u, &fresh)
                    };
                    (fresh, renamed)
                } else {
                    (u.clone(), (**e).clone())
                };
                let body = Box::new(body.subst_rec(&active, avoid));
                if is_mu {
                    Term::Mu(u, body)
                } else {
                    Term::Beta(u, body)
                }
            }
        }
    }

    /// Renames the unguarded free occurrences of `v`, the only ones an
    /// enclosing `β v` resolves.
    fn rename_unguarded(&self, v: &Var, to: &Var) -> Term<O> {
        self.map_unguarded(v, &mut || Term::Ret(to.clone()))
    }

    /// `e[0 unsub v]`: replaces every unguarded free occurrence of `v` with `0`.
    pub fn zero_unguarded(&self, v: &Var) -> Term<O> {
        self.map_unguarded(v, &mut || Term::Zero)
    }

    fn map_unguarded(&self, v: &Var, with: &mut dyn FnMut() -> Term<O>) -> Term<O> {
        match self {
            Term::Ret(u) if u == v => with(),
            Term::Ret(_) | Term::Zero | Term::Prefix(..) => self.clone(),
            Term::Op(o, args) => Term::Op(
                o.clone(),
                args.iter().map(|a| a.map_unguarded(v, with)).collect(),
            ),
            Term::Beta(u, _) | Term::Mu(u, _) if u == v => self.clone(),
            Term::Beta(u, e) => Term::Beta(u.clone(), Box::new(e.map_unguarded(v, with))),
            Term::Mu(u, e) => Term::Mu(u.clone(), Box::new(e.map_unguarded(v, with))),
        }
    }

    /// Syntactic guarded substitution `e⟪g // v⟫`: substitutes `g` for the free
    /// occurrences of `v` that lie under an action, leaving the unguarded ones
    /// in place. Unguarded `μ`-subterms are unfolded once to `β`-form so that
    /// the step of the result is the guarded substitution of the step of `e`.
    pub fn guarded_substitute(&self, g: &Term<O>, v: &Var) -> Term<O> {
        match self {
            Term::Ret(_) | Term::Zero => self.clone(),
            Term::Op(o, args) => Term::Op(
                o.clone(),
                args.iter().map(|a| a.guarded_substitute(g, v)).collect(),
            ),
            Term::Prefix(a, e) => Term::Prefix(a.clone(), Box::new(e.substitute(g, v))),
            Term::Beta(u, e) => {
                if u != v && g.is_free(u) {
                    let mut taken = g.all_vars();
                    taken.extend(e.all_vars());
                    taken.insert(v.clone());
                    let fresh = fresh_var(u, &taken);
                    Term::Beta(
                        fresh.clone(),
                        Box::new(e.rename_unguarded(u, &fresh).guarded_substitute(g, v)),
                    )
                } else {
                    Term::Beta(u.clone(), Box::new(e.guarded_substitute(g, v)))
                }
            }
            Term::Mu(u, e) => {
                if u == v || !e.is_free(v) {
                    return self.clone();
                }
                let unfolded = e.guarded_substitute(self, u);
                Term::Beta(u.clone(), Box::new(unfolded)).guarded_substitute(g, v)
            }
        }
    }
}

/// A variable `base#k` not in `taken`.
pub fn fresh_var(base: &Var, taken: &BTreeSet<Var>) -> Var {
    let stem = base.as_str().split('#').next().unwrap_or("v");
    (0..)
        .map(|k| Var::new(format!("{stem}#{k}")))
        .find(|v| !taken.contains(v))
        .expect("unbounded supply of names")
}

impl<O: fmt::Debug> fmt::Display for Term<O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Ret(v) => write!(f, "{v}"),
            Term::Zero => f.write_str("0"),
            Term::Op(o, args) => {
                write!(f, "{o:?}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Prefix(a, e) => write!(f, "{a}.{e}"),
            Term::Beta(v, e) => write!(f, "beta {v}. ({e})"),
            Term::Mu(v, e) => write!(f, "mu {v}. ({e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Term<u8>;

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    fn set(items: &[&str]) -> BTreeSet<Var> {
        items.iter().map(|s| v(s)).collect()
    }

    /// `μu a.(a.u ?_b v)` with the guard encoded as operation `1`.
    fn e1() -> T {
        T::mu(
            "u",
            T::prefix(
                "a",
                T::op(1, vec![T::prefix("a", T::ret("u")), T::ret("v")]),
            ),
        )
    }

    #[test]
    fn analysis_examples() {
        let a = T::ret("v").analyze();
        assert_eq!(a.free, set(&["v"]));
        assert!(a.guarded.is_empty());
        let a = T::prefix("a", T::ret("v")).analyze();
        assert_eq!(a.free, set(&["v"]));
        assert_eq!(a.guarded, set(&["v"]));
        let a = e1().analyze();
        assert_eq!(a.free, set(&["v"]));
        assert_eq!(a.bound, set(&["u"]));
    }

    #[test]
    fn substitution_examples() {
        let g = T::prefix("b", T::ret("w"));
        assert_eq!(T::ret("v").substitute(&g, &v("v")), g);
        let mu = T::mu("v", T::prefix("a", T::ret("v")));
        assert_eq!(mu.substitute(&g, &v("v")), mu);
        let loop_u = T::mu("u", T::prefix("a", T::ret("u")));
        assert_eq!(loop_u.substitute(&T::ret("u"), &v("w")), loop_u);
    }

    #[test]
    fn substitution_avoids_capture() {
        let e = T::mu(
            "u",
            T::op(0, vec![T::prefix("a", T::ret("u")), T::ret("v")]),
        );
        let got = e.substitute(&T::ret("u"), &v("v"));
        let Term::Mu(bound, body) = &got else {
            panic!("{got}")
        };
        assert_ne!(bound.as_str(), "u");
        assert!(got.free_vars().contains(&v("u")));
        assert_eq!(
            **body,
            T::op(0, vec![T::prefix("a", T::Ret(bound.clone())), T::ret("u")])
        );
    }

    #[test]
    fn zeroing_stops_at_prefixes() {
        let e = T::op(0, vec![T::ret("v"), T::prefix("a", T::ret("v"))]);
        assert_eq!(
            e.zero_unguarded(&v("v")),
            T::op(0, vec![T::Zero, T::prefix("a", T::ret("v"))])
        );
    }

    #[test]
    fn guarded_substitution_only_touches_prefixed_occurrences() {
        let e = T::op(0, vec![T::ret("v"), T::prefix("a", T::ret("v"))]);
        let g = T::ret("w");
        assert_eq!(
            e.guarded_substitute(&g, &v("v")),
            T::op(0, vec![T::ret("v"), T::prefix("a", g)])
        );
    }

    #[test]
    fn fresh_names_skip_taken() {
        let taken = set(&["u#0", "u#1"]);
        assert_eq!(fresh_var(&v("u#0"), &taken), v("u#2"));
    }
}
