//! Ordered convex algebra: subdistributions under the heavier-higher order.

use std::marker::PhantomData;

use num_rational::BigRational;
use serde_json::Value;

use super::subdist::{format_weight, SubDist};
use super::DEFAULT_MAX_SUPPORT;
use crate::error::{Error, Result};
use crate::kernel::{Gen, GenOrder, OpSyntax, STerm, Theory, TheoryKind};
use crate::weight::Weight;

/// `⊕_r`: the left argument with probability `r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mix<W>(pub W);

#[derive(Clone, Debug)]
pub struct ConvexTheory<W> {
    pub max_support: usize,
    _weight: PhantomData<fn() -> W>,
}

impl<W> Default for ConvexTheory<W> {
    fn default() -> Self {
        ConvexTheory {
            max_support: DEFAULT_MAX_SUPPORT,
            _weight: PhantomData,
        }
    }
}

impl<W> ConvexTheory<W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_max_support(max_support: usize) -> Self {
        ConvexTheory {
            max_support,
            _weight: PhantomData,
        }
    }
}

pub(crate) fn check_probability<W: Weight>(r: &W) -> Result<()> {
    if r.is_probability() {
        Ok(())
    } else {
        Err(Error::MalformedPayload(format!("weight {r} outside [0,1]")))
    }
}

pub(crate) fn weight_from_syntax<W: Weight>(r: &BigRational) -> Result<W> {
    let w = W::from_rational(r)
        .ok_or_else(|| Error::Invalid(format!("{r} does not fit the weight type")))?;
    check_probability(&w)?;
    Ok(w)
}

impl<W: Weight> Theory for ConvexTheory<W> {
    type Op = Mix<W>;
    type Elem<G: Gen> = SubDist<G, W>;

    fn kind(&self) -> TheoryKind {
        TheoryKind::Convex
    }

    fn arity(&self, _: &Mix<W>) -> usize {
        2
    }

    fn validate_op(&self, op: &Mix<W>) -> Result<()> {
        check_probability(&op.0)
    }

    fn zero<G: Gen>(&self) -> SubDist<G, W> {
        SubDist::empty()
    }

    fn unit<G: Gen>(&self, g: G) -> SubDist<G, W> {
        SubDist::point(g)
    }

    fn apply<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        op: &Mix<W>,
        args: &[SubDist<G, W>],
    ) -> Result<SubDist<G, W>> {
        self.validate_op(op)?;
        match args {
            [p, q] => Ok(p.mix(&op.0, q)),
            _ => Err(Error::ArityMismatch {
                expected: 2,
                found: args.len(),
            }),
        }
    }

    fn leq<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        p: &SubDist<G, W>,
        q: &SubDist<G, W>,
    ) -> Result<bool> {
        p.hh_leq(ctx, q, self.max_support)
    }

    fn lfp<G: Gen>(&self, g: &G, p: &SubDist<G, W>) -> SubDist<G, W> {
        p.lfp(g)
    }

    fn bind<G: Gen, H: Gen>(
        &self,
        _: &dyn GenOrder<H>,
        p: &SubDist<G, W>,
        f: &mut dyn FnMut(&G) -> SubDist<H, W>,
    ) -> SubDist<H, W> {
        p.bind(f)
    }

    fn support<G: Gen>(&self, p: &SubDist<G, W>) -> Vec<G> {
        p.support()
    }

    fn coupling_exists<G: Gen, H: Gen>(
        &self,
        p: &SubDist<G, W>,
        q: &SubDist<H, W>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> Result<bool> {
        Ok(p.transports_into(q, admissible))
    }

    fn representative<G: Gen>(&self, p: &SubDist<G, W>) -> STerm<Mix<W>, G> {
        p.representative(&Mix)
    }

    fn op_syntax(&self, op: &Mix<W>) -> OpSyntax {
        OpSyntax::Mix(op.0.to_rational())
    }

    fn op_from_syntax(&self, syntax: &OpSyntax) -> Result<Mix<W>> {
        match syntax {
            OpSyntax::Mix(r) => Ok(Mix(weight_from_syntax(r)?)),
            other => Err(Error::TheoryMismatch(format!(
                "convex theory has no operation {other:?}"
            ))),
        }
    }

    fn edges<G: Gen>(&self, p: &SubDist<G, W>) -> Vec<(String, G)> {
        p.weights()
            .iter()
            .map(|(g, w)| (format_weight(w), g.clone()))
            .collect()
    }

    fn encode<G: Gen>(&self, p: &SubDist<G, W>, gen: &dyn Fn(&G) -> Value) -> Value {
        p.encode(gen)
    }

    fn decode<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        value: &Value,
        gen: &dyn Fn(&Value) -> Result<G>,
    ) -> Result<SubDist<G, W>> {
        SubDist::decode(value, gen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{self, Discrete, GeneratorContext};
    use std::collections::BTreeMap;

    type Q = BigRational;
    type T = ConvexTheory<Q>;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn d(pairs: &[(&'static str, i64, i64)]) -> SubDist<&'static str, Q> {
        SubDist::from_pairs(pairs.iter().map(|&(g, n, m)| (g, q(n, m)))).unwrap()
    }

    fn mix(
        r: Q,
        a: STerm<Mix<Q>, &'static str>,
        b: STerm<Mix<Q>, &'static str>,
    ) -> STerm<Mix<Q>, &'static str> {
        STerm::Op(Mix(r), vec![a, b])
    }

    /// Multiplies weights along every root-to-leaf path.
    fn accumulate(t: &STerm<Mix<Q>, &'static str>, w: Q, out: &mut BTreeMap<&'static str, Q>) {
        match t {
            STerm::Gen(g) => *out.entry(*g).or_insert_with(|| q(0, 1)) += w,
            STerm::Zero => {}
            STerm::Op(Mix(r), args) => {
                accumulate(&args[0], w.clone() * r, out);
                accumulate(&args[1], w * (q(1, 1) - r), out);
            }
        }
    }

    #[test]
    fn unit_and_basic_axioms() {
        let t = T::new();
        let ctx = GeneratorContext::discrete(["x", "y"]);
        assert_eq!(kernel::unit(&t, &ctx, "x").unwrap(), d(&[("x", 1, 1)]));
        let x = t.unit("x");
        let y = t.unit("y");
        assert_eq!(
            kernel::apply(&t, &ctx, &Mix(q(1, 2)), &[x.clone(), x.clone()]).unwrap(),
            x
        );
        assert_eq!(
            kernel::apply(&t, &ctx, &Mix(q(1, 1)), &[x.clone(), y.clone()]).unwrap(),
            x
        );
        assert!(matches!(
            kernel::apply(&t, &ctx, &Mix(q(3, 2)), &[x.clone(), y.clone()]),
            Err(Error::MalformedPayload(_))
        ));
        assert!(matches!(
            kernel::apply(&t, &ctx, &Mix(q(1, 2)), &[x]),
            Err(Error::ArityMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn normalize_matches_weight_accumulation() {
        let t = T::new();
        let term = mix(
            q(1, 2),
            mix(q(1, 2), STerm::Gen("x"), STerm::Gen("y")),
            STerm::Gen("y"),
        );
        let mut oracle = BTreeMap::new();
        accumulate(&term, q(1, 1), &mut oracle);
        let got = kernel::normalize(&t, &Discrete, &term).unwrap();
        assert_eq!(got.weights(), &oracle);
        assert_eq!(got, d(&[("x", 1, 4), ("y", 3, 4)]));
    }

    #[test]
    fn lfp_examples() {
        let t = T::new();
        let ctx = GeneratorContext::discrete(["x", "ax", "y"]);
        let p = d(&[("x", 1, 2), ("ax", 1, 2)]);
        assert_eq!(kernel::lfp(&t, &ctx, &"x", &p).unwrap(), d(&[("ax", 1, 1)]));
        assert_eq!(
            kernel::lfp(&t, &ctx, &"x", &d(&[("x", 1, 1)])).unwrap(),
            SubDist::empty()
        );
        let absent = d(&[("y", 1, 3)]);
        assert_eq!(kernel::lfp(&t, &ctx, &"x", &absent).unwrap(), absent);
    }

    #[test]
    fn lfp_rejects_ordered_generator() {
        let t = T::new();
        let ctx = GeneratorContext::with_order(["x", "y"], [("x", "y")]).unwrap();
        assert!(matches!(
            kernel::lfp(&t, &ctx, &"x", &d(&[("x", 1, 2)])),
            Err(Error::NotIsolated(_))
        ));
    }

    #[test]
    fn leq_discrete_examples() {
        let t = T::new();
        let ctx = GeneratorContext::discrete(["x", "y"]);
        assert!(kernel::element_leq(
            &t,
            &ctx,
            &d(&[("x", 1, 2)]),
            &d(&[("x", 1, 2), ("y", 1, 2)])
        )
        .unwrap());
        assert!(kernel::element_leq(&t, &ctx, &SubDist::empty(), &d(&[("y", 1, 3)])).unwrap());
    }

    #[test]
    fn rename_sums_weights() {
        let t = T::new();
        let src = GeneratorContext::discrete(["x", "y"]);
        let dst = GeneratorContext::discrete(["z"]);
        let p = d(&[("x", 1, 2), ("y", 1, 2)]);
        assert_eq!(
            kernel::rename(&t, &src, &dst, &|_| Some("z"), &p).unwrap(),
            d(&[("z", 1, 1)])
        );
        assert_eq!(
            kernel::rename(&t, &src, &src, &|g| Some(*g), &p).unwrap(),
            p
        );
    }

    #[test]
    fn rename_rejects_non_monotone_maps() {
        let t = T::new();
        let src = GeneratorContext::with_order(["x", "y"], [("x", "y")]).unwrap();
        let dst = GeneratorContext::discrete(["x", "y"]);
        let p = d(&[("x", 1, 2)]);
        assert!(matches!(
            kernel::rename(&t, &src, &dst, &|g| Some(*g), &p),
            Err(Error::NonMonotoneMap(_))
        ));
        assert!(matches!(
            kernel::rename(&t, &src, &dst, &|_| None, &p),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn coupling_examples() {
        let t = T::new();
        let ord = GeneratorContext::with_order(["x", "y"], [("x", "y")]).unwrap();
        let px = d(&[("x", 1, 1)]);
        let py = d(&[("y", 1, 1)]);
        assert!(kernel::weak_coupling_exists(&t, &ord, &|g| *g, &px, &py).unwrap());
        let flat = GeneratorContext::discrete(["x", "y"]);
        assert!(!kernel::weak_coupling_exists(&t, &flat, &|g| *g, &px, &py).unwrap());
        assert!(kernel::weak_coupling_exists(&t, &flat, &|g| *g, &px, &px).unwrap());
    }
}
