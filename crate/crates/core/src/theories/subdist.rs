//! Finite subdistributions with exact weights, shared by the convex and
//! probabilistic-guarded theories.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{json, Value};

use super::flow;
use crate::error::{Error, Result};
use crate::kernel::{Gen, GenOrder, STerm};
use crate::weight::{parse_rational, Weight};

/// A finite subdistribution. Zero weights are never stored and the total mass
/// is at most one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubDist<G, W>(BTreeMap<G, W>);

impl<G: Gen, W: Weight> Default for SubDist<G, W> {
    fn default() -> Self {
        SubDist(BTreeMap::new())
    }
}

impl<G: Gen, W: Weight> SubDist<G, W> {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point(g: G) -> Self {
        SubDist(BTreeMap::from([(g, W::one())]))
    }

    /// Builds a subdistribution, merging repeated generators.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (G, W)>) -> Result<Self> {
        let mut map: BTreeMap<G, W> = BTreeMap::new();
        for (g, w) in pairs {
            if w.is_negative() {
                return Err(Error::MalformedPayload(format!("negative weight {w}")));
            }
            let slot = map.entry(g).or_insert_with(W::zero);
            *slot = slot.clone() + w;
        }
        map.retain(|_, w| !w.is_zero());
        let d = SubDist(map);
        if d.mass() > W::one() {
            return Err(Error::MalformedPayload(format!(
                "total mass {} exceeds one",
                d.mass()
            )));
        }
        Ok(d)
    }

    pub fn weights(&self) -> &BTreeMap<G, W> {
        &self.0
    }

    pub fn weight(&self, g: &G) -> W {
        self.0.get(g).cloned().unwrap_or_else(W::zero)
    }

    pub fn mass(&self) -> W {
        self.0.values().cloned().fold(W::zero(), |a, b| a + b)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<G> {
        self.0.keys().cloned().collect()
    }

    fn add_scaled(acc: &mut BTreeMap<G, W>, d: &SubDist<G, W>, r: &W) {
        if r.is_zero() {
            return;
        }
        for (g, w) in &d.0 {
            let slot = acc.entry(g.clone()).or_insert_with(W::zero);
            *slot = slot.clone() + w.clone() * r.clone();
        }
    }

    /// `self ⊕_r other`.
    pub fn mix(&self, r: &W, other: &SubDist<G, W>) -> Self {
        let mut acc = BTreeMap::new();
        Self::add_scaled(&mut acc, self, r);
        Self::add_scaled(&mut acc, other, &(W::one() - r.clone()));
        acc.retain(|_, w| !w.is_zero());
        SubDist(acc)
    }

    /// Least `g`-prefixed point: conditioning on not hitting `g`.
    pub fn lfp(&self, g: &G) -> Self {
        let r = self.weight(g);
        if r.is_zero() {
            return self.clone();
        }
        if r == W::one() {
            return Self::empty();
        }
        let scale = W::one() / (W::one() - r);
        SubDist(
            self.0
                .iter()
                .filter(|(h, _)| *h != g)
                .map(|(h, w)| (h.clone(), w.clone() * scale.clone()))
                .collect(),
        )
    }

    /// Monad multiplication after substituting `f(g)` for every generator.
    pub fn bind<H: Gen>(&self, f: &mut dyn FnMut(&G) -> SubDist<H, W>) -> SubDist<H, W> {
        let mut acc = BTreeMap::new();
        for (g, w) in &self.0 {
            SubDist::add_scaled(&mut acc, &f(g), w);
        }
        acc.retain(|_, w: &mut W| !w.is_zero());
        SubDist(acc)
    }

    /// Pointwise comparison, valid when the support is an antichain.
    pub fn pointwise_leq(&self, other: &SubDist<G, W>) -> bool {
        self.0.iter().all(|(g, w)| *w <= other.weight(g))
    }

    /// Heavier-higher order by enumeration of the upward-closed subsets of the
    /// union of both supports.
    pub fn hh_leq(
        &self,
        ctx: &dyn GenOrder<G>,
        other: &SubDist<G, W>,
        max_support: usize,
    ) -> Result<bool> {
        if self.mass() > other.mass() {
            return Ok(false);
        }
        if ctx.is_discrete() {
            return Ok(self.pointwise_leq(other));
        }
        let mut elems: Vec<G> = self.0.keys().chain(other.0.keys()).cloned().collect();
        elems.sort();
        elems.dedup();
        let n = elems.len();
        let le: Vec<Vec<bool>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| ctx.leq(a, b)).collect())
            .collect();
        if (0..n).all(|i| (0..n).all(|j| i == j || !le[i][j])) {
            return Ok(self.pointwise_leq(other));
        }
        if n > max_support {
            return Err(Error::ResourceLimit {
                what: "support of a heavier-higher comparison".into(),
                limit: max_support,
            });
        }

        // Collapse order-equivalent generators, then walk the quotient poset
        // from the top so that every partial choice is upward closed.
        let mut class = vec![usize::MAX; n];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..n {
            if class[i] == usize::MAX {
                class[i] = reps.len();
                for j in i + 1..n {
                    if le[i][j] && le[j][i] {
                        class[j] = reps.len();
                    }
                }
                reps.push(i);
            }
        }
        let k = reps.len();
        let mut lhs = vec![W::zero(); k];
        let mut rhs = vec![W::zero(); k];
        for (i, g) in elems.iter().enumerate() {
            lhs[class[i]] = lhs[class[i]].clone() + self.weight(g);
            rhs[class[i]] = rhs[class[i]].clone() + other.weight(g);
        }
        let above: Vec<Vec<usize>> = (0..k)
            .map(|c| (0..k).filter(|&d| d != c && le[reps[c]][reps[d]]).collect())
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&c| above[c].len());

        struct Walk<'a, W> {
            order: &'a [usize],
            above: &'a [Vec<usize>],
            lhs: &'a [W],
            rhs: &'a [W],
            chosen: Vec<bool>,
        }
        impl<W: Weight> Walk<'_, W> {
            fn go(&mut self, at: usize, l: W, r: W) -> bool {
                if l > r {
                    return false;
                }
                if at == self.order.len() {
                    return true;
                }
                let c = self.order[at];
                if !self.go(at + 1, l.clone(), r.clone()) {
                    return false;
                }
                if self.above[c].iter().all(|&d| self.chosen[d]) {
                    self.chosen[c] = true;
                    let ok = self.go(at + 1, l + self.lhs[c].clone(), r + self.rhs[c].clone());
                    self.chosen[c] = false;
                    return ok;
                }
                true
            }
        }
        let mut walk = Walk {
            order: &order,
            above: &above,
            lhs: &lhs,
            rhs: &rhs,
            chosen: vec![false; k],
        };
        Ok(walk.go(0, W::zero(), W::zero()))
    }

    /// Decides whether all of `self` can be transported into `other` along
    /// admissible pairs.
    pub fn transports_into<H: Gen>(
        &self,
        other: &SubDist<H, W>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> bool {
        let left: Vec<(&G, &W)> = self.0.iter().collect();
        let right: Vec<(&H, &W)> = other.0.iter().collect();
        let supply: Vec<W> = left.iter().map(|(_, w)| (*w).clone()).collect();
        let demand: Vec<W> = right.iter().map(|(_, w)| (*w).clone()).collect();
        flow::feasible(&supply, &demand, &|i, j| admissible(left[i].0, right[j].0))
    }

    /// Heavier-higher order through the transport characterisation.
    pub fn hh_leq_by_flow(&self, ctx: &dyn GenOrder<G>, other: &SubDist<G, W>) -> bool {
        self.transports_into(other, &|a, b| ctx.leq(a, b))
    }

    /// A right-nested chain of `⊕` over the support, ending in `0` if mass is missing.
    pub fn representative<O: Clone>(&self, mix: &dyn Fn(W) -> O) -> STerm<O, G> {
        let mut items: Vec<(STerm<O, G>, W)> = self
            .0
            .iter()
            .map(|(g, w)| (STerm::Gen(g.clone()), w.clone()))
            .collect();
        let mass = self.mass();
        if mass < W::one() {
            items.push((STerm::Zero, W::one() - mass));
        }
        fn chain<O: Clone, G: Clone, W: Weight>(
            items: &[(STerm<O, G>, W)],
            rest: W,
            mix: &dyn Fn(W) -> O,
        ) -> STerm<O, G> {
            match items {
                [] => STerm::Zero,
                [(t, _)] => t.clone(),
                [(t, w), tail @ ..] => {
                    let r = w.clone() / rest.clone();
                    let inner = chain(tail, rest - w.clone(), mix);
                    STerm::Op(mix(r), vec![t.clone(), inner])
                }
            }
        }
        chain(&items, W::one(), mix)
    }

    pub fn encode(&self, gen: &dyn Fn(&G) -> Value) -> Value {
        Value::Array(
            self.0
                .iter()
                .map(|(g, w)| json!({ "target": gen(g), "weight": format_weight(w) }))
                .collect(),
        )
    }

    pub fn decode(value: &Value, gen: &dyn Fn(&Value) -> Result<G>) -> Result<Self> {
        let items = value
            .as_array()
            .ok_or_else(|| Error::MalformedPayload("subdistribution must be an array".into()))?;
        let mut pairs = Vec::new();
        for item in items {
            let target = item
                .get("target")
                .ok_or_else(|| Error::MalformedPayload("missing `target`".into()))?;
            let weight = item
                .get("weight")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::MalformedPayload("missing `weight` string".into()))?;
            let w = parse_weight::<W>(weight)?;
            if w.is_zero() {
                return Err(Error::MalformedPayload(
                    "zero weights are not stored".into(),
                ));
            }
            pairs.push((gen(target)?, w));
        }
        let before = pairs.len();
        let d = Self::from_pairs(pairs)?;
        if d.0.len() != before {
            return Err(Error::MalformedPayload("repeated target".into()));
        }
        Ok(d)
    }
}

pub(crate) fn format_weight<W: Weight>(w: &W) -> String {
    let r = w.to_rational();
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_weight<W: Weight>(text: &str) -> Result<W> {
    let r: BigRational = parse_rational(text)?;
    W::from_rational(&r)
        .ok_or_else(|| Error::Invalid(format!("`{text}` does not fit the weight type")))
}
