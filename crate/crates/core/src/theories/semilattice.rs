//! Ordered semilattices: finitely generated downsets, kept as antichains of
//! maximal elements.

use std::collections::BTreeSet;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernel::{Gen, GenOrder, OpSyntax, STerm, Theory, TheoryKind};

/// The binary join.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Join;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Antichain<G: Ord>(BTreeSet<G>);

impl<G: Gen> Antichain<G> {
    /// Keeps the maximal elements. Among order-equivalent maxima the least one
    /// in the `Ord` sense represents the class.
    pub fn new(ctx: &dyn GenOrder<G>, items: impl IntoIterator<Item = G>) -> Self {
        let all: BTreeSet<G> = items.into_iter().collect();
        if ctx.is_discrete() {
            return Antichain(all);
        }
        let keep = all
            .iter()
            .filter(|s| {
                !all.iter()
                    .any(|t| t != *s && ctx.leq(s, t) && (!ctx.leq(t, s) || t < *s))
            })
            .cloned()
            .collect();
        Antichain(keep)
    }

    pub fn elements(&self) -> &BTreeSet<G> {
        &self.0
    }

    pub fn contains(&self, g: &G) -> bool {
        self.0.contains(g)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SemilatticeTheory;

impl Theory for SemilatticeTheory {
    type Op = Join;
    type Elem<G: Gen> = Antichain<G>;

    fn kind(&self) -> TheoryKind {
        TheoryKind::Semilattice
    }

    fn arity(&self, _: &Join) -> usize {
        2
    }

    fn validate_op(&self, _: &Join) -> Result<()> {
        Ok(())
    }

    fn zero<G: Gen>(&self) -> Antichain<G> {
        Antichain(BTreeSet::new())
    }

    fn unit<G: Gen>(&self, g: G) -> Antichain<G> {
        Antichain(BTreeSet::from([g]))
    }

    fn apply<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        _: &Join,
        args: &[Antichain<G>],
    ) -> Result<Antichain<G>> {
        match args {
            [a, b] => Ok(Antichain::new(ctx, a.0.iter().chain(&b.0).cloned())),
            _ => Err(Error::ArityMismatch {
                expected: 2,
                found: args.len(),
            }),
        }
    }

    fn leq<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        p: &Antichain<G>,
        q: &Antichain<G>,
    ) -> Result<bool> {
        Ok(p.0.iter().all(|s| q.0.iter().any(|t| ctx.leq(s, t))))
    }

    fn lfp<G: Gen>(&self, g: &G, p: &Antichain<G>) -> Antichain<G> {
        let mut out = p.clone();
        out.0.remove(g);
        out
    }

    fn bind<G: Gen, H: Gen>(
        &self,
        ctx: &dyn GenOrder<H>,
        p: &Antichain<G>,
        f: &mut dyn FnMut(&G) -> Antichain<H>,
    ) -> Antichain<H> {
        let mut all = Vec::new();
        for g in &p.0 {
            all.extend(f(g).0);
        }
        Antichain::new(ctx, all)
    }

    fn support<G: Gen>(&self, p: &Antichain<G>) -> Vec<G> {
        p.0.iter().cloned().collect()
    }

    fn coupling_exists<G: Gen, H: Gen>(
        &self,
        p: &Antichain<G>,
        q: &Antichain<H>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> Result<bool> {
        Ok(p.0.iter().all(|x| q.0.iter().any(|y| admissible(x, y))))
    }

    fn representative<G: Gen>(&self, p: &Antichain<G>) -> STerm<Join, G> {
        let mut items: Vec<STerm<Join, G>> = p.0.iter().cloned().map(STerm::Gen).collect();
        match items.pop() {
            None => STerm::Zero,
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, t| STerm::Op(Join, vec![t, acc])),
        }
    }

    fn op_syntax(&self, _: &Join) -> OpSyntax {
        OpSyntax::Join
    }

    fn op_from_syntax(&self, syntax: &OpSyntax) -> Result<Join> {
        match syntax {
            OpSyntax::Join => Ok(Join),
            other => Err(Error::TheoryMismatch(format!(
                "semilattice theory has no operation {other:?}"
            ))),
        }
    }

    fn edges<G: Gen>(&self, p: &Antichain<G>) -> Vec<(String, G)> {
        p.0.iter().map(|g| (String::new(), g.clone())).collect()
    }

    fn encode<G: Gen>(&self, p: &Antichain<G>, gen: &dyn Fn(&G) -> Value) -> Value {
        Value::Array(p.0.iter().map(gen).collect())
    }

    fn decode<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        value: &Value,
        gen: &dyn Fn(&Value) -> Result<G>,
    ) -> Result<Antichain<G>> {
        let items = value
            .as_array()
            .ok_or_else(|| Error::MalformedPayload("semilattice element must be an array".into()))?
            .iter()
            .map(gen)
            .collect::<Result<Vec<_>>>()?;
        let n = items.len();
        let a = Antichain::new(ctx, items);
        if a.0.len() != n {
            return Err(Error::MalformedPayload(
                "semilattice element is not a canonical antichain".into(),
            ));
        }
        Ok(a)
    }
}
