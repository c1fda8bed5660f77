//! Guarded probabilistic branching: one subdistribution per atom.

use std::marker::PhantomData;

use serde_json::{Map, Value};

use super::convex::{check_probability, weight_from_syntax};
use super::guarded::{atom_names_json, GuardedTheory};
use super::subdist::{format_weight, SubDist};
use super::{group_atoms, AtomSet, Atoms, DEFAULT_MAX_SUPPORT};
use crate::error::{Error, Result};
use crate::kernel::{Gen, GenOrder, OpSyntax, STerm, Theory, TheoryKind};
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PgOp<W> {
    Guard(AtomSet),
    Mix(W),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PgTable<G, W>(pub Vec<SubDist<G, W>>);

#[derive(Clone, Debug)]
pub struct ProbGkatTheory<W> {
    pub atoms: Atoms,
    pub max_support: usize,
    _weight: PhantomData<fn() -> W>,
}

impl<W> ProbGkatTheory<W> {
    pub fn new(atoms: Atoms) -> Self {
        ProbGkatTheory {
            atoms,
            max_support: DEFAULT_MAX_SUPPORT,
            _weight: PhantomData,
        }
    }

    pub fn with_max_support(atoms: Atoms, max_support: usize) -> Self {
        ProbGkatTheory {
            atoms,
            max_support,
            _weight: PhantomData,
        }
    }
}

impl<W: Weight> Theory for ProbGkatTheory<W> {
    type Op = PgOp<W>;
    type Elem<G: Gen> = PgTable<G, W>;

    fn atom_names(&self) -> Option<&[String]> {
        Some(self.atoms.names())
    }

    fn kind(&self) -> TheoryKind {
        TheoryKind::ProbGkat
    }

    fn arity(&self, _: &PgOp<W>) -> usize {
        2
    }

    fn validate_op(&self, op: &PgOp<W>) -> Result<()> {
        match op {
            PgOp::Guard(b) => self.atoms.validate(*b),
            PgOp::Mix(r) => check_probability(r),
        }
    }

    fn zero<G: Gen>(&self) -> PgTable<G, W> {
        PgTable(vec![SubDist::empty(); self.atoms.len()])
    }

    fn unit<G: Gen>(&self, g: G) -> PgTable<G, W> {
        PgTable(vec![SubDist::point(g); self.atoms.len()])
    }

    fn apply<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        op: &PgOp<W>,
        args: &[PgTable<G, W>],
    ) -> Result<PgTable<G, W>> {
        self.validate_op(op)?;
        let [f, g] = args else {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: args.len(),
            });
        };
        let n = self.atoms.len();
        Ok(PgTable(match op {
            PgOp::Guard(b) => (0..n)
                .map(|i| {
                    if b.contains(i) {
                        f.0[i].clone()
                    } else {
                        g.0[i].clone()
                    }
                })
                .collect(),
            PgOp::Mix(r) => (0..n).map(|i| f.0[i].mix(r, &g.0[i])).collect(),
        }))
    }

    fn leq<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        p: &PgTable<G, W>,
        q: &PgTable<G, W>,
    ) -> Result<bool> {
        for (a, b) in p.0.iter().zip(&q.0) {
            if !a.hh_leq(ctx, b, self.max_support)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn lfp<G: Gen>(&self, g: &G, p: &PgTable<G, W>) -> PgTable<G, W> {
        PgTable(p.0.iter().map(|d| d.lfp(g)).collect())
    }

    fn bind<G: Gen, H: Gen>(
        &self,
        _: &dyn GenOrder<H>,
        p: &PgTable<G, W>,
        f: &mut dyn FnMut(&G) -> PgTable<H, W>,
    ) -> PgTable<H, W> {
        let mut cache: Vec<(G, PgTable<H, W>)> = Vec::new();
        let mut lookup = |g: &G| -> PgTable<H, W> {
            if let Some((_, t)) = cache.iter().find(|(h, _)| h == g) {
                return t.clone();
            }
            let t = f(g);
            cache.push((g.clone(), t.clone()));
            t
        };
        PgTable(
            p.0.iter()
                .enumerate()
                .map(|(i, d)| d.bind(&mut |g| lookup(g).0[i].clone()))
                .collect(),
        )
    }

    fn support<G: Gen>(&self, p: &PgTable<G, W>) -> Vec<G> {
        let mut s: Vec<G> = p.0.iter().flat_map(|d| d.support()).collect();
        s.sort();
        s.dedup();
        s
    }

    fn coupling_exists<G: Gen, H: Gen>(
        &self,
        p: &PgTable<G, W>,
        q: &PgTable<H, W>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> Result<bool> {
        Ok(p.0
            .iter()
            .zip(&q.0)
            .all(|(a, b)| a.transports_into(b, admissible)))
    }

    fn representative<G: Gen>(&self, p: &PgTable<G, W>) -> STerm<PgOp<W>, G> {
        GuardedTheory::choice_tree(&self.atoms, &p.0, &PgOp::Guard, &|d: &SubDist<G, W>| {
            d.representative(&PgOp::Mix)
        })
    }

    fn op_syntax(&self, op: &PgOp<W>) -> OpSyntax {
        match op {
            PgOp::Guard(b) => OpSyntax::Guard(self.atoms.names_of(*b)),
            PgOp::Mix(r) => OpSyntax::Mix(r.to_rational()),
        }
    }

    fn op_from_syntax(&self, syntax: &OpSyntax) -> Result<PgOp<W>> {
        match syntax {
            OpSyntax::Guard(names) => Ok(PgOp::Guard(self.atoms.set_of(names)?)),
            OpSyntax::Mix(r) => Ok(PgOp::Mix(weight_from_syntax(r)?)),
            OpSyntax::Join => Err(Error::TheoryMismatch("probgkat theory has no join".into())),
        }
    }

    fn edges<G: Gen>(&self, p: &PgTable<G, W>) -> Vec<(String, G)> {
        let mut out = Vec::new();
        for (set, d) in group_atoms(&p.0) {
            let atoms = atom_names_json(&self.atoms, set);
            for (g, w) in d.weights() {
                out.push((format!("{atoms} {}", format_weight(w)), g.clone()));
            }
        }
        out
    }

    fn encode<G: Gen>(&self, p: &PgTable<G, W>, gen: &dyn Fn(&G) -> Value) -> Value {
        let mut map = Map::new();
        for (name, d) in self.atoms.names().iter().zip(&p.0) {
            map.insert(name.clone(), d.encode(gen));
        }
        Value::Object(map)
    }

    fn decode<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        value: &Value,
        gen: &dyn Fn(&Value) -> Result<G>,
    ) -> Result<PgTable<G, W>> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::MalformedPayload("probgkat table must be an object".into()))?;
        if map.len() != self.atoms.len() {
            return Err(Error::MalformedPayload(
                "probgkat table must list every atom".into(),
            ));
        }
        let entries = self
            .atoms
            .names()
            .iter()
            .map(|name| {
                let v = map
                    .get(name)
                    .ok_or_else(|| Error::MalformedPayload(format!("missing atom `{name}`")))?;
                SubDist::decode(v, gen)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PgTable(entries))
    }
}
