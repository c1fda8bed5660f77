//! Ordered guarded algebra: tables from atoms to an optional generator.

use serde_json::{Map, Value};

use super::{group_atoms, AtomSet, Atoms};
use crate::error::{Error, Result};
use crate::kernel::{Gen, GenOrder, OpSyntax, STerm, Theory, TheoryKind};

/// One entry per declared atom; `None` is `⊥`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GuardedTable<G>(pub Vec<Option<G>>);

impl<G> GuardedTable<G> {
    pub fn entries(&self) -> &[Option<G>] {
        &self.0
    }
}

#[derive(Clone, Debug)]
pub struct GuardedTheory {
    pub atoms: Atoms,
}

impl GuardedTheory {
    pub fn new(atoms: Atoms) -> Self {
        GuardedTheory { atoms }
    }

    pub fn table<G: Gen>(&self, entries: Vec<Option<G>>) -> Result<GuardedTable<G>> {
        if entries.len() != self.atoms.len() {
            return Err(Error::MalformedPayload(format!(
                "guarded table has {} entries for {} atoms",
                entries.len(),
                self.atoms.len()
            )));
        }
        Ok(GuardedTable(entries))
    }

    pub(crate) fn choice_tree<G: Clone, O: Clone, V: PartialEq>(
        atoms: &Atoms,
        values: &[V],
        guard: &dyn Fn(AtomSet) -> O,
        leaf: &dyn Fn(&V) -> STerm<O, G>,
    ) -> STerm<O, G> {
        let groups = group_atoms(values);
        let mut iter = groups.iter().rev();
        let (_, last) = iter.next().expect("at least one atom");
        let mut term = leaf(last);
        for (set, v) in iter {
            debug_assert!(atoms.validate(*set).is_ok());
            term = STerm::Op(guard(*set), vec![leaf(v), term]);
        }
        term
    }
}

pub(crate) fn atom_names_json(atoms: &Atoms, set: AtomSet) -> String {
    atoms.names_of(set).join(",")
}

impl Theory for GuardedTheory {
    type Op = AtomSet;
    type Elem<G: Gen> = GuardedTable<G>;

    fn atom_names(&self) -> Option<&[String]> {
        Some(self.atoms.names())
    }

    fn kind(&self) -> TheoryKind {
        TheoryKind::Guarded
    }

    fn arity(&self, _: &AtomSet) -> usize {
        2
    }

    fn validate_op(&self, op: &AtomSet) -> Result<()> {
        self.atoms.validate(*op)
    }

    fn zero<G: Gen>(&self) -> GuardedTable<G> {
        GuardedTable(vec![None; self.atoms.len()])
    }

    fn unit<G: Gen>(&self, g: G) -> GuardedTable<G> {
        GuardedTable(vec![Some(g); self.atoms.len()])
    }

    fn apply<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        op: &AtomSet,
        args: &[GuardedTable<G>],
    ) -> Result<GuardedTable<G>> {
        self.validate_op(op)?;
        match args {
            [f, g] => Ok(GuardedTable(
                (0..self.atoms.len())
                    .map(|i| {
                        if op.contains(i) {
                            f.0[i].clone()
                        } else {
                            g.0[i].clone()
                        }
                    })
                    .collect(),
            )),
            _ => Err(Error::ArityMismatch {
                expected: 2,
                found: args.len(),
            }),
        }
    }

    fn leq<G: Gen>(
        &self,
        ctx: &dyn GenOrder<G>,
        p: &GuardedTable<G>,
        q: &GuardedTable<G>,
    ) -> Result<bool> {
        Ok(p.0.iter().zip(&q.0).all(|(a, b)| match (a, b) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(x), Some(y)) => ctx.leq(x, y),
        }))
    }

    fn lfp<G: Gen>(&self, g: &G, p: &GuardedTable<G>) -> GuardedTable<G> {
        GuardedTable(
            p.0.iter()
                .map(|e| e.as_ref().filter(|x| *x != g).cloned())
                .collect(),
        )
    }

    fn bind<G: Gen, H: Gen>(
        &self,
        _: &dyn GenOrder<H>,
        p: &GuardedTable<G>,
        f: &mut dyn FnMut(&G) -> GuardedTable<H>,
    ) -> GuardedTable<H> {
        GuardedTable(
            p.0.iter()
                .enumerate()
                .map(|(i, e)| e.as_ref().and_then(|x| f(x).0[i].clone()))
                .collect(),
        )
    }

    fn support<G: Gen>(&self, p: &GuardedTable<G>) -> Vec<G> {
        let mut s: Vec<G> = p.0.iter().flatten().cloned().collect();
        s.sort();
        s.dedup();
        s
    }

    fn coupling_exists<G: Gen, H: Gen>(
        &self,
        p: &GuardedTable<G>,
        q: &GuardedTable<H>,
        admissible: &dyn Fn(&G, &H) -> bool,
    ) -> Result<bool> {
        Ok(p.0.iter().zip(&q.0).all(|(a, b)| match (a, b) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(x), Some(y)) => admissible(x, y),
        }))
    }

    fn representative<G: Gen>(&self, p: &GuardedTable<G>) -> STerm<AtomSet, G> {
        Self::choice_tree(&self.atoms, &p.0, &|s| s, &|v: &Option<G>| match v {
            None => STerm::Zero,
            Some(g) => STerm::Gen(g.clone()),
        })
    }

    fn op_syntax(&self, op: &AtomSet) -> OpSyntax {
        OpSyntax::Guard(self.atoms.names_of(*op))
    }

    fn op_from_syntax(&self, syntax: &OpSyntax) -> Result<AtomSet> {
        match syntax {
            OpSyntax::Guard(names) => self.atoms.set_of(names),
            other => Err(Error::TheoryMismatch(format!(
                "guarded theory has no operation {other:?}"
            ))),
        }
    }

    fn edges<G: Gen>(&self, p: &GuardedTable<G>) -> Vec<(String, G)> {
        group_atoms(&p.0)
            .into_iter()
            .filter_map(|(set, v)| {
                v.as_ref()
                    .map(|g| (atom_names_json(&self.atoms, set), g.clone()))
            })
            .collect()
    }

    fn encode<G: Gen>(&self, p: &GuardedTable<G>, gen: &dyn Fn(&G) -> Value) -> Value {
        let mut map = Map::new();
        for (name, e) in self.atoms.names().iter().zip(&p.0) {
            map.insert(name.clone(), e.as_ref().map_or(Value::Null, gen));
        }
        Value::Object(map)
    }

    fn decode<G: Gen>(
        &self,
        _: &dyn GenOrder<G>,
        value: &Value,
        gen: &dyn Fn(&Value) -> Result<G>,
    ) -> Result<GuardedTable<G>> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::MalformedPayload("guarded table must be an object".into()))?;
        if map.len() != self.atoms.len() {
            return Err(Error::MalformedPayload(
                "guarded table must list every atom".into(),
            ));
        }
        let entries = self
            .atoms
            .names()
            .iter()
            .map(|name| match map.get(name) {
                None => Err(Error::MalformedPayload(format!("missing atom `{name}`"))),
                Some(Value::Null) => Ok(None),
                Some(v) => gen(v).map(Some),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GuardedTable(entries))
    }
}
