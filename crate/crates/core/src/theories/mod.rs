//! The shipped branching theories.

pub mod convex;
pub mod flow;
pub mod guarded;
pub mod probgkat;
pub mod semilattice;
mod subdist;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use convex::{ConvexTheory, Mix};
pub use guarded::{GuardedTable, GuardedTheory};
pub use probgkat::{PgOp, ProbGkatTheory};
pub use semilattice::{Antichain, Join, SemilatticeTheory};
pub use subdist::SubDist;

/// Default cap on the support size for heavier-higher comparisons.
pub const DEFAULT_MAX_SUPPORT: usize = 20;

/// A subset of the declared atoms, as a bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AtomSet(pub u64);

impl AtomSet {
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> AtomSet {
        AtomSet(self.0 | 1 << i)
    }

    pub fn indices(self, n: usize) -> impl Iterator<Item = usize> {
        (0..n).filter(move |&i| self.contains(i))
    }
}

/// The declared atom names, in declaration order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atoms(Arc<[String]>);

impl Atoms {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Atoms> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Invalid("at least one atom is required".into()));
        }
        if names.len() > 64 {
            return Err(Error::ResourceLimit {
                what: "number of atoms".into(),
                limit: 64,
            });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate atom `{n}`")));
            }
        }
        Ok(Atoms(names.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn full(&self) -> AtomSet {
        if self.len() == 64 {
            AtomSet(u64::MAX)
        } else {
            AtomSet((1u64 << self.len()) - 1)
        }
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<AtomSet> {
        let mut set = AtomSet::default();
        for n in names {
            let i = self
                .index_of(n.as_ref())
                .ok_or_else(|| Error::MalformedPayload(format!("unknown atom `{}`", n.as_ref())))?;
            set = set.with(i);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: AtomSet) -> Vec<String> {
        set.indices(self.len()).map(|i| self.0[i].clone()).collect()
    }

    pub fn validate(&self, set: AtomSet) -> Result<()> {
        if set.0 & !self.full().0 != 0 {
            return Err(Error::MalformedPayload(format!(
                "test set {:#x} mentions undeclared atoms",
                set.0
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Atoms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Groups atom indices by equal value, in order of first occurrence.
pub(crate) fn group_atoms<T: PartialEq>(values: &[T]) -> Vec<(AtomSet, &T)> {
    let mut groups: Vec<(AtomSet, &T)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match groups.iter_mut().find(|(_, w)| *w == v) {
            Some((set, _)) => *set = set.with(i),
            None => groups.push((AtomSet::default().with(i), v)),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_sets_follow_names() {
        let atoms = Atoms::new(["a1", "a2", "a3"]).unwrap();
        let s = atoms.set_of(&["a3", "a1"]).unwrap();
        assert_eq!(atoms.names_of(s), vec!["a1", "a3"]);
        assert!(atoms.set_of(&["zz"]).is_err());
        assert_eq!(atoms.full(), AtomSet(0b111));
        assert!(atoms.validate(AtomSet(0b1000)).is_err());
        assert!(Atoms::new(["x", "x"]).is_err());
    }

    #[test]
    fn grouping_keeps_first_occurrence_order() {
        let g = group_atoms(&[2, 1, 2, 3]);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0], (AtomSet(0b101), &2));
        assert_eq!(g[2], (AtomSet(0b1000), &3));
    }
}
