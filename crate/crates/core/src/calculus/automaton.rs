//! Finite ordered automata: monotone coalgebras on a finite preorder.

use super::semantics::{Target, TargetOrder};
use super::term::ActionOrder;
use crate::error::{Error, Result};
use crate::kernel::Theory;
use crate::relation::close_transitively;

/// A branch whose pair generators reference states by index.
pub type StateBranch<T> = <T as Theory>::Elem<Target<usize>>;

#[derive(Clone, Debug)]
pub struct OrderedAutomaton<T: Theory> {
    pub theory: T,
    pub actions: ActionOrder,
    labels: Vec<String>,
    branches: Vec<StateBranch<T>>,
    order: Vec<Vec<bool>>,
}

impl<T: Theory> OrderedAutomaton<T> {
    /// Validates targets, closes the declared order and checks that the
    /// structure map is monotone for it.
    pub fn from_parts(
        theory: T,
        actions: ActionOrder,
        labels: Vec<String>,
        branches: Vec<StateBranch<T>>,
        order_pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = branches.len();
        if labels.len() != n {
            return Err(Error::Invalid(format!(
                "{} labels for {} states",
                labels.len(),
                n
            )));
        }
        for (i, b) in branches.iter().enumerate() {
            for g in theory.support(b) {
                match g {
                    Target::Next(a, j) => {
                        if j >= n {
                            return Err(Error::Invalid(format!(
                                "state {i} refers to missing state {j}"
                            )));
                        }
                        actions.check(&a)?;
                    }
                    Target::Ret(_) => {}
                }
            }
        }
        let mut order = vec![vec![false; n]; n];
        for (i, row) in order.iter_mut().enumerate() {
            row[i] = true;
        }
        for (x, y) in order_pairs {
            if x >= n || y >= n {
                return Err(Error::Invalid(format!(
                    "order pair ({x}, {y}) names a missing state"
                )));
            }
            order[x][y] = true;
        }
        close_transitively(&mut order);
        let mut a = OrderedAutomaton {
            theory,
            actions,
            labels,
            branches,
            order,
        };
        if !a.is_discrete() {
            let ord = a.declared_order();
            let canonical: Vec<_> = a
                .branches
                .iter()
                .map(|b| a.theory.canonicalize(&ord, b))
                .collect();
            drop(ord);
            a.branches = canonical;
            let ord = a.declared_order();
            for x in 0..n {
                for y in 0..n {
                    if x != y
                        && a.order[x][y]
                        && !a.theory.leq(&ord, &a.branches[x], &a.branches[y])?
                    {
                        return Err(Error::NotMonotone(format!(
                            "state `{}` is declared below `{}` but its branch is not",
                            a.labels[x], a.labels[y]
                        )));
                    }
                }
            }
        }
        Ok(a)
    }

    /// A discrete automaton with numbered labels.
    pub fn discrete(
        theory: T,
        actions: ActionOrder,
        branches: Vec<StateBranch<T>>,
    ) -> Result<Self> {
        let labels = (0..branches.len()).map(|i| format!("x{i}")).collect();
        Self::from_parts(theory, actions, labels, branches, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn branch(&self, i: usize) -> &StateBranch<T> {
        &self.branches[i]
    }

    pub fn branches(&self) -> &[StateBranch<T>] {
        &self.branches
    }

    pub fn declared_leq(&self, x: usize, y: usize) -> bool {
        self.order[x][y]
    }

    pub fn order_matrix(&self) -> &[Vec<bool>] {
        &self.order
    }

    pub fn is_discrete(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || !self.order[i][j]))
    }

    /// Strictly declared pairs, for serialization.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.order[i][j])
            .collect()
    }

    pub fn declared_order(&self) -> TargetOrder<'_, impl Fn(&usize, &usize) -> bool + '_> {
        let mut ord = TargetOrder::new(&self.actions, move |x: &usize, y: &usize| {
            self.order[*x][*y]
        });
        ord.discrete = self.actions.is_discrete() && self.is_discrete();
        ord
    }

    pub fn successors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .theory
            .support(&self.branches[i])
            .into_iter()
            .filter_map(|g| g.state().copied())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// `self ⊎ other`; the states of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &OrderedAutomaton<T>) -> Result<OrderedAutomaton<T>> {
        if self.theory.kind() != other.theory.kind() {
            return Err(Error::TheoryMismatch(format!(
                "{} automaton combined with {} automaton",
                self.theory.kind(),
                other.theory.kind()
            )));
        }
        let offset = self.len();
        let mut branches = self.branches.clone();
        let ord = TargetOrder::identity(&self.actions);
        for b in &other.branches {
            branches.push(self.theory.map(&ord, b, &mut |t: &Target<usize>| match t {
                Target::Ret(v) => Target::Ret(v.clone()),
                Target::Next(a, j) => Target::Next(a.clone(), j + offset),
            }));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut pairs = self.order_pairs();
        pairs.extend(
            other
                .order_pairs()
                .into_iter()
                .map(|(i, j)| (i + offset, j + offset)),
        );
        OrderedAutomaton::from_parts(
            self.theory.clone(),
            self.actions.clone(),
            labels,
            branches,
            pairs,
        )
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Invalid(
                "label count differs from state count".into(),
            ));
        }
        self.labels = labels;
        Ok(self)
    }
}
