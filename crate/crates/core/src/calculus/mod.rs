//! The process calculus: terms, the small-step semantics and automata.

mod automaton;
mod semantics;
mod term;

pub use automaton::{OrderedAutomaton, StateBranch};
pub use semantics::{
    closure_bound, Calculus, Explored, Target, TargetOrder, TermBranch, DEFAULT_MAX_STATES,
};
pub use term::{fresh_var, Action, ActionOrder, Analysis, Term, Var};
