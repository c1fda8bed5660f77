//! Ordered process calculi over pluggable inequational branching theories.

pub mod acceptance;
pub mod behaviour;
pub mod calculus;
pub mod error;
pub mod fragments;
pub mod kernel;
pub mod random;
pub mod relation;
pub mod solver;
pub mod syntax;
pub mod theories;
pub mod weight;

pub use error::{Error, ParseError, Result, SourceSpan};
pub use kernel::{GenOrder, GeneratorContext, STerm, Theory, TheoryKind};
pub use weight::Weight;

pub type Rational = num_rational::BigRational;
pub type Convex = theories::ConvexTheory<Rational>;
pub type ProbGkat = theories::ProbGkatTheory<Rational>;
pub use theories::{GuardedTheory as Guarded, SemilatticeTheory as Semilattice};
