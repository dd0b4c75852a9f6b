//! Decision procedure for universal and existential positive conjectures over
//! Horn clause sets with simple linear rational arithmetic.
//!
//! The pipeline partitions the rationals into intervals induced by the
//! variable bounds of the problem, picks finitely many test points, and
//! translates the question into either a ground finite abstraction (decided by
//! a brute-force oracle) or a pure Datalog program (decided by the embedded
//! semi-naive engine with stratified negation). Every translation is
//! cross-validated against the independent ground oracle.

pub mod frontend;
pub mod logic;
pub mod preprocess;
pub mod testpoints;
pub mod rat;

pub use logic::{
    abstract_clause, hierarchic_resolve, mgu, simplify_theory_atom, Clause, CmpOp, FreeAtom,
    GroundTerm, Literal, Substitution, Term, TheoryAtom,
};
pub use rat::Rat;
