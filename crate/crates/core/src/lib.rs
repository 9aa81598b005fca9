//! Quantifier elimination for existentially quantified CNF formulas by
//! branching, with order-constrained D-sequents and safe re-use of stored
//! D-sequents.
//!
//! - [`cnf`]: clauses, assignments, cofactoring, resolution, problems.
//! - [`oracle`]: exhaustive ground truth for small instances.
//! - [`dsequent`]: the D-sequent calculus.
//! - [`solver`]: the branching solver.
//! - [`qdimacs`]: input and output formats.

pub mod cnf;
pub mod dsequent;
pub mod exec;
pub mod oracle;
pub mod qdimacs;
pub mod sat;
pub mod solver;

pub use cnf::{Assignment, Clause, ClauseId, CnfError, CnfFormula, EcnfProblem, FormulaTag, Lit, Var};
pub use dsequent::{DSequent, DseqError};
pub use exec::Exec;
pub use oracle::{Oracle, OracleError};
pub use solver::{solve, SolveError, SolveOptions, SolveResult, Stats};
