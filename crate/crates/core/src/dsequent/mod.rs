//! Order-constrained D-sequents.
//!
//! A D-sequent `(q, H) → C` records that clause `C` is redundant in the
//! subspace `q` of every member formula `W` with `H ∪ {C} ⊆ W ⊆ F` that is
//! equivalent to `F` under `q`. `H` is the order constraint: its clauses must
//! still be present when `C` is dropped, i.e. they are proved redundant after
//! `C`. A D-sequent is *robust* when `H` holds no X-clause, *fragile* otherwise.
//!
//! Submodules:
//! - [`atomic`]: the trivially justified D-sequents,
//! - [`transform`]: join, alignment, substitution, constraint relaxation and
//!   the consistency test,
//! - [`active`]: the active set of the current branch with its order graph,
//! - [`store`]: persisted D-sequents kept for re-use.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::cnf::{Assignment, ClauseId, CnfError, EcnfProblem, FormulaTag, Var};

pub mod active;
pub mod atomic;
pub mod store;
pub mod transform;

pub use active::{ActiveSet, Inconsistency};
pub use atomic::{atomic_first_kind, atomic_second_kind, atomic_third_kind, atomic_witness};
pub use store::{DSequentStore, StoreConfig, StoreSnapshot};
pub use transform::{
    align, check_consistent, join, relax_bound_holds, relax_constraint, relax_constraint_traced, substitute,
    topological_order, RelaxTrace,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DseqError {
    #[error("the assignment does not satisfy the clause")]
    NotSatisfying,
    #[error("the residual of the premise clause does not imply the target residual")]
    NoImplication,
    #[error("{0} is not an X-clause in the given subspace")]
    NotXClause(ClauseId),
    #[error("variable {0} is not quantified")]
    NotQuantified(Var),
    #[error("no premise covers resolvable clause {0}")]
    IncompleteCover(ClauseId),
    #[error("premise for {0} does not match a resolvable clause")]
    UnexpectedPremise(ClauseId),
    #[error("premises are not consistent")]
    InconsistentPremises,
    #[error("premise conditionals are incompatible")]
    IncompatibleConditionals,
    #[error("D-sequents target different clauses")]
    TargetMismatch,
    #[error("D-sequents were derived against different formula versions")]
    FormulaTagMismatch,
    #[error("conditionals are not resolvable on variable {0}")]
    NotResolvable(Var),
    #[error("formula version {to} is not an implied extension of version {from}")]
    TagNotExtension { from: FormulaTag, to: FormulaTag },
    #[error("{0} is not in the order constraint")]
    NotInConstraint(ClauseId),
    #[error("the two D-sequents do not form a consistent set")]
    InconsistentPair,
    #[error("target {0} appears in its own order constraint")]
    TargetInConstraint(ClauseId),
    #[error("no assignment to the quantified variables witnesses the subspace")]
    NoWitness,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// `(q, H) → C`, tagged with the version of the formula it was derived against.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DSequent {
    conditional: Assignment,
    constraint: BTreeSet<ClauseId>,
    target: ClauseId,
    tag: FormulaTag,
}

impl DSequent {
    pub fn new(
        conditional: Assignment,
        constraint: BTreeSet<ClauseId>,
        target: ClauseId,
        tag: FormulaTag,
    ) -> Result<DSequent, DseqError> {
        if constraint.contains(&target) {
            return Err(DseqError::TargetInConstraint(target));
        }
        Ok(DSequent {
            conditional,
            constraint,
            target,
            tag,
        })
    }

    pub fn conditional(&self) -> &Assignment {
        &self.conditional
    }

    pub fn constraint(&self) -> &BTreeSet<ClauseId> {
        &self.constraint
    }

    pub fn target(&self) -> ClauseId {
        self.target
    }

    pub fn tag(&self) -> FormulaTag {
        self.tag
    }

    pub fn mentions(&self, var: Var) -> bool {
        self.conditional.contains_var(var)
    }

    /// No X-clause of `prob` appears in the order constraint.
    pub fn is_robust(&self, prob: &EcnfProblem) -> bool {
        self.constraint
            .iter()
            .all(|&id| prob.clause(id).map_or(true, |c| !prob.is_x_clause(c)))
    }

    pub(crate) fn retagged(&self, tag: FormulaTag) -> DSequent {
        DSequent { tag, ..self.clone() }
    }
}

impl fmt::Display for DSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {{", self.conditional)?;
        for (i, id) in self.constraint.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}) -> {} @{}", self.target, self.tag)
    }
}
