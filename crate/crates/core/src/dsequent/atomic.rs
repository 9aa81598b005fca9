//! D-sequents whose redundancy claim is immediate.

use std::collections::BTreeSet;

use super::{transform, DSequent, DseqError};
use crate::cnf::{resolvable, Assignment, ClauseId, CnfError, EcnfProblem, Lit, Var};
use crate::sat;

fn x_clause(prob: &EcnfProblem, id: ClauseId) -> Result<&crate::cnf::Clause, DseqError> {
    let c = prob.clause(id)?;
    if !prob.is_x_clause(c) {
        return Err(DseqError::NotXClause(id));
    }
    Ok(c)
}

/// First kind: `v = b` satisfies `c`, so `((v=b), ∅) → c`. Always robust.
pub fn atomic_first_kind(prob: &EcnfProblem, c: ClauseId, v: Var, b: bool) -> Result<DSequent, DseqError> {
    let clause = x_clause(prob, c)?;
    match clause.lit_of(v) {
        Some(lit) if lit.eval(b) => {}
        _ => return Err(DseqError::NotSatisfying),
    }
    let mut q = Assignment::new();
    q.assign(v, b)?;
    DSequent::new(q, BTreeSet::new(), c, prob.tag())
}

/// Second kind: under `q` the residual of `b` implies the residual of `c`
/// (every literal of `b|q` is in `c|q`), so `(q, {b}) → c`.
///
/// `c|q` must still be an X-clause. The D-sequent is fragile exactly when
/// `b` is an X-clause.
pub fn atomic_second_kind(prob: &EcnfProblem, q: &Assignment, b: ClauseId, c: ClauseId) -> Result<DSequent, DseqError> {
    let target = x_clause(prob, c)?;
    let premise = prob.clause(b)?;
    if b == c {
        return Err(DseqError::NoImplication);
    }
    let cq = target.cofactor(q);
    if cq.is_true() || !prob.is_x_clause(&cq) {
        return Err(DseqError::NotXClause(c));
    }
    let bq = premise.cofactor(q);
    if bq.is_true() || !bq.subsumes(&cq) {
        return Err(DseqError::NoImplication);
    }
    DSequent::new(q.clone(), BTreeSet::from([b]), c, prob.tag())
}

/// Third kind: `c` is blocked at `v` once the clauses resolvable with it on
/// `v` are redundant. `premises` must hold exactly one D-sequent for each such
/// clause and form a consistent set. Result: `(∪ q_i, ∪ H_i) → c`.
///
/// Pairs whose resolvent is tautological do not count as resolvable.
pub fn atomic_third_kind(
    prob: &EcnfProblem,
    c: ClauseId,
    v: Var,
    premises: &[DSequent],
) -> Result<DSequent, DseqError> {
    let clause = x_clause(prob, c)?;
    if clause.lit_of(v).is_none() {
        return Err(CnfError::VarNotInClause(v).into());
    }
    if !prob.is_x(v) {
        return Err(DseqError::NotQuantified(v));
    }
    if premises.iter().any(|p| p.tag() != prob.tag()) {
        return Err(DseqError::FormulaTagMismatch);
    }
    for (i, a) in premises.iter().enumerate() {
        if premises[i + 1..]
            .iter()
            .any(|b| !a.conditional().compatible(b.conditional()))
        {
            return Err(DseqError::IncompatibleConditionals);
        }
    }
    if !transform::check_consistent(premises) || premises.iter().any(|p| p.constraint().contains(&c)) {
        return Err(DseqError::InconsistentPremises);
    }

    let resolvable_ids: BTreeSet<ClauseId> = prob
        .formula()
        .clauses()
        .filter(|d| d.id() != c && resolvable(clause, d, v))
        .map(|d| d.id())
        .collect();
    let mut covered = BTreeSet::new();
    for p in premises {
        if !resolvable_ids.contains(&p.target()) || !covered.insert(p.target()) {
            return Err(DseqError::UnexpectedPremise(p.target()));
        }
    }
    if let Some(&missing) = resolvable_ids.difference(&covered).next() {
        return Err(DseqError::IncompleteCover(missing));
    }

    let mut q = Assignment::new();
    let mut h = BTreeSet::new();
    for p in premises {
        q = q
            .union(p.conditional())
            .map_err(|_| DseqError::IncompatibleConditionals)?;
        h.extend(p.constraint().iter().copied());
    }
    DSequent::new(q, h, c, prob.tag())
}

/// `(q, ∅) → c` justified by an assignment to all of `X` that, together with
/// the free bindings of `q`, satisfies every clause of the formula whatever the
/// remaining free variables are.
///
/// Then every member formula is satisfiable at every free point of the
/// subspace once the quantified bindings of `q` are released. Without such
/// bindings `c` is redundant outright; with them, each removable point of the
/// subspace stops being removable in the free part of `q`. This handles the
/// X-clauses of a subspace whose conflict is caused by quantified decisions.
pub fn atomic_witness(prob: &EcnfProblem, q: &Assignment, c: ClauseId) -> Result<DSequent, DseqError> {
    x_clause(prob, c)?;
    let free_part = q.restrict(|v| !prob.is_x(v));
    if witness_for(prob, &free_part).is_none() {
        return Err(DseqError::NoWitness);
    }
    DSequent::new(q.clone(), BTreeSet::new(), c, prob.tag())
}

/// An assignment to `X` satisfying every clause not already satisfied by the
/// free bindings `free_part`, using quantified literals only.
pub(crate) fn witness_for(prob: &EcnfProblem, free_part: &Assignment) -> Option<Assignment> {
    let mut reduced: Vec<Vec<Lit>> = Vec::new();
    for clause in prob.formula().clauses() {
        if clause.eval(free_part) == Some(true) {
            continue;
        }
        reduced.push(clause.lits().iter().copied().filter(|l| prob.is_x(l.var())).collect());
    }
    sat::solve(&reduced)
}
