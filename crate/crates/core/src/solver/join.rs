//! Merging the active sets of the two branches of a variable.

use std::collections::BTreeSet;

use super::{Origin, SolveError, Solver};
use crate::cnf::{ClauseId, Var};
use crate::dsequent::{
    align, join, relax_bound_holds, relax_constraint_traced, transform::relax_many, ActiveSet, DSequent, DseqError,
    Inconsistency,
};

fn aligned(solver: &Solver, ds: &ActiveSet) -> Result<Vec<DSequent>, SolveError> {
    let tag = solver.prob.tag();
    ds.iter()
        .map(|s| align(s, &solver.prob, tag).map_err(SolveError::from))
        .collect()
}

/// Active set of the parent subspace from the sets `ds0` (`v = 0`) and
/// `ds1` (`v = 1`). `ds1` already holds every entry of `ds0` that does not
/// bind `v`; entries binding `v` on both sides are joined, and joins that
/// would close an order cycle are repaired by [`fix_dseq`].
pub(crate) fn join_dseqs_plus(
    solver: &mut Solver,
    ds0: &ActiveSet,
    ds1: &ActiveSet,
    v: Var,
) -> Result<ActiveSet, SolveError> {
    let set0 = aligned(solver, ds0)?;
    let set1 = aligned(solver, ds1)?;
    let mut out = ActiveSet::new();
    for s in set1.iter().filter(|s| !s.mentions(v)) {
        out.insert(s.clone())
            .map_err(|e| DseqError::PreconditionViolated(format!("inherited entry rejected: {e:?}")))?;
    }
    let asymmetric: Vec<ClauseId> = set1.iter().filter(|s| s.mentions(v)).map(|s| s.target()).collect();
    for c in asymmetric {
        let i0 = set0
            .iter()
            .position(|s| s.target() == c)
            .ok_or_else(|| DseqError::PreconditionViolated(format!("{c} unproven in the first branch")))?;
        let i1 = set1.iter().position(|s| s.target() == c).expect("listed from set1");
        solver.stats.joins += 1;
        let joined = join(&set0[i0], &set1[i1], v)?;
        let merged = match out.check_insert(&joined) {
            Ok(()) => {
                solver.record(&joined, Origin::Join);
                joined
            }
            Err(Inconsistency::Cycle(cycle)) => {
                let fixed = fix_dseq(solver, &out, &set0, i0, &set1, i1, v, &cycle)?;
                solver.record(&fixed, Origin::Relax);
                fixed
            }
            Err(e) => {
                return Err(DseqError::PreconditionViolated(format!("join of {c} rejected: {e:?}")).into());
            }
        };
        if solver.store.admit(&merged, &solver.prob) {
            solver.stats.stored += 1;
        }
        out.insert(merged).expect("checked above");
    }
    Ok(out)
}

/// Replacement for the join of `set0[i0]` and `set1[i1]` that fits `out`.
///
/// First removes only the ids in `cycle` from each side, relaxing within the
/// branch's own set. Falls back to removing every constraint id that has a
/// D-sequent in that set; what remains are free clauses, which have no
/// outgoing order edges, so the fallback cannot close a cycle.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fix_dseq(
    solver: &mut Solver,
    out: &ActiveSet,
    set0: &[DSequent],
    i0: usize,
    set1: &[DSequent],
    i1: usize,
    v: Var,
    cycle: &BTreeSet<ClauseId>,
) -> Result<DSequent, SolveError> {
    solver.stats.fixdseq_calls += 1;
    let r0 = relax_each(solver, set0, i0, cycle)?;
    let r1 = relax_each(solver, set1, i1, cycle)?;
    let candidate = combine(&r0, &r1, v)?;
    if out.check_insert(&candidate).is_ok() {
        return Ok(candidate);
    }
    solver.stats.fixdseq_fallbacks += 1;
    let (f0, _) = relax_many(set0, i0, set0[i0].constraint())?;
    let (f1, _) = relax_many(set1, i1, set1[i1].constraint())?;
    solver.stats.relaxations += 2;
    let candidate = combine(&f0, &f1, v)?;
    out.check_insert(&candidate)
        .map_err(|e| DseqError::PreconditionViolated(format!("relaxed join still rejected: {e:?}")))?;
    Ok(candidate)
}

fn combine(s0: &DSequent, s1: &DSequent, v: Var) -> Result<DSequent, DseqError> {
    if !s0.mentions(v) {
        Ok(s0.clone())
    } else if !s1.mentions(v) {
        Ok(s1.clone())
    } else {
        join(s0, s1, v)
    }
}

/// Removes the ids of `cycle` from the constraint of `set[i]` one at a time,
/// auditing the conditional bound of each step.
fn relax_each(
    solver: &mut Solver,
    set: &[DSequent],
    i: usize,
    cycle: &BTreeSet<ClauseId>,
) -> Result<DSequent, SolveError> {
    let mut work = set.to_vec();
    for &m in cycle {
        if !work[i].constraint().contains(&m) || !work.iter().any(|s| s.target() == m) {
            continue;
        }
        let (relaxed, trace) = relax_constraint_traced(&work, i, m)?;
        solver.stats.relaxations += 1;
        if !relax_bound_holds(&work, i, m, &relaxed, &trace) {
            solver.stats.relax_bound_violations += 1;
            solver.violation("relaxed conditional exceeds its bound");
        }
        work[i] = relaxed;
    }
    Ok(work.swap_remove(i))
}
