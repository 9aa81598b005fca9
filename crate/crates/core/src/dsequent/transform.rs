//! Transformations of D-sequents and the consistency test for sets of them.

use std::collections::{BTreeMap, BTreeSet};

use super::{DSequent, DseqError};
use crate::cnf::{ClauseId, EcnfProblem, FormulaTag, Var};

/// Merges D-sequents for the same clause from the two branches of `v`:
/// the conditionals are resolved on `v` and the constraints united.
pub fn join(s1: &DSequent, s2: &DSequent, v: Var) -> Result<DSequent, DseqError> {
    if s1.target() != s2.target() {
        return Err(DseqError::TargetMismatch);
    }
    if s1.tag() != s2.tag() {
        return Err(DseqError::FormulaTagMismatch);
    }
    let q = s1
        .conditional()
        .resolve(s2.conditional(), v)
        .map_err(|_| DseqError::NotResolvable(v))?;
    let h = s1.constraint().union(s2.constraint()).copied().collect();
    DSequent::new(q, h, s1.target(), s1.tag())
}

/// Pairwise compatible conditionals and an acyclic order relation.
pub fn check_consistent(set: &[DSequent]) -> bool {
    for (i, a) in set.iter().enumerate() {
        if set[i + 1..]
            .iter()
            .any(|b| !a.conditional().compatible(b.conditional()))
        {
            return false;
        }
    }
    topological_order(set).is_some()
}

/// Indices of `set` in an order where every D-sequent comes before the
/// D-sequents of the clauses in its constraint, i.e. the order in which the
/// targets can be dropped. Among ready entries the lowest target id goes first.
/// `None` on a cycle or when two entries share a target.
pub fn topological_order(set: &[DSequent]) -> Option<Vec<usize>> {
    let mut index: BTreeMap<ClauseId, usize> = BTreeMap::new();
    for (i, s) in set.iter().enumerate() {
        if index.insert(s.target(), i).is_some() {
            return None;
        }
    }
    // Edge target -> h: target must be dropped before h.
    let mut indegree = vec![0usize; set.len()];
    for s in set {
        for h in s.constraint() {
            if let Some(&j) = index.get(h) {
                indegree[j] += 1;
            }
        }
    }
    let mut ready: BTreeSet<ClauseId> = set
        .iter()
        .enumerate()
        .filter(|&(i, _)| indegree[i] == 0)
        .map(|(_, s)| s.target())
        .collect();
    let mut order = Vec::with_capacity(set.len());
    while let Some(t) = ready.pop_first() {
        let i = index[&t];
        order.push(i);
        for h in set[i].constraint() {
            if let Some(&j) = index.get(h) {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert(*h);
                }
            }
        }
    }
    (order.len() == set.len()).then_some(order)
}

/// Re-tags `s` to version `to` of `prob`. Every clause added between the
/// D-sequent's version and `to` must be implied by the formula.
pub fn align(s: &DSequent, prob: &EcnfProblem, to: FormulaTag) -> Result<DSequent, DseqError> {
    let from = s.tag();
    let err = DseqError::TagNotExtension { from, to };
    if to < from || to > prob.tag() {
        return Err(err);
    }
    if prob.lineage()[from.0 as usize..to.0 as usize]
        .iter()
        .any(|step| !step.implied)
    {
        return Err(err);
    }
    Ok(s.retagged(to))
}

/// Replaces `s2.target()` in the constraint of `s1` by the constraint of `s2`:
/// `(q1 ∪ q2, (H1 \ {C2}) ∪ H2) → C1`.
pub fn substitute(s1: &DSequent, s2: &DSequent) -> Result<DSequent, DseqError> {
    if !s1.constraint().contains(&s2.target()) {
        return Err(DseqError::NotInConstraint(s2.target()));
    }
    if s1.tag() != s2.tag() {
        return Err(DseqError::FormulaTagMismatch);
    }
    if s1.target() == s2.target() || !check_consistent(&[s1.clone(), s2.clone()]) {
        return Err(DseqError::InconsistentPair);
    }
    let q = s1
        .conditional()
        .union(s2.conditional())
        .map_err(|_| DseqError::InconsistentPair)?;
    let mut h = s1.constraint().clone();
    h.remove(&s2.target());
    h.extend(s2.constraint().iter().copied());
    DSequent::new(q, h, s1.target(), s1.tag())
}

/// Record of one relaxation, for auditing the conditional bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxTrace {
    /// Position of each set index in the topological order used.
    pub position: Vec<usize>,
    /// Set indices substituted, in application order (may repeat).
    pub substituted: Vec<usize>,
}

/// Removes `m` from the constraint of `set[i]` by repeated substitution,
/// always eliminating the foreign clause that comes last in the order.
///
/// Constraint ids that are not targets of the set cannot be substituted and
/// stay in place. The conditional grows only by conditionals of D-sequents
/// that come no earlier than `m`'s.
pub fn relax_constraint(set: &[DSequent], i: usize, m: ClauseId) -> Result<DSequent, DseqError> {
    relax_constraint_traced(set, i, m).map(|(s, _)| s)
}

pub fn relax_constraint_traced(set: &[DSequent], i: usize, m: ClauseId) -> Result<(DSequent, RelaxTrace), DseqError> {
    let target = set
        .get(i)
        .ok_or_else(|| DseqError::PreconditionViolated(format!("index {i} out of range")))?;
    if !target.constraint().contains(&m) {
        return Err(DseqError::PreconditionViolated(format!(
            "{m} is not in the constraint of {}",
            target.target()
        )));
    }
    if !set.iter().any(|s| s.target() == m) {
        return Err(DseqError::PreconditionViolated(format!(
            "{m} has no D-sequent in the set"
        )));
    }
    relax_many(set, i, &BTreeSet::from([m]))
}

/// Removes every id of `remove` that has a D-sequent in the set from the
/// constraint of `set[i]`, together with whatever foreign clauses the
/// substitutions bring in. With `remove = H_i` the result depends only on
/// constraint ids that have no D-sequent in the set.
pub(crate) fn relax_many(
    set: &[DSequent],
    i: usize,
    remove: &BTreeSet<ClauseId>,
) -> Result<(DSequent, RelaxTrace), DseqError> {
    if set.iter().any(|s| s.tag() != set[i].tag()) {
        return Err(DseqError::FormulaTagMismatch);
    }
    if !check_consistent(set) {
        return Err(DseqError::PreconditionViolated("the set is not consistent".into()));
    }
    let order = topological_order(set).expect("consistent set has an order");
    let mut position = vec![0; set.len()];
    for (pos, &idx) in order.iter().enumerate() {
        position[idx] = pos;
    }
    let index: BTreeMap<ClauseId, usize> = set.iter().enumerate().map(|(j, s)| (s.target(), j)).collect();
    let keep: BTreeSet<ClauseId> = set[i].constraint().difference(remove).copied().collect();

    let mut current = set[i].clone();
    let mut substituted = Vec::new();
    loop {
        let next = current
            .constraint()
            .iter()
            .filter(|h| !keep.contains(h))
            .filter_map(|h| index.get(h).copied())
            .max_by_key(|&j| position[j]);
        let Some(j) = next else { break };
        current = substitute(&current, &set[j])?;
        substituted.push(j);
    }
    Ok((current, RelaxTrace { position, substituted }))
}

/// Whether `result` obeys the conditional bound of a single relaxation:
/// `q_i ⊆ q ⊆ q_i ∪ ⋃ q_j` over the D-sequents placed no earlier than `m`.
pub fn relax_bound_holds(set: &[DSequent], i: usize, m: ClauseId, result: &DSequent, trace: &RelaxTrace) -> bool {
    let Some(mi) = set.iter().position(|s| s.target() == m) else {
        return false;
    };
    let floor = trace.position[mi];
    let mut bound = set[i].conditional().clone();
    for (j, s) in set.iter().enumerate() {
        if trace.position[j] >= floor {
            match bound.union(s.conditional()) {
                Ok(u) => bound = u,
                Err(_) => return false,
            }
        }
    }
    set[i].conditional().is_subset_of(result.conditional()) && result.conditional().is_subset_of(&bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{Assignment, CnfFormula, Lit};

    fn a(pairs: &[(u32, bool)]) -> Assignment {
        Assignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn ds(q: &[(u32, bool)], h: &[u32], c: u32) -> DSequent {
        DSequent::new(
            a(q),
            h.iter().map(|&i| ClauseId(i)).collect(),
            ClauseId(c),
            FormulaTag(0),
        )
        .unwrap()
    }

    #[test]
    fn join_examples() {
        let j = join(
            &ds(&[(1, false), (2, false)], &[], 5),
            &ds(&[(1, true), (2, false)], &[], 5),
            Var::new(1),
        )
        .unwrap();
        assert_eq!(j, ds(&[(2, false)], &[], 5));
        let j = join(&ds(&[(1, false)], &[1], 5), &ds(&[(1, true)], &[2], 5), Var::new(1)).unwrap();
        assert_eq!(j.constraint(), &[ClauseId(1), ClauseId(2)].into());
        assert_eq!(
            join(&ds(&[(1, false)], &[], 5), &ds(&[(1, true)], &[], 6), Var::new(1)).unwrap_err(),
            DseqError::TargetMismatch
        );
        assert_eq!(
            join(&ds(&[(1, false)], &[], 5), &ds(&[(2, true)], &[], 5), Var::new(1)).unwrap_err(),
            DseqError::NotResolvable(Var::new(1))
        );
    }

    #[test]
    fn consistency_examples() {
        assert!(check_consistent(&[ds(&[], &[2], 1), ds(&[], &[], 2)]));
        assert_eq!(
            topological_order(&[ds(&[], &[], 2), ds(&[], &[2], 1)]),
            Some(vec![1, 0])
        );
        assert!(!check_consistent(&[ds(&[], &[2], 1), ds(&[], &[1], 2)]));
        assert!(!check_consistent(&[
            ds(&[(1, false)], &[], 1),
            ds(&[(1, true)], &[], 2)
        ]));
        assert!(check_consistent(&[]));
    }

    #[test]
    fn align_guards() {
        let mut p =
            crate::cnf::EcnfProblem::new(CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap(), [Var::new(1)]).unwrap();
        let s = ds(&[], &[], 1);
        assert_eq!(align(&s, &p, FormulaTag(0)).unwrap(), s);
        p.add_derived([Lit::pos(2), Lit::pos(1)]).unwrap();
        assert_eq!(align(&s, &p, FormulaTag(1)).unwrap().tag(), FormulaTag(1));
        p.add_unverified([Lit::neg(2)]).unwrap();
        assert!(matches!(
            align(&s, &p, FormulaTag(2)),
            Err(DseqError::TagNotExtension { .. })
        ));
        assert!(matches!(
            align(&s, &p, FormulaTag(3)),
            Err(DseqError::TagNotExtension { .. })
        ));
    }

    #[test]
    fn substitute_examples() {
        let s = substitute(&ds(&[(1, true)], &[2], 1), &ds(&[(3, false)], &[], 2)).unwrap();
        assert_eq!(s, ds(&[(1, true), (3, false)], &[], 1));
        assert_eq!(
            substitute(&ds(&[], &[], 1), &ds(&[], &[], 2)).unwrap_err(),
            DseqError::NotInConstraint(ClauseId(2))
        );
        assert_eq!(
            substitute(&ds(&[], &[2], 1), &ds(&[], &[1], 2)).unwrap_err(),
            DseqError::InconsistentPair
        );
    }

    #[test]
    fn relax_examples() {
        let set = [ds(&[(1, true)], &[2], 1), ds(&[(2, false)], &[], 2)];
        let r = relax_constraint(&set, 0, ClauseId(2)).unwrap();
        assert_eq!(r, ds(&[(1, true), (2, false)], &[], 1));
        assert!(matches!(
            relax_constraint(&set, 1, ClauseId(1)),
            Err(DseqError::PreconditionViolated(_))
        ));

        // i -> {m, z}, m -> {a, b}, a -> {b}; z has no D-sequent and stays.
        let set = [
            ds(&[(1, true)], &[2, 9], 1),
            ds(&[(2, true)], &[3, 4], 2),
            ds(&[(3, true)], &[4], 3),
            ds(&[(4, true)], &[], 4),
            ds(&[(5, true)], &[], 5),
        ];
        let (r, trace) = relax_constraint_traced(&set, 0, ClauseId(2)).unwrap();
        assert_eq!(r.constraint(), &[ClauseId(9)].into());
        assert_eq!(r.conditional(), &a(&[(1, true), (2, true), (3, true), (4, true)]));
        // b is eliminated first, then re-enters through a.
        assert_eq!(trace.substituted, vec![1, 3, 2, 3]);

        assert!(relax_bound_holds(&set, 0, ClauseId(2), &r, &trace));
        let (all, _) = relax_many(&set, 0, &[ClauseId(2), ClauseId(9)].into()).unwrap();
        assert_eq!(all.constraint(), &[ClauseId(9)].into());
    }
}
