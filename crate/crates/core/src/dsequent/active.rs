//! The active D-sequents of the current branch.

use std::collections::{BTreeMap, BTreeSet};

use super::DSequent;
use crate::cnf::ClauseId;

/// Why a D-sequent cannot join the active set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inconsistency {
    /// The target already has an active D-sequent.
    Duplicate,
    /// Conditional clashes with that of the given target's D-sequent.
    Incompatible(ClauseId),
    /// Constraint ids from which the new target is reachable.
    Cycle(BTreeSet<ClauseId>),
}

/// At most one D-sequent per target. The order graph has an edge `C → h` for
/// every `h` in the constraint of `C`'s D-sequent and stays acyclic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActiveSet {
    dseqs: BTreeMap<ClauseId, DSequent>,
    /// Reverse edges: `h → {C : h ∈ H_C}`.
    incoming: BTreeMap<ClauseId, BTreeSet<ClauseId>>,
}

impl ActiveSet {
    pub fn new() -> ActiveSet {
        ActiveSet::default()
    }

    pub fn len(&self) -> usize {
        self.dseqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dseqs.is_empty()
    }

    pub fn get(&self, target: ClauseId) -> Option<&DSequent> {
        self.dseqs.get(&target)
    }

    pub fn contains(&self, target: ClauseId) -> bool {
        self.dseqs.contains_key(&target)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DSequent> + '_ {
        self.dseqs.values()
    }

    pub fn targets(&self) -> impl Iterator<Item = ClauseId> + '_ {
        self.dseqs.keys().copied()
    }

    pub fn to_vec(&self) -> Vec<DSequent> {
        self.dseqs.values().cloned().collect()
    }

    /// Whether `to` is reachable from `from` along order edges.
    pub fn reaches(&self, from: ClauseId, to: ClauseId) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            if let Some(s) = self.dseqs.get(&n) {
                stack.extend(s.constraint().iter().copied());
            }
        }
        false
    }

    /// Whether `s` can be inserted without breaking consistency.
    pub fn check_insert(&self, s: &DSequent) -> Result<(), Inconsistency> {
        if self.dseqs.contains_key(&s.target()) {
            return Err(Inconsistency::Duplicate);
        }
        if let Some(other) = self
            .dseqs
            .values()
            .find(|o| !o.conditional().compatible(s.conditional()))
        {
            return Err(Inconsistency::Incompatible(other.target()));
        }
        let cycle = self.cycle_ids(s);
        if cycle.is_empty() {
            Ok(())
        } else {
            Err(Inconsistency::Cycle(cycle))
        }
    }

    /// Constraint ids of `s` that would close a cycle through `s.target()`.
    pub fn cycle_ids(&self, s: &DSequent) -> BTreeSet<ClauseId> {
        if !self.incoming.contains_key(&s.target()) {
            return BTreeSet::new();
        }
        s.constraint()
            .iter()
            .copied()
            .filter(|&h| self.reaches(h, s.target()))
            .collect()
    }

    pub fn insert(&mut self, s: DSequent) -> Result<(), Inconsistency> {
        self.check_insert(&s)?;
        for &h in s.constraint() {
            self.incoming.entry(h).or_default().insert(s.target());
        }
        self.dseqs.insert(s.target(), s);
        Ok(())
    }

    pub fn remove(&mut self, target: ClauseId) -> Option<DSequent> {
        let s = self.dseqs.remove(&target)?;
        for h in s.constraint() {
            if let Some(set) = self.incoming.get_mut(h) {
                set.remove(&target);
                if set.is_empty() {
                    self.incoming.remove(h);
                }
            }
        }
        Some(s)
    }

    /// Removes and returns every D-sequent whose conditional binds a variable
    /// matching `pred`.
    pub fn drain_where(&mut self, mut pred: impl FnMut(&DSequent) -> bool) -> Vec<DSequent> {
        let doomed: Vec<ClauseId> = self.dseqs.values().filter(|s| pred(s)).map(|s| s.target()).collect();
        doomed.into_iter().filter_map(|t| self.remove(t)).collect()
    }

    /// Full re-check of the set.
    pub fn is_consistent(&self) -> bool {
        super::check_consistent(&self.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{Assignment, FormulaTag};

    fn ds(q: &[(u32, bool)], h: &[u32], c: u32) -> DSequent {
        DSequent::new(
            Assignment::from_pairs(q.iter().copied()).unwrap(),
            h.iter().map(|&i| ClauseId(i)).collect(),
            ClauseId(c),
            FormulaTag(0),
        )
        .unwrap()
    }

    #[test]
    fn insertion_checks() {
        let mut set = ActiveSet::new();
        set.insert(ds(&[], &[2], 1)).unwrap();
        assert_eq!(set.check_insert(&ds(&[], &[], 1)), Err(Inconsistency::Duplicate));
        assert_eq!(
            set.check_insert(&ds(&[], &[1], 2)),
            Err(Inconsistency::Cycle([ClauseId(1)].into()))
        );
        set.insert(ds(&[(4, true)], &[3], 2)).unwrap();
        assert_eq!(
            set.check_insert(&ds(&[], &[1, 5], 3)),
            Err(Inconsistency::Cycle([ClauseId(1)].into()))
        );
        assert_eq!(
            set.check_insert(&ds(&[(4, false)], &[], 3)),
            Err(Inconsistency::Incompatible(ClauseId(2)))
        );
        assert!(set.is_consistent());
        set.remove(ClauseId(1));
        set.insert(ds(&[], &[1], 3)).unwrap();
        assert!(set.reaches(ClauseId(2), ClauseId(1)));
        assert_eq!(set.drain_where(|s| s.mentions(crate::cnf::Var::new(4))).len(), 1);
        assert_eq!(set.len(), 1);
    }
}
