//! Branching quantifier elimination with D-sequent re-use.
//!
//! A node of the search tree holds the current assignment `q` and the active
//! D-sequents. It first re-uses stored D-sequents and activates atomic ones
//! until nothing changes. Every X-clause proved means the node is done.
//! Otherwise, on a conflict, the node either learns a free clause, proves the
//! remaining clauses with witness D-sequents or falls through to branching.
//! Branch results are merged by [`join::join_dseqs_plus`].
//!
//! Only free clauses are ever added, so the X-clauses are exactly those of the
//! input and the final formula minus its X-clauses is the answer.

mod join;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::cnf::{Assignment, ClauseId, CnfFormula, EcnfProblem, FormulaTag, Lit, Var};
use crate::dsequent::{
    align, atomic::witness_for, atomic_first_kind, atomic_second_kind, atomic_third_kind, atomic_witness, ActiveSet,
    DSequent, DSequentStore, DseqError, StoreConfig,
};
use crate::sat;

use join::join_dseqs_plus;

/// What to do when a consistency invariant fails.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InvariantLevel {
    Off,
    #[default]
    Count,
    Panic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub reuse: bool,
    pub store: StoreConfig,
    /// Maximum number of branching decisions.
    pub branch_budget: Option<u64>,
    pub invariants: InvariantLevel,
    /// Keep every D-sequent the solver produces.
    pub record_dseqs: bool,
    /// Keep up to this many active sets, taken when nodes return.
    pub record_sets: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            reuse: true,
            store: StoreConfig::default(),
            branch_budget: None,
            invariants: InvariantLevel::Count,
            record_dseqs: false,
            record_sets: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub branches: u64,
    pub reuse_hits: u64,
    pub reuse_rejected: u64,
    pub joins: u64,
    pub fixdseq_calls: u64,
    pub fixdseq_fallbacks: u64,
    pub relaxations: u64,
    pub relax_bound_violations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub witness: u64,
    pub atomic_first: u64,
    pub atomic_second: u64,
    pub atomic_third: u64,
    pub stored: u64,
    pub invariant_checks: u64,
    pub invariant_violations: u64,
}

impl Stats {
    pub fn fields(&self) -> [(&'static str, u64); 18] {
        [
            ("nodes", self.nodes),
            ("branches", self.branches),
            ("reuse_hits", self.reuse_hits),
            ("reuse_rejected", self.reuse_rejected),
            ("joins", self.joins),
            ("fixdseq_calls", self.fixdseq_calls),
            ("fixdseq_fallbacks", self.fixdseq_fallbacks),
            ("relaxations", self.relaxations),
            ("relax_bound_violations", self.relax_bound_violations),
            ("conflicts", self.conflicts),
            ("learned", self.learned),
            ("witness", self.witness),
            ("atomic_first", self.atomic_first),
            ("atomic_second", self.atomic_second),
            ("atomic_third", self.atomic_third),
            ("stored", self.stored),
            ("invariant_checks", self.invariant_checks),
            ("invariant_violations", self.invariant_violations),
        ]
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, value)) in self.fields().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{name} {value}")?;
        }
        Ok(())
    }
}

/// How a recorded D-sequent was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    First,
    Second,
    Third,
    Witness,
    Reuse,
    Join,
    Relax,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Emitted {
    pub dseq: DSequent,
    pub origin: Origin,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("branch budget of {0} exhausted")]
    ResourceLimit(u64),
    #[error("internal D-sequent error: {0}")]
    Dseq(#[from] DseqError),
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Free clauses of the final formula: a formula equivalent to `∃X F`.
    pub f_star: CnfFormula,
    /// Input problem plus every derived clause.
    pub problem: EcnfProblem,
    pub store: DSequentStore,
    pub stats: Stats,
    /// `∃X F` is false; `f_star` holds the empty clause.
    pub unsat: bool,
    /// Root active set.
    pub active: Vec<DSequent>,
    pub emitted: Vec<Emitted>,
    pub active_sets: Vec<Vec<DSequent>>,
}

impl SolveResult {
    pub fn final_formula(&self) -> &CnfFormula {
        self.problem.formula()
    }
}

/// Solves `∃X F`, starting from `store` when given.
pub fn solve(
    problem: &EcnfProblem,
    options: &SolveOptions,
    store: Option<DSequentStore>,
) -> Result<SolveResult, SolveError> {
    let mut s = Solver {
        x_clauses: problem.x_clause_ids(),
        prob: problem.clone(),
        q: Assignment::new(),
        trail: Vec::new(),
        store: store.unwrap_or_else(|| DSequentStore::new(options.store)),
        opts: options.clone(),
        stats: Stats::default(),
        emitted: Vec::new(),
        active_sets: Vec::new(),
        unsat: problem
            .formula()
            .clauses()
            .any(|c| c.is_false() || (c.is_empty() && !problem.is_x_clause(c))),
    };
    let active = if s.unsat {
        ActiveSet::new()
    } else {
        s.dcds_plus(ActiveSet::new())?
    };
    let f_star = s.prob.formula().retain(|id| {
        let c = s.prob.formula().clause(id).expect("own id");
        !s.prob.is_x_clause(c)
    });
    Ok(SolveResult {
        f_star,
        problem: s.prob,
        store: s.store,
        stats: s.stats,
        unsat: s.unsat,
        active: active.to_vec(),
        emitted: s.emitted,
        active_sets: s.active_sets,
    })
}

pub(crate) struct Solver {
    pub(crate) prob: EcnfProblem,
    pub(crate) q: Assignment,
    /// Assigned variables, oldest first.
    trail: Vec<Var>,
    pub(crate) store: DSequentStore,
    pub(crate) opts: SolveOptions,
    pub(crate) stats: Stats,
    emitted: Vec<Emitted>,
    active_sets: Vec<Vec<DSequent>>,
    x_clauses: Vec<ClauseId>,
    unsat: bool,
}

enum ConflictOutcome {
    Progress,
    Branch(Var),
    None,
}

impl Solver {
    pub(crate) fn record(&mut self, dseq: &DSequent, origin: Origin) {
        if self.opts.record_dseqs {
            self.emitted.push(Emitted {
                dseq: dseq.clone(),
                origin,
            });
        }
    }

    pub(crate) fn violation(&mut self, what: &str) {
        self.stats.invariant_violations += 1;
        if self.opts.invariants == InvariantLevel::Panic {
            panic!("invariant violated: {what}");
        }
    }

    fn check_invariants(&mut self, ds: &ActiveSet) {
        if self.opts.invariants == InvariantLevel::Off {
            return;
        }
        self.stats.invariant_checks += 1;
        if !ds.is_consistent() {
            self.violation("active set inconsistent");
        }
        if ds.iter().any(|s| !s.conditional().is_subset_of(&self.q)) {
            self.violation("active conditional outside the current subspace");
        }
    }

    fn unproven(&self, ds: &ActiveSet) -> Vec<ClauseId> {
        self.x_clauses.iter().copied().filter(|&c| !ds.contains(c)).collect()
    }

    /// Solves the subspace `q`, extending `ds` until every X-clause has an
    /// active D-sequent whose conditional lies inside `q`.
    fn dcds_plus(&mut self, mut ds: ActiveSet) -> Result<ActiveSet, SolveError> {
        self.stats.nodes += 1;
        loop {
            if self.unsat {
                return Ok(ds);
            }
            loop {
                let reused = if self.opts.reuse { self.reuse_pass(&mut ds) } else { 0 };
                let atomic = self.atomic_pass(&mut ds)?;
                if reused + atomic == 0 {
                    break;
                }
            }
            let unproven = self.unproven(&ds);
            if unproven.is_empty() {
                self.check_invariants(&ds);
                if self.active_sets.len() < self.opts.record_sets && !ds.is_empty() {
                    self.active_sets.push(ds.to_vec());
                }
                return Ok(ds);
            }
            let x_var = self.pick_x_var(&unproven);
            let falsified = self.prob.formula().clauses().any(|c| c.eval(&self.q) == Some(false));
            let branch = match x_var {
                Some(v) if !falsified => v,
                _ => match self.handle_conflict(&mut ds, &unproven)? {
                    ConflictOutcome::Progress => continue,
                    ConflictOutcome::Branch(v) => x_var.unwrap_or(v),
                    ConflictOutcome::None => x_var.expect("no conflict leaves a quantified branch variable"),
                },
            };
            return self.branch(ds, branch);
        }
    }

    fn branch(&mut self, ds: ActiveSet, v: Var) -> Result<ActiveSet, SolveError> {
        self.stats.branches += 1;
        if let Some(budget) = self.opts.branch_budget {
            if self.stats.branches > budget {
                return Err(SolveError::ResourceLimit(budget));
            }
        }
        self.assign(v, false);
        let ds0 = self.dcds_plus(ds);
        self.unassign(v);
        let ds0 = ds0?;
        if self.unsat {
            return Ok(ds0);
        }
        let mut inherited = ds0.clone();
        inherited.drain_where(|s| s.mentions(v));
        self.assign(v, true);
        let ds1 = self.dcds_plus(inherited);
        self.unassign(v);
        let ds1 = ds1?;
        if self.unsat {
            return Ok(ds1);
        }
        let merged = join_dseqs_plus(self, &ds0, &ds1, v)?;
        self.check_invariants(&merged);
        Ok(merged)
    }

    fn assign(&mut self, v: Var, b: bool) {
        self.q.assign(v, b).expect("branch variable is unassigned");
        self.trail.push(v);
    }

    fn unassign(&mut self, v: Var) {
        self.q.unassign(v);
        let popped = self.trail.pop();
        debug_assert_eq!(popped, Some(v));
    }

    fn try_activate(&mut self, ds: &mut ActiveSet, s: DSequent, origin: Origin) -> bool {
        if ds.insert(s.clone()).is_err() {
            return false;
        }
        self.record(&s, origin);
        match origin {
            Origin::First => self.stats.atomic_first += 1,
            Origin::Second => self.stats.atomic_second += 1,
            Origin::Third => self.stats.atomic_third += 1,
            Origin::Witness => self.stats.witness += 1,
            Origin::Reuse => self.stats.reuse_hits += 1,
            Origin::Join | Origin::Relax => {}
        }
        true
    }

    /// Activates stored D-sequents whose conditional lies inside `q` and whose
    /// constraint fits the active order.
    fn reuse_pass(&mut self, ds: &mut ActiveSet) -> usize {
        let mut hits = 0;
        for c in self.unproven(ds) {
            if let Some(s) = self.try_reuse(ds, c) {
                self.store.touch(&s);
                let aligned = align(&s, &self.prob, self.prob.tag()).expect("stored versions are implied prefixes");
                if self.try_activate(ds, aligned, Origin::Reuse) {
                    hits += 1;
                }
            }
        }
        hits
    }

    /// First stored D-sequent for `c` that can join `ds` in the current subspace.
    fn try_reuse(&mut self, ds: &ActiveSet, c: ClauseId) -> Option<DSequent> {
        let tag = self.prob.tag();
        for s in self.store.lookup(c, &self.q) {
            let Ok(aligned) = align(&s, &self.prob, tag) else {
                self.stats.reuse_rejected += 1;
                continue;
            };
            if ds.check_insert(&aligned).is_ok() {
                return Some(s);
            }
            self.stats.reuse_rejected += 1;
        }
        None
    }

    /// Activates atomic D-sequents of the three kinds until none applies.
    /// Returns the number activated.
    fn atomic_pass(&mut self, ds: &mut ActiveSet) -> Result<usize, SolveError> {
        let mut total = 0;
        loop {
            let mut added = 0;
            for c in self.unproven(ds) {
                if let Some(s) = self.first_kind(c)? {
                    if self.try_activate(ds, s, Origin::First) {
                        added += 1;
                        continue;
                    }
                }
                if self.second_kind(ds, c)? {
                    added += 1;
                    continue;
                }
                if self.third_kind(ds, c)? {
                    added += 1;
                }
            }
            total += added;
            if added == 0 {
                return Ok(total);
            }
        }
    }

    /// Satisfied by `q`: keyed on the satisfied literal assigned earliest.
    fn first_kind(&self, c: ClauseId) -> Result<Option<DSequent>, SolveError> {
        let clause = self.prob.clause(c).map_err(DseqError::from)?;
        let lit = self
            .trail
            .iter()
            .filter_map(|&v| clause.lit_of(v))
            .find(|l| self.q.get(l.var()).is_some_and(|b| l.eval(b)));
        match lit {
            Some(l) => Ok(Some(atomic_first_kind(&self.prob, c, l.var(), l.satisfying_bit())?)),
            None => Ok(None),
        }
    }

    /// Some clause `b` whose residual implies that of `c`. Free clauses are
    /// tried first since they give robust D-sequents.
    fn second_kind(&mut self, ds: &mut ActiveSet, c: ClauseId) -> Result<bool, SolveError> {
        let target = self.prob.clause(c).map_err(DseqError::from)?.clone();
        let cq = target.cofactor(&self.q);
        if cq.is_true() {
            return Ok(false);
        }
        let mut candidates: Vec<(bool, ClauseId)> = self
            .prob
            .formula()
            .clauses()
            .filter(|b| b.id() != c)
            .filter(|b| {
                let bq = b.cofactor(&self.q);
                !bq.is_true() && bq.subsumes(&cq)
            })
            .map(|b| (self.prob.is_x_clause(b), b.id()))
            .collect();
        candidates.sort();
        for (_, b) in candidates {
            let premise = self.prob.clause(b).map_err(DseqError::from)?;
            // Only the bindings falsifying literals of `b` outside `c` are needed.
            let q_min = self
                .q
                .restrict(|v| premise.lit_of(v).is_some_and(|l| !target.contains(l)));
            let s = atomic_second_kind(&self.prob, &q_min, b, c)?;
            if self.try_activate(ds, s, Origin::Second) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `c` blocked at an open quantified variable once every clause
    /// resolvable with it there has an active D-sequent.
    fn third_kind(&mut self, ds: &mut ActiveSet, c: ClauseId) -> Result<bool, SolveError> {
        let target = self.prob.clause(c).map_err(DseqError::from)?.clone();
        let tag = self.prob.tag();
        for lit in target.lits() {
            let v = lit.var();
            if !self.prob.is_x(v) || self.q.contains_var(v) {
                continue;
            }
            let mut premises = Vec::new();
            let mut covered = true;
            for d in self.prob.formula().clauses() {
                if d.id() == c || !crate::cnf::resolvable(&target, d, v) {
                    continue;
                }
                match ds.get(d.id()) {
                    Some(p) if !p.constraint().contains(&c) => premises.push(align(p, &self.prob, tag)?),
                    _ => {
                        covered = false;
                        break;
                    }
                }
            }
            if !covered {
                continue;
            }
            let s = atomic_third_kind(&self.prob, c, v, &premises)?;
            if self.try_activate(ds, s, Origin::Third) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Quantified variable with the most occurrences in the residuals of the
    /// unproven clauses, lowest index on ties.
    fn pick_x_var(&self, unproven: &[ClauseId]) -> Option<Var> {
        self.most_frequent(unproven.iter().copied(), true, &self.q)
    }

    /// Open variables of the wanted kind counted over the clauses not
    /// satisfied by `under`.
    fn most_frequent(
        &self,
        clauses: impl Iterator<Item = ClauseId>,
        quantified: bool,
        under: &Assignment,
    ) -> Option<Var> {
        let mut counts: std::collections::BTreeMap<Var, usize> = std::collections::BTreeMap::new();
        for c in clauses {
            let clause = self.prob.clause(c).expect("known clause");
            if clause.eval(under) == Some(true) {
                continue;
            }
            for v in clause.vars() {
                if self.prob.is_x(v) == quantified && !self.q.contains_var(v) {
                    *counts.entry(v).or_default() += 1;
                }
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, _)| v)
    }

    /// Branching variable for a subspace. Quantified variables of unproven
    /// clauses come first; then free variables of unproven clauses; then free
    /// variables of any clause left open by the free part of `q`.
    pub(crate) fn pick_branch_var(&self, ds: &ActiveSet) -> Option<Var> {
        let unproven = self.unproven(ds);
        let q_y = self.q.restrict(|v| !self.prob.is_x(v));
        self.pick_x_var(&unproven)
            .or_else(|| self.most_frequent(unproven.iter().copied(), false, &self.q))
            .or_else(|| self.most_frequent(self.prob.formula().ids(), false, &q_y))
    }

    /// Deals with a subspace where some clause is falsified or no quantified
    /// variable is left to branch on. With `q_Y` the free part of `q`:
    /// - `F ∧ q_Y` unsatisfiable: add the negation of a minimal part of `q_Y`;
    /// - some assignment to `X` satisfies every clause that `q_Y` leaves open,
    ///   without help from open free variables: prove every unproven clause by
    ///   a witness D-sequent over the free bindings that assignment needs;
    /// - otherwise suggest branching on a free variable.
    fn handle_conflict(&mut self, ds: &mut ActiveSet, unproven: &[ClauseId]) -> Result<ConflictOutcome, SolveError> {
        self.stats.conflicts += 1;
        let q_y = self.q.restrict(|v| !self.prob.is_x(v));
        if !self.satisfiable_under(&q_y) {
            let core = self.minimize_core(&q_y);
            let lits: Vec<Lit> = core.iter().map(|(v, b)| Lit::new(v, !b)).collect();
            let empty = lits.is_empty();
            self.prob.add_derived(lits).map_err(DseqError::from)?;
            self.stats.learned += 1;
            if empty {
                self.unsat = true;
            }
            return Ok(ConflictOutcome::Progress);
        }
        if let Some(s_x) = witness_for(&self.prob, &q_y) {
            let needed = self.needed_bindings(&q_y, &s_x);
            let mut added = false;
            for &c in unproven {
                let s = atomic_witness(&self.prob, &needed, c)?;
                added |= self.try_activate(ds, s, Origin::Witness);
            }
            if added {
                return Ok(ConflictOutcome::Progress);
            }
        }
        Ok(match self.pick_branch_var(ds) {
            Some(v) => ConflictOutcome::Branch(v),
            None => ConflictOutcome::None,
        })
    }

    fn residual_lits(&self, p: &Assignment) -> Option<Vec<Vec<Lit>>> {
        let mut out = Vec::new();
        for c in self.prob.formula().clauses() {
            let r = c.cofactor(p);
            if r.is_true() {
                continue;
            }
            if r.is_false() {
                return None;
            }
            out.push(r.lits().to_vec());
        }
        Some(out)
    }

    fn satisfiable_under(&self, p: &Assignment) -> bool {
        self.residual_lits(p).is_some_and(|cls| sat::is_sat(&cls))
    }

    /// A subset of `q_y` under which the formula stays unsatisfiable, minimal
    /// with respect to single deletions.
    fn minimize_core(&self, q_y: &Assignment) -> Assignment {
        let mut core = q_y.clone();
        for v in q_y.vars() {
            let without = core.without(v);
            if !self.satisfiable_under(&without) {
                core = without;
            }
        }
        core
    }

    /// Bindings of `q_y` that satisfy the clauses `s_x` leaves unsatisfied.
    fn needed_bindings(&self, q_y: &Assignment, s_x: &Assignment) -> Assignment {
        let mut needed = Assignment::new();
        for c in self.prob.formula().clauses() {
            if c.eval(s_x) == Some(true) || c.eval(&needed) == Some(true) {
                continue;
            }
            let l = c
                .lits()
                .iter()
                .find(|l| q_y.get(l.var()).is_some_and(|b| l.eval(b)))
                .expect("witness relies on the free bindings");
            needed.assign(l.var(), l.satisfying_bit()).expect("taken from q_y");
        }
        needed
    }
}

/// Root-level helper for tests: the D-sequent set must mention only X-clauses.
pub fn covers_all_x_clauses(problem: &EcnfProblem, active: &[DSequent]) -> bool {
    let targets: BTreeSet<ClauseId> = active.iter().map(|s| s.target()).collect();
    problem.x_clause_ids().iter().all(|c| targets.contains(c))
}

/// Version of `problem` a D-sequent was derived against.
pub fn problem_at(problem: &EcnfProblem, tag: FormulaTag) -> EcnfProblem {
    problem.at_tag(tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    fn check(prob: &EcnfProblem, reuse: bool) -> SolveResult {
        let opts = SolveOptions {
            reuse,
            invariants: InvariantLevel::Panic,
            record_dseqs: true,
            ..SolveOptions::default()
        };
        let r = solve(prob, &opts, None).unwrap();
        let o = Oracle::default();
        assert_eq!(o.counterexample(&r.f_star, prob).unwrap(), None);
        assert!(r.f_star.clauses().all(|c| !prob.is_x_clause(c)));
        for e in &r.emitted {
            assert_eq!(
                o.check_dsequent(&e.dseq, &r.problem).unwrap(),
                None,
                "{} {:?}",
                e.dseq,
                e.origin
            );
        }
        r
    }

    #[test]
    fn five_var() {
        let p = EcnfProblem::from_dimacs(5, &[&[1, 2], &[-1, 4], &[1, -3, 5], &[-2, 5]], &[1, 2, 3]).unwrap();
        for reuse in [false, true] {
            let r = check(&p, reuse);
            assert!(!r.unsat);
            assert!(covers_all_x_clauses(&p, &r.active));
        }
    }

    #[test]
    fn no_x_clauses() {
        let p = EcnfProblem::from_dimacs(3, &[&[2, 3]], &[1]).unwrap();
        let r = check(&p, true);
        assert_eq!(r.stats.nodes, 1);
        assert!(r.active.is_empty());
    }

    #[test]
    fn contradiction() {
        let p = EcnfProblem::from_dimacs(2, &[&[1], &[-1]], &[1]).unwrap();
        let r = check(&p, true);
        assert!(r.unsat);
        assert!(r.f_star.clauses().any(|c| c.is_false()));
    }

    #[test]
    fn duplicate_clauses() {
        let p = EcnfProblem::from_dimacs(3, &[&[1, 2], &[1, 2], &[-1, 3]], &[1]).unwrap();
        let r = check(&p, true);
        assert_eq!(r.stats.invariant_violations, 0);
    }

    #[test]
    fn pick_prefers_quantified() {
        let p = EcnfProblem::from_dimacs(4, &[&[2, -3], &[2, 4], &[1, 4]], &[2, 3]).unwrap();
        let s = Solver {
            x_clauses: p.x_clause_ids(),
            prob: p,
            q: Assignment::new(),
            trail: Vec::new(),
            store: DSequentStore::default(),
            opts: SolveOptions::default(),
            stats: Stats::default(),
            emitted: Vec::new(),
            active_sets: Vec::new(),
            unsat: false,
        };
        assert_eq!(s.pick_branch_var(&ActiveSet::new()), Some(Var::new(2)));
    }
}
