//! Ground truth by exhaustive enumeration.
//!
//! Points are `u64` masks over the variable universe `1..=n`, bit `v - 1`
//! holding the value of `v`. Every operation refuses instances with more
//! than `limit` variables instead of approximating.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cnf::{Assignment, Clause, ClauseId, CnfError, CnfFormula, EcnfProblem, Lit, Var};
use crate::dsequent::DSequent;
use crate::exec::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the oracle limit of {limit}")]
    TooLarge { vars: u32, limit: u32 },
    #[error("the assignment does not bind variable {0}")]
    NotAPoint(Var),
    #[error("the point is not a boundary point for the given variable set")]
    NotBoundaryPoint,
    #[error("variable {0} is not a free variable of the problem")]
    NotOverY(Var),
    #[error("D-sequent version {0} is newer than the problem")]
    UnknownTag(crate::cnf::FormulaTag),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Outcome of a redundancy query. `witness` is present iff the set is not
/// redundant: a removable point falsifying only clauses of the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundancyVerdict {
    pub redundant: bool,
    pub witness: Option<Assignment>,
}

/// A member formula under which the audited clause is not virtually redundant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFailure {
    pub member: BTreeSet<ClauseId>,
    /// Free-variable point exhibiting the failure (empty for structural failures).
    pub y_point: Assignment,
    pub reason: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub limit: u32,
    pub exec: Exec,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            limit: 24,
            exec: Exec::default(),
        }
    }
}

/// Clause as masks; falsified by `p` iff no positive literal is set and every
/// negative one is.
#[derive(Clone, Copy, Debug)]
struct Masks {
    pos: u64,
    neg: u64,
}

impl Masks {
    fn of(c: &Clause) -> Option<Masks> {
        if c.is_true() {
            return None;
        }
        let mut m = Masks { pos: 0, neg: 0 };
        for l in c.lits() {
            let bit = var_bit(l.var());
            if l.is_positive() {
                m.pos |= bit;
            } else {
                m.neg |= bit;
            }
        }
        Some(m)
    }

    #[inline]
    fn falsified(self, p: u64) -> bool {
        p & self.pos == 0 && p & self.neg == self.neg
    }
}

fn var_bit(v: Var) -> u64 {
    1u64 << (v.index() - 1)
}

fn mask_of(vars: impl IntoIterator<Item = Var>) -> u64 {
    vars.into_iter().fold(0, |m, v| m | var_bit(v))
}

fn bits_of(a: &Assignment) -> u64 {
    a.iter().filter(|&(_, b)| b).fold(0, |m, (v, _)| m | var_bit(v))
}

fn assignment_of(p: u64, over: u64) -> Assignment {
    let mut a = Assignment::new();
    let mut rest = over;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        let v = Var::new(bit.trailing_zeros() + 1);
        a.assign(v, p & bit != 0).expect("fresh variable");
        rest &= rest - 1;
    }
    a
}

/// Scatters the low bits of `bits` into the positions set in `mask`.
fn deposit(mut bits: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut rest = mask;
    while rest != 0 && bits != 0 {
        let bit = rest & rest.wrapping_neg();
        if bits & 1 != 0 {
            out |= bit;
        }
        bits >>= 1;
        rest &= rest - 1;
    }
    out
}

fn compile<'a>(clauses: impl IntoIterator<Item = &'a Clause>) -> Vec<Masks> {
    clauses.into_iter().filter_map(Masks::of).collect()
}

fn satisfies(cls: &[Masks], p: u64) -> bool {
    !cls.iter().any(|c| c.falsified(p))
}

/// All submasks of `mask`, starting with 0.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut cur = Some(0u64);
    std::iter::from_fn(move || {
        let out = cur?;
        let next = (out | !mask).wrapping_add(1) & mask;
        cur = (next != 0).then_some(next);
        Some(out)
    })
}

/// A point `base | s`, `s ⊆ free`, satisfying every clause.
fn find_sat(cls: &[Masks], base: u64, free: u64) -> Option<u64> {
    submasks(free).map(|s| base | s).find(|&p| satisfies(cls, p))
}

fn exists_sat(cls: &[Masks], base: u64, free: u64) -> bool {
    find_sat(cls, base, free).is_some()
}

/// Masks describing a subspace `q` of a problem.
struct Subspace {
    x: u64,
    /// Free variables left open by `q`.
    open_y: u64,
    /// Quantified variables left open by `q`.
    open_x: u64,
    q_y_bits: u64,
    q_x_bits: u64,
    q_x: u64,
}

impl Subspace {
    fn new(prob: &EcnfProblem, q: &Assignment) -> Subspace {
        let universe = universe_mask(prob.num_vars());
        let x = mask_of(prob.x_vars().iter().copied());
        let y = universe & !x;
        let qm = mask_of(q.vars()) & universe;
        let qb = bits_of(q) & universe;
        Subspace {
            x,
            open_y: y & !qm,
            open_x: x & !qm,
            q_y_bits: qb & y,
            q_x_bits: qb & x,
            q_x: qm & x,
        }
    }

    fn y_count(&self) -> u64 {
        1u64 << self.open_y.count_ones()
    }

    /// Free part of the `i`-th point of the subspace.
    fn y_point(&self, i: u64) -> u64 {
        self.q_y_bits | deposit(i, self.open_y)
    }
}

fn universe_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Definition-level check that `p` is a `z`-boundary point of `f`.
pub fn is_z_boundary_point(p: &Assignment, f: &CnfFormula, z: &BTreeSet<Var>) -> Result<bool, OracleError> {
    if let Some(v) = f.vars().into_iter().find(|&v| !p.contains_var(v)) {
        return Err(OracleError::NotAPoint(v));
    }
    if z.is_empty() {
        return Ok(false);
    }
    let falsified: Vec<&Clause> = f.clauses().filter(|c| c.eval(p) == Some(false)).collect();
    if falsified.is_empty() {
        return Ok(false);
    }
    let covered = |skip: Option<Var>| {
        falsified
            .iter()
            .all(|c| c.vars().any(|v| z.contains(&v) && Some(v) != skip))
    };
    if !covered(None) {
        return Ok(false);
    }
    // Covering is monotone in Z, so minimality only needs the maximal proper subsets.
    Ok(z.iter().all(|&v| !covered(Some(v))))
}

impl Oracle {
    pub fn new(limit: u32, exec: Exec) -> Oracle {
        Oracle { limit, exec }
    }

    fn guard(&self, vars: u32) -> Result<(), OracleError> {
        if vars > self.limit || vars > 62 {
            return Err(OracleError::TooLarge {
                vars,
                limit: self.limit.min(62),
            });
        }
        Ok(())
    }

    /// `∃X F` as one full-width clause over `Y` per falsifying free point.
    pub fn qe_by_enumeration(&self, prob: &EcnfProblem) -> Result<CnfFormula, OracleError> {
        let n = prob.num_vars();
        self.guard(n)?;
        let cls = compile(prob.formula().clauses());
        let x = mask_of(prob.x_vars().iter().copied());
        let y = universe_mask(n) & !x;
        let bad = self
            .exec
            .collect_where(0..1u64 << y.count_ones(), |i| !exists_sat(&cls, deposit(i, y), x));
        let mut out = CnfFormula::new(n);
        for i in bad {
            let p = deposit(i, y);
            let lits: Vec<Lit> = assignment_of(p, y).iter().map(|(v, b)| Lit::new(v, !b)).collect();
            out.add_clause(lits)?;
        }
        Ok(out)
    }

    /// A free point where `candidate` and `∃X F` differ.
    pub fn counterexample(
        &self,
        candidate: &CnfFormula,
        prob: &EcnfProblem,
    ) -> Result<Option<Assignment>, OracleError> {
        let n = prob.num_vars();
        self.guard(n)?;
        if let Some(v) = candidate.vars().into_iter().find(|&v| v.index() > n || prob.is_x(v)) {
            return Err(OracleError::NotOverY(v));
        }
        let cls = compile(prob.formula().clauses());
        let cand = compile(candidate.clauses());
        let x = mask_of(prob.x_vars().iter().copied());
        let y = universe_mask(n) & !x;
        let hit = self.exec.find_first(0..1u64 << y.count_ones(), |i| {
            let p = deposit(i, y);
            satisfies(&cand, p) != exists_sat(&cls, p, x)
        });
        Ok(hit.map(|i| assignment_of(deposit(i, y), y)))
    }

    pub fn equiv_quantified(&self, candidate: &CnfFormula, prob: &EcnfProblem) -> Result<bool, OracleError> {
        Ok(self.counterexample(candidate, prob)?.is_none())
    }

    /// `f ⇒ (lits)`.
    pub fn implies(&self, f: &CnfFormula, lits: &[Lit]) -> Result<bool, OracleError> {
        let n = f
            .num_vars()
            .max(lits.iter().map(|l| l.var().index()).max().unwrap_or(0));
        self.guard(n)?;
        let cls = compile(f.clauses());
        let fixed = mask_of(lits.iter().map(|l| l.var()));
        let base = lits
            .iter()
            .filter(|l| !l.is_positive())
            .fold(0, |m, l| m | var_bit(l.var()));
        let free = universe_mask(n) & !fixed;
        let counter = self.exec.any(0..1u64 << free.count_ones(), |i| {
            satisfies(&cls, base | deposit(i, free))
        });
        Ok(!counter)
    }

    /// Whether no reassignment of `x_prime` turns the boundary point `p` into a
    /// satisfying assignment.
    pub fn is_removable(
        &self,
        p: &Assignment,
        prob: &EcnfProblem,
        x_prime: &BTreeSet<Var>,
    ) -> Result<bool, OracleError> {
        self.guard(prob.num_vars())?;
        let f = prob.formula();
        if let Some(v) = f.vars().into_iter().find(|&v| !p.contains_var(v)) {
            return Err(OracleError::NotAPoint(v));
        }
        if x_prime.iter().any(|&v| !prob.is_x(v)) {
            return Err(OracleError::NotBoundaryPoint);
        }
        let falsified: Vec<&Clause> = f.clauses().filter(|c| c.eval(p) == Some(false)).collect();
        if falsified.is_empty() || !falsified.iter().all(|c| c.vars().any(|v| x_prime.contains(&v))) {
            return Err(OracleError::NotBoundaryPoint);
        }
        let cls = compile(f.clauses());
        let free = mask_of(x_prime.iter().copied());
        let base = bits_of(p) & universe_mask(prob.num_vars()) & !free;
        Ok(!exists_sat(&cls, base, free))
    }

    /// `∃X[F|q] ≡ ∃X[(F \ G)|q]`.
    pub fn is_redundant_set(
        &self,
        g: &BTreeSet<ClauseId>,
        prob: &EcnfProblem,
        q: &Assignment,
    ) -> Result<RedundancyVerdict, OracleError> {
        self.guard(prob.num_vars())?;
        for &id in g {
            prob.clause(id)?;
        }
        let f = prob.formula();
        let all = compile(f.clauses());
        let rest = compile(f.clauses().filter(|c| !g.contains(&c.id())));
        let sub = Subspace::new(prob, q);
        let witness = self.exec.find_map_first(0..sub.y_count(), |i| {
            let base = sub.y_point(i) | sub.q_x_bits;
            if exists_sat(&all, base, sub.open_x) {
                return None;
            }
            find_sat(&rest, base, sub.open_x)
        });
        let universe = universe_mask(prob.num_vars());
        Ok(RedundancyVerdict {
            redundant: witness.is_none(),
            witness: witness.map(|p| assignment_of(p, universe)),
        })
    }

    /// Virtual redundancy of `c|q`, following the definition literally: every
    /// point of the subspace falsifying only `c` and removable there must stop
    /// being removable in some `r` with `q* ⊆ r ⊊ q`, where `q*` keeps only
    /// the free bindings of `q`. Each such `r` is enumerated.
    pub fn is_virtually_redundant(&self, c: ClauseId, prob: &EcnfProblem, q: &Assignment) -> Result<bool, OracleError> {
        self.guard(prob.num_vars())?;
        let f = prob.formula();
        let target = Masks::of(prob.clause(c)?);
        let Some(target) = target else {
            return Ok(true);
        };
        let all = compile(f.clauses());
        let others = compile(f.clauses().filter(|d| d.id() != c));
        let sub = Subspace::new(prob, q);
        let proper: Vec<u64> = submasks(sub.q_x).filter(|&t| t != sub.q_x).collect();
        let bad = self.exec.any(0..sub.y_count(), |i| {
            let y = sub.y_point(i);
            let base = y | sub.q_x_bits;
            if exists_sat(&all, base, sub.open_x) {
                return false;
            }
            submasks(sub.open_x).map(|s| base | s).any(|p| {
                let only_c = target.falsified(p) && satisfies(&others, p);
                only_c
                    && !proper.iter().any(|&kept| {
                        let r_bits = y | (sub.q_x_bits & kept);
                        let open = sub.open_x | (sub.q_x & !kept);
                        exists_sat(&all, r_bits, open)
                    })
            })
        });
        Ok(!bad)
    }

    /// Set form of virtual redundancy: every removable point of the subspace
    /// whose falsified clauses all lie in `g` must stop being removable once
    /// the quantified bindings of `q` are released. Releasing all of them is
    /// the weakest requirement, since removability only shrinks as bindings
    /// are dropped.
    pub fn is_virtually_redundant_set(
        &self,
        g: &BTreeSet<ClauseId>,
        prob: &EcnfProblem,
        q: &Assignment,
    ) -> Result<bool, OracleError> {
        self.guard(prob.num_vars())?;
        for &id in g {
            prob.clause(id)?;
        }
        let f = prob.formula();
        let all = compile(f.clauses());
        let rest = compile(f.clauses().filter(|d| !g.contains(&d.id())));
        let sub = Subspace::new(prob, q);
        let bad = self.exec.any(0..sub.y_count(), |i| {
            let y = sub.y_point(i);
            let base = y | sub.q_x_bits;
            if exists_sat(&all, base, sub.open_x) || !exists_sat(&rest, base, sub.open_x) {
                return false;
            }
            sub.q_x == 0 || !exists_sat(&all, y, sub.x)
        });
        Ok(!bad)
    }

    /// Member-formula audit of a D-sequent against the problem version it is
    /// tagged with: for every `W` with `H ∪ {C} ⊆ W ⊆ F` and
    /// `∃X[W|q] ≡ ∃X[F|q]`, `C|q` must be virtually redundant in `∃X[W|q]`.
    ///
    /// Clauses with the same residual under the free bindings of `q` are
    /// interchangeable in every check, so members are enumerated per group.
    pub fn check_dsequent(&self, s: &DSequent, prob: &EcnfProblem) -> Result<Option<AuditFailure>, OracleError> {
        let n = prob.num_vars();
        self.guard(n)?;
        if s.tag() > prob.tag() {
            return Err(OracleError::UnknownTag(s.tag()));
        }
        let prob = prob.at_tag(s.tag());
        let f = prob.formula();
        let structural = |reason| {
            Ok(Some(AuditFailure {
                member: BTreeSet::new(),
                y_point: Assignment::new(),
                reason,
            }))
        };
        let Ok(target) = prob.clause(s.target()) else {
            return structural("target not in the formula");
        };
        if !prob.is_x_clause(target) {
            return structural("target is not an X-clause");
        }
        if s.constraint().iter().any(|&h| !f.contains(h)) || s.constraint().contains(&s.target()) {
            return structural("constraint clause not in the formula");
        }

        let sub = Subspace::new(&prob, s.conditional());
        let q_y = assignment_of(
            sub.q_y_bits,
            universe_mask(n) & !sub.x & mask_of(s.conditional().vars()),
        );
        let residual = |c: &Clause| c.cofactor(&q_y);
        let Some(c_mask) = Masks::of(&residual(target)) else {
            return Ok(None);
        };
        let h_residuals: Vec<Clause> = s
            .constraint()
            .iter()
            .map(|&h| residual(f.clause(h).expect("checked")))
            .collect();
        let h_masks = compile(&h_residuals);

        let mut ordered: Vec<(Masks, Vec<ClauseId>)> = Vec::new();
        let mut index: BTreeMap<Vec<Lit>, usize> = BTreeMap::new();
        for c in f.clauses() {
            if c.id() == s.target() || s.constraint().contains(&c.id()) {
                continue;
            }
            let r = residual(c);
            if r.is_true() {
                continue;
            }
            let gi = *index.entry(r.lits().to_vec()).or_insert_with(|| {
                ordered.push((Masks::of(&r).expect("not satisfied"), Vec::new()));
                ordered.len() - 1
            });
            ordered[gi].1.push(c.id());
        }
        let k = ordered.len();
        if k > 24 {
            return Err(OracleError::TooLarge {
                vars: k as u32,
                limit: 24,
            });
        }

        const H_FLAG: u64 = 1 << 62;
        const C_FLAG: u64 = 1 << 63;
        let ny = sub.open_y.count_ones();
        let nx = sub.x.count_ones();
        let per_y = 1usize << nx;
        let mut cells = vec![0u64; (1usize << ny) * per_y];
        let mut consistent = vec![false; per_y];
        for (xi, slot) in consistent.iter_mut().enumerate() {
            *slot = deposit(xi as u64, sub.x) & sub.q_x == sub.q_x_bits;
        }
        for yi in 0..1u64 << ny {
            let y = sub.y_point(yi);
            for xi in 0..per_y {
                let p = y | deposit(xi as u64, sub.x);
                let mut cell = 0u64;
                for (gi, (m, _)) in ordered.iter().enumerate() {
                    if m.falsified(p) {
                        cell |= 1 << gi;
                    }
                }
                if h_masks.iter().any(|m| m.falsified(p)) {
                    cell |= H_FLAG;
                }
                if c_mask.falsified(p) {
                    cell |= C_FLAG;
                }
                cells[yi as usize * per_y + xi] = cell;
            }
        }
        let all_groups = (1u64 << k) - 1;
        let sat_q = |row: &[u64], w: u64| {
            row.iter()
                .zip(&consistent)
                .any(|(&cell, &cons)| cons && cell & (w | H_FLAG | C_FLAG) == 0)
        };
        let full_sat: Vec<bool> = (0..1usize << ny)
            .map(|yi| sat_q(&cells[yi * per_y..(yi + 1) * per_y], all_groups))
            .collect();
        let has_x = sub.q_x != 0;

        let failure = self.exec.find_map_first(0..1u64 << k, |w| {
            let mut member = true;
            let mut unsat_rows = Vec::new();
            for yi in 0..1usize << ny {
                let row = &cells[yi * per_y..(yi + 1) * per_y];
                if sat_q(row, w) {
                    if !full_sat[yi] {
                        member = false;
                        break;
                    }
                } else {
                    unsat_rows.push(yi);
                }
            }
            if !member {
                return None;
            }
            unsat_rows
                .into_iter()
                .find(|&yi| {
                    let row = &cells[yi * per_y..(yi + 1) * per_y];
                    let only_c = row
                        .iter()
                        .zip(&consistent)
                        .any(|(&cell, &cons)| cons && cell & C_FLAG != 0 && cell & (w | H_FLAG) == 0);
                    let repairable = row.iter().any(|&cell| cell & (w | H_FLAG | C_FLAG) == 0);
                    only_c && !(has_x && repairable)
                })
                .map(|yi| (w, yi))
        });
        Ok(failure.map(|(w, yi)| {
            let mut member: BTreeSet<ClauseId> = s.constraint().clone();
            member.insert(s.target());
            for (gi, (_, ids)) in ordered.iter().enumerate() {
                if w & (1 << gi) != 0 {
                    member.insert(ids[0]);
                }
            }
            AuditFailure {
                member,
                y_point: assignment_of(sub.y_point(yi as u64), universe_mask(n) & !sub.x),
                reason: "not virtually redundant in a member formula",
            }
        }))
    }

    /// The audit by the definition: every clause subset is a candidate member.
    /// Exponential in the clause count; for cross-checking on tiny instances.
    pub fn check_dsequent_literal(&self, s: &DSequent, prob: &EcnfProblem) -> Result<bool, OracleError> {
        self.guard(prob.num_vars())?;
        let prob = prob.at_tag(s.tag());
        let f = prob.formula();
        if !prob.is_x_clause(prob.clause(s.target())?) {
            return Ok(false);
        }
        let free: Vec<ClauseId> = f
            .ids()
            .filter(|&id| id != s.target() && !s.constraint().contains(&id))
            .collect();
        let inner = Oracle::new(self.limit, Exec::Sequential);
        let bad = self.exec.any(0..1u64 << free.len(), |w| {
            let dropped: BTreeSet<ClauseId> = free
                .iter()
                .enumerate()
                .filter(|&(i, _)| w & (1 << i) == 0)
                .map(|(_, &id)| id)
                .collect();
            let member = inner
                .is_redundant_set(&dropped, &prob, s.conditional())
                .expect("guarded")
                .redundant;
            if !member {
                return false;
            }
            let w_prob = prob.with_formula(f.without(&dropped));
            !inner
                .is_virtually_redundant(s.target(), &w_prob, s.conditional())
                .expect("guarded")
        });
        Ok(!bad)
    }

    /// A satisfying point `s` and a variable `v` such that flipping `v` in `s`
    /// gives a `{v}`-boundary point. `None` iff `f` has no satisfying point.
    pub fn single_flip_boundary_point(&self, f: &CnfFormula) -> Result<Option<(Assignment, Var)>, OracleError> {
        let n = f.num_vars();
        self.guard(n)?;
        let cls = compile(f.clauses());
        let vars = mask_of(f.vars());
        let found = self.exec.find_map_first(0..1u64 << vars.count_ones(), |i| {
            let p = deposit(i, vars);
            if !satisfies(&cls, p) {
                return None;
            }
            let mut rest = vars;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if !satisfies(&cls, p ^ bit) {
                    return Some((p, bit));
                }
                rest &= rest - 1;
            }
            None
        });
        Ok(found.map(|(p, bit)| (assignment_of(p, vars), Var::new(bit.trailing_zeros() + 1))))
    }
}
