//! Clauses, formulas, assignments and the ∃CNF problem they form.
//!
//! Everything here is an immutable value type. Cofactoring keeps satisfied
//! clauses in the formula as [`ClauseState::True`] residuals, so a clause id
//! that was present before cofactoring is still present afterwards.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A propositional variable, numbered from 1 as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on 0; variable indices are 1-based.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    pub fn pos(var: u32) -> Lit {
        Lit::new(Var::new(var), true)
    }

    pub fn neg(var: u32) -> Lit {
        Lit::new(Var::new(var), false)
    }

    pub fn from_dimacs(value: i32) -> Option<Lit> {
        if value == 0 {
            return None;
        }
        Some(Lit::new(Var::new(value.unsigned_abs()), value > 0))
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var.0 as i32;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negate(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }

    /// The value this literal takes when its variable is set to `bit`.
    pub fn eval(self, bit: bool) -> bool {
        bit == self.positive
    }

    /// The binding that makes this literal true.
    pub fn satisfying_bit(self) -> bool {
        self.positive
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Stable clause identifier. Ids are handed out sequentially and never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseId(pub u32);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

/// Version of a growing formula: the number of derived clauses appended so far.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaTag(pub u32);

impl fmt::Display for FormulaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClauseState {
    Normal,
    True,
    False,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("clause contains both polarities of variable {0}")]
    Tautology(Var),
    #[error("variable {var} outside the universe 1..={num_vars}")]
    VarOutOfRange { var: Var, num_vars: u32 },
    #[error("variable {0} is bound twice with different values")]
    ConflictingBinding(Var),
    #[error("clauses or assignments are not resolvable on variable {0}")]
    NotResolvable(Var),
    #[error("variable {0} does not occur in the clause")]
    VarNotInClause(Var),
    #[error("variable {0} is both quantified and free")]
    OverlappingQuantifier(Var),
    #[error("unknown clause {0}")]
    UnknownClause(ClauseId),
}

/// A clause with a stable id.
///
/// Literals are kept sorted by variable with at most one literal per variable.
/// Equality compares literal sets and state only; ids are ignored.
#[derive(Clone, Debug, Eq)]
pub struct Clause {
    id: ClauseId,
    lits: Vec<Lit>,
    state: ClauseState,
}

impl PartialEq for Clause {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state && self.lits == other.lits
    }
}

impl std::hash::Hash for Clause {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.state.hash(h);
        self.lits.hash(h);
    }
}

impl Clause {
    /// Builds a clause, sorting and de-duplicating literals. Tautologies are rejected.
    pub fn new(id: ClauseId, lits: impl IntoIterator<Item = Lit>) -> Result<Clause, CnfError> {
        let lits = normalize(lits)?;
        let state = if lits.is_empty() {
            ClauseState::False
        } else {
            ClauseState::Normal
        };
        Ok(Clause { id, lits, state })
    }

    fn satisfied(id: ClauseId) -> Clause {
        Clause {
            id,
            lits: Vec::new(),
            state: ClauseState::True,
        }
    }

    pub fn id(&self) -> ClauseId {
        self.id
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn state(&self) -> ClauseState {
        self.state
    }

    pub fn is_true(&self) -> bool {
        self.state == ClauseState::True
    }

    pub fn is_false(&self) -> bool {
        self.state == ClauseState::False
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn lit_of(&self, var: Var) -> Option<Lit> {
        self.lits
            .binary_search_by_key(&var, |l| l.var())
            .ok()
            .map(|i| self.lits[i])
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lit_of(lit.var()) == Some(lit)
    }

    /// True iff some variable of the clause lies in `z`.
    pub fn is_z_clause(&self, z: &BTreeSet<Var>) -> bool {
        self.vars().any(|v| z.contains(&v))
    }

    /// Residual of the clause under `p`: `True` if satisfied, otherwise the
    /// clause minus falsified literals (state `False` when nothing is left).
    pub fn cofactor(&self, p: &Assignment) -> Clause {
        if self.is_true() {
            return self.clone();
        }
        let mut rest = Vec::with_capacity(self.lits.len());
        for &lit in &self.lits {
            match p.get(lit.var()) {
                Some(bit) if lit.eval(bit) => return Clause::satisfied(self.id),
                Some(_) => {}
                None => rest.push(lit),
            }
        }
        let state = if rest.is_empty() {
            ClauseState::False
        } else {
            ClauseState::Normal
        };
        Clause {
            id: self.id,
            lits: rest,
            state,
        }
    }

    /// Value of the clause under `p`, `None` while undecided.
    pub fn eval(&self, p: &Assignment) -> Option<bool> {
        match self.cofactor(p).state {
            ClauseState::True => Some(true),
            ClauseState::False => Some(false),
            ClauseState::Normal => None,
        }
    }

    /// Every literal of `self` is a literal of `other`. `True` residuals imply nothing
    /// but themselves.
    pub fn subsumes(&self, other: &Clause) -> bool {
        match (self.state, other.state) {
            (ClauseState::True, _) => other.is_true(),
            (_, ClauseState::True) => true,
            _ => self.lits.iter().all(|&l| other.contains(l)),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.state {
            ClauseState::True => write!(f, "{}:true", self.id),
            ClauseState::False => write!(f, "{}:false", self.id),
            ClauseState::Normal => {
                write!(f, "{}:(", self.id)?;
                for (i, l) in self.lits.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{l}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn normalize(lits: impl IntoIterator<Item = Lit>) -> Result<Vec<Lit>, CnfError> {
    let mut lits: Vec<Lit> = lits.into_iter().collect();
    lits.sort();
    lits.dedup();
    for pair in lits.windows(2) {
        if pair[0].var() == pair[1].var() {
            return Err(CnfError::Tautology(pair[0].var()));
        }
    }
    Ok(lits)
}

/// Result of resolving two clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolvent {
    Clause(Vec<Lit>),
    Tautology,
}

/// Resolves `c1` and `c2` on `var`.
///
/// Fails unless the clauses carry opposite literals of `var`. When they clash
/// on another variable too, the union is tautological and `Tautology` is returned.
pub fn resolve(c1: &Clause, c2: &Clause, var: Var) -> Result<Resolvent, CnfError> {
    let (l1, l2) = match (c1.lit_of(var), c2.lit_of(var)) {
        (Some(a), Some(b)) if a == b.negate() => (a, b),
        _ => return Err(CnfError::NotResolvable(var)),
    };
    let union = c1
        .lits
        .iter()
        .chain(c2.lits.iter())
        .copied()
        .filter(|&l| l != l1 && l != l2);
    match normalize(union) {
        Ok(lits) => Ok(Resolvent::Clause(lits)),
        Err(_) => Ok(Resolvent::Tautology),
    }
}

/// Whether `c` and `other` resolve on `var` into a non-tautological clause.
pub fn resolvable(c: &Clause, other: &Clause, var: Var) -> bool {
    matches!(resolve(c, other, var), Ok(Resolvent::Clause(_)))
}

/// `c` is blocked at `var` in `f`: no `Normal` clause of `f` other than `c`
/// itself resolves with it on `var`. Satisfied residuals are skipped.
pub fn is_blocked(f: &CnfFormula, c: &Clause, var: Var) -> Result<bool, CnfError> {
    if c.lit_of(var).is_none() {
        return Err(CnfError::VarNotInClause(var));
    }
    Ok(!f
        .clauses()
        .filter(|d| d.id() != c.id() && d.state() == ClauseState::Normal)
        .any(|d| resolvable(c, d, var)))
}

/// A partial assignment. A total one over `Vars(F)` is a point of `F`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    bindings: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// Builds an assignment from `(var, bit)` pairs; a variable bound twice with
    /// different values is an error.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, bool)>) -> Result<Assignment, CnfError> {
        let mut a = Assignment::new();
        for (v, b) in pairs {
            a.assign(Var::new(v), b)?;
        }
        Ok(a)
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.bindings.get(&var).copied()
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.bindings.contains_key(&var)
    }

    pub fn assign(&mut self, var: Var, bit: bool) -> Result<(), CnfError> {
        match self.bindings.insert(var, bit) {
            Some(old) if old != bit => {
                self.bindings.insert(var, old);
                Err(CnfError::ConflictingBinding(var))
            }
            _ => Ok(()),
        }
    }

    pub fn unassign(&mut self, var: Var) -> Option<bool> {
        self.bindings.remove(&var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.bindings.iter().map(|(&v, &b)| (v, b))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.bindings.keys().copied()
    }

    /// `self ⊆ other`: every binding of `self` appears in `other`.
    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.bindings.len() <= other.bindings.len() && self.iter().all(|(v, b)| other.get(v) == Some(b))
    }

    /// No shared variable is bound to opposite values.
    pub fn compatible(&self, other: &Assignment) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().all(|(v, b)| large.get(v).is_none_or(|c| c == b))
    }

    pub fn union(&self, other: &Assignment) -> Result<Assignment, CnfError> {
        let mut out = self.clone();
        for (v, b) in other.iter() {
            out.assign(v, b)?;
        }
        Ok(out)
    }

    /// Resolvent of two assignments on `var`: the union of their bindings minus
    /// `var`. `var` must be the one and only variable bound to opposite values.
    pub fn resolve(&self, other: &Assignment, var: Var) -> Result<Assignment, CnfError> {
        let mut clash = None;
        for (v, b) in self.iter() {
            if let Some(c) = other.get(v) {
                if c != b {
                    if clash.is_some() {
                        return Err(CnfError::NotResolvable(var));
                    }
                    clash = Some(v);
                }
            }
        }
        if clash != Some(var) {
            return Err(CnfError::NotResolvable(var));
        }
        let mut out = Assignment::new();
        for (v, b) in self.iter().chain(other.iter()) {
            if v != var {
                out.bindings.insert(v, b);
            }
        }
        Ok(out)
    }

    /// Copy of `self` keeping only the bindings whose variable passes `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(Var) -> bool) -> Assignment {
        Assignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| keep(**v))
                .map(|(&v, &b)| (v, b))
                .collect(),
        }
    }

    pub fn without(&self, var: Var) -> Assignment {
        self.restrict(|v| v != var)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}={}", v, b as u8)?;
        }
        write!(f, ")")
    }
}

/// An id-indexed clause database over the variable universe `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: BTreeMap<ClauseId, Clause>,
    next_id: u32,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: BTreeMap::new(),
            next_id: 1,
        }
    }

    /// Convenience constructor from DIMACS-style integer clauses.
    pub fn from_dimacs(num_vars: u32, clauses: &[&[i32]]) -> Result<CnfFormula, CnfError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_clause(c.iter().filter_map(|&l| Lit::from_dimacs(l)))?;
        }
        Ok(f)
    }

    /// Appends a clause under the next free id.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) -> Result<ClauseId, CnfError> {
        let id = ClauseId(self.next_id);
        let clause = Clause::new(id, lits)?;
        if let Some(v) = clause.vars().find(|v| v.index() > self.num_vars) {
            return Err(CnfError::VarOutOfRange {
                var: v,
                num_vars: self.num_vars,
            });
        }
        self.clauses.insert(id, clause);
        self.next_id += 1;
        Ok(id)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.get(&id)
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> + '_ {
        self.clauses.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClauseId> + '_ {
        self.clauses.keys().copied()
    }

    pub fn contains(&self, id: ClauseId) -> bool {
        self.clauses.contains_key(&id)
    }

    pub fn next_id(&self) -> ClauseId {
        ClauseId(self.next_id)
    }

    /// Variables occurring in some clause.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.clauses().flat_map(|c| c.vars()).collect()
    }

    /// Every clause replaced by its residual under `p`; ids and satisfied
    /// residuals are retained.
    pub fn cofactor(&self, p: &Assignment) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: self.clauses.iter().map(|(&id, c)| (id, c.cofactor(p))).collect(),
            next_id: self.next_id,
        }
    }

    /// The sub-formula without the clauses in `removed`.
    pub fn without<'a>(&self, removed: impl IntoIterator<Item = &'a ClauseId>) -> CnfFormula {
        let mut out = self.clone();
        for id in removed {
            out.clauses.remove(id);
        }
        out
    }

    /// The sub-formula made of the clauses whose id passes `keep`.
    pub fn retain(&self, mut keep: impl FnMut(ClauseId) -> bool) -> CnfFormula {
        let mut out = self.clone();
        out.clauses.retain(|&id, _| keep(id));
        out
    }

    pub fn has_false_clause(&self) -> bool {
        self.clauses().any(Clause::is_false)
    }

    /// Value of the formula under `p`, `None` while undecided.
    pub fn eval(&self, p: &Assignment) -> Option<bool> {
        let mut undecided = false;
        for c in self.clauses() {
            match c.eval(p) {
                Some(false) => return Some(false),
                None => undecided = true,
                Some(true) => {}
            }
        }
        if undecided {
            None
        } else {
            Some(true)
        }
    }

    /// Clause lists sorted by literal sequence, ids dropped.
    pub fn canonical_clauses(&self) -> Vec<Vec<i32>> {
        let mut out: Vec<Vec<i32>> = self
            .clauses()
            .filter(|c| !c.is_true())
            .map(|c| c.lits().iter().map(|l| l.to_dimacs()).collect())
            .collect();
        out.sort();
        out
    }
}

/// One extension step of a growing formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineageStep {
    pub clause: ClauseId,
    /// The clause is known to be implied by the original formula.
    pub implied: bool,
}

/// `∃X[F(X,Y)]`. `Y` is the rest of the variable universe.
///
/// The formula may grow by derived clauses; each addition bumps the
/// [`FormulaTag`] and is recorded in the lineage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcnfProblem {
    formula: CnfFormula,
    x_vars: BTreeSet<Var>,
    original_len: usize,
    lineage: Vec<LineageStep>,
}

impl EcnfProblem {
    pub fn new(formula: CnfFormula, x_vars: impl IntoIterator<Item = Var>) -> Result<EcnfProblem, CnfError> {
        let x_vars: BTreeSet<Var> = x_vars.into_iter().collect();
        if let Some(&v) = x_vars.iter().find(|v| v.index() > formula.num_vars()) {
            return Err(CnfError::VarOutOfRange {
                var: v,
                num_vars: formula.num_vars(),
            });
        }
        let original_len = formula.len();
        Ok(EcnfProblem {
            formula,
            x_vars,
            original_len,
            lineage: Vec::new(),
        })
    }

    /// Shorthand for tests and examples: DIMACS clauses and quantified indices.
    pub fn from_dimacs(num_vars: u32, clauses: &[&[i32]], x_vars: &[u32]) -> Result<EcnfProblem, CnfError> {
        let f = CnfFormula::from_dimacs(num_vars, clauses)?;
        EcnfProblem::new(f, x_vars.iter().map(|&v| Var::new(v)))
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn num_vars(&self) -> u32 {
        self.formula.num_vars()
    }

    pub fn x_vars(&self) -> &BTreeSet<Var> {
        &self.x_vars
    }

    pub fn is_x(&self, var: Var) -> bool {
        self.x_vars.contains(&var)
    }

    /// Free variables: the universe minus `X`.
    pub fn y_vars(&self) -> BTreeSet<Var> {
        (1..=self.num_vars())
            .map(Var::new)
            .filter(|v| !self.x_vars.contains(v))
            .collect()
    }

    pub fn is_x_clause(&self, c: &Clause) -> bool {
        c.vars().any(|v| self.is_x(v))
    }

    pub fn x_clause_ids(&self) -> Vec<ClauseId> {
        self.formula
            .clauses()
            .filter(|c| self.is_x_clause(c))
            .map(Clause::id)
            .collect()
    }

    pub fn clause(&self, id: ClauseId) -> Result<&Clause, CnfError> {
        self.formula.clause(id).ok_or(CnfError::UnknownClause(id))
    }

    pub fn tag(&self) -> FormulaTag {
        FormulaTag(self.lineage.len() as u32)
    }

    pub fn lineage(&self) -> &[LineageStep] {
        &self.lineage
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Ids of the clauses appended after construction, in order.
    pub fn derived_ids(&self) -> impl Iterator<Item = ClauseId> + '_ {
        self.lineage.iter().map(|s| s.clause)
    }

    /// Appends a clause implied by the original formula and bumps the tag.
    pub fn add_derived(&mut self, lits: impl IntoIterator<Item = Lit>) -> Result<ClauseId, CnfError> {
        self.extend(lits, true)
    }

    /// Appends a clause with no implication guarantee. Alignment refuses to
    /// carry D-sequents across such a step.
    pub fn add_unverified(&mut self, lits: impl IntoIterator<Item = Lit>) -> Result<ClauseId, CnfError> {
        self.extend(lits, false)
    }

    fn extend(&mut self, lits: impl IntoIterator<Item = Lit>, implied: bool) -> Result<ClauseId, CnfError> {
        let id = self.formula.add_clause(lits)?;
        self.lineage.push(LineageStep { clause: id, implied });
        Ok(id)
    }

    /// The problem as it was at `tag` (original clauses plus the first
    /// `tag` derived ones).
    pub fn at_tag(&self, tag: FormulaTag) -> EcnfProblem {
        let keep = tag.0 as usize;
        let dropped: BTreeSet<ClauseId> = self.lineage.iter().skip(keep).map(|s| s.clause).collect();
        EcnfProblem {
            formula: self.formula.retain(|id| !dropped.contains(&id)),
            x_vars: self.x_vars.clone(),
            original_len: self.original_len,
            lineage: self.lineage[..keep.min(self.lineage.len())].to_vec(),
        }
    }

    /// Same quantifier prefix over a different clause set (used for member formulas).
    pub fn with_formula(&self, formula: CnfFormula) -> EcnfProblem {
        EcnfProblem {
            original_len: formula.len(),
            formula,
            x_vars: self.x_vars.clone(),
            lineage: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_var() -> EcnfProblem {
        // x1..x3 = 1..3, y1 = 4, y2 = 5
        EcnfProblem::from_dimacs(5, &[&[1, 2], &[-1, 4], &[1, -3, 5], &[-2, 5]], &[1, 2, 3]).unwrap()
    }

    fn a(pairs: &[(u32, bool)]) -> Assignment {
        Assignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn clause(id: u32, lits: &[i32]) -> Clause {
        Clause::new(ClauseId(id), lits.iter().map(|&l| Lit::from_dimacs(l).unwrap())).unwrap()
    }

    #[test]
    fn cofactor_clause_examples() {
        let c = clause(1, &[1, 2]);
        assert_eq!(c.cofactor(&a(&[(1, false)])), clause(1, &[2]));
        assert!(clause(2, &[-1, 4]).cofactor(&a(&[(1, false)])).is_true());
        let p = a(&[(1, false), (2, false), (3, true), (4, false), (5, false)]);
        let r = clause(3, &[1, -3, 5]).cofactor(&p);
        assert!(r.is_false());
        assert_eq!(r.id(), ClauseId(3));
    }

    #[test]
    fn cofactor_formula_five_var() {
        let f = five_var().formula().cofactor(&a(&[(1, true)]));
        let got: Vec<String> = f.clauses().map(|c| c.to_string()).collect();
        assert_eq!(got, vec!["C1:true", "C2:(4)", "C3:true", "C4:(-2 5)"]);
        let g = five_var();
        assert_eq!(g.formula().cofactor(&Assignment::new()), *g.formula());
        let unit = CnfFormula::from_dimacs(1, &[&[1]]).unwrap();
        let r = unit.cofactor(&a(&[(1, false)]));
        assert!(r.clause(ClauseId(1)).unwrap().is_false());
        assert!(r.has_false_clause());
    }

    #[test]
    fn tautologies_rejected() {
        assert_eq!(
            CnfFormula::from_dimacs(2, &[&[1, -1]]).unwrap_err(),
            CnfError::Tautology(Var::new(1))
        );
        assert!(matches!(
            CnfFormula::from_dimacs(2, &[&[3]]),
            Err(CnfError::VarOutOfRange { .. })
        ));
    }

    #[test]
    fn resolve_examples() {
        let r = resolve(&clause(1, &[1, 2]), &clause(2, &[-1, 4]), Var::new(1)).unwrap();
        assert_eq!(r, Resolvent::Clause(vec![Lit::pos(2), Lit::pos(4)]));

        let f = five_var();
        let c1 = f.clause(ClauseId(1)).unwrap();
        let c2 = f.clause(ClauseId(2)).unwrap();
        let c4 = f.clause(ClauseId(4)).unwrap();
        let Resolvent::Clause(r12) = resolve(c1, c2, Var::new(1)).unwrap() else {
            panic!("tautology")
        };
        let r12 = Clause::new(ClauseId(99), r12).unwrap();
        let r = resolve(&r12, c4, Var::new(2)).unwrap();
        assert_eq!(r, Resolvent::Clause(vec![Lit::pos(4), Lit::pos(5)]));

        let t = resolve(&clause(1, &[1, 2]), &clause(2, &[-1, -2]), Var::new(1)).unwrap();
        assert_eq!(t, Resolvent::Tautology);

        assert!(resolve(&clause(1, &[1, 2]), &clause(2, &[1, 3]), Var::new(1)).is_err());
        assert!(resolve(&clause(1, &[1, 2]), &clause(2, &[3]), Var::new(1)).is_err());
    }

    #[test]
    fn blocked_examples() {
        let f = CnfFormula::from_dimacs(2, &[&[1, 2]]).unwrap();
        let c = f.clause(ClauseId(1)).unwrap();
        assert!(is_blocked(&f, c, Var::new(1)).unwrap());

        let f = CnfFormula::from_dimacs(3, &[&[1, 2], &[-1, 3]]).unwrap();
        let c = f.clause(ClauseId(1)).unwrap();
        assert!(!is_blocked(&f, c, Var::new(1)).unwrap());
        assert_eq!(
            is_blocked(&f, c, Var::new(3)).unwrap_err(),
            CnfError::VarNotInClause(Var::new(3))
        );
    }

    #[test]
    fn blocked_after_cofactor_and_removal() {
        // x5 = 5, x10 = 10, y1 = 1, y2 = 2, y3 = 3, y5 = 4; C3, C6, C8 and a stand-in C10.
        let mut f = CnfFormula::new(10);
        let c3 = f.add_clause([Lit::pos(5), Lit::pos(10)]).unwrap();
        let c6 = f.add_clause([Lit::neg(5), Lit::pos(1)]).unwrap();
        let c8 = f.add_clause([Lit::neg(5), Lit::pos(3), Lit::pos(4)]).unwrap();
        f.add_clause([Lit::neg(10), Lit::pos(2)]).unwrap();
        let q = a(&[(1, true), (2, false)]);
        let fq = f.cofactor(&q);
        assert!(fq.clause(c6).unwrap().is_true());
        let c3q = f.clause(c3).unwrap().cofactor(&q);
        assert!(!is_blocked(&fq, &c3q, Var::new(5)).unwrap());
        let reduced = fq.without([&c8]);
        assert!(is_blocked(&reduced, &c3q, Var::new(5)).unwrap());
    }

    #[test]
    fn assignment_algebra() {
        let q1 = a(&[(1, false), (2, true)]);
        let q2 = a(&[(1, true), (2, true)]);
        assert_eq!(q1.resolve(&q2, Var::new(1)).unwrap(), a(&[(2, true)]));
        assert_eq!(
            a(&[(1, false)]).resolve(&a(&[(1, true)]), Var::new(1)).unwrap(),
            Assignment::new()
        );
        assert!(a(&[(1, false), (2, false)])
            .resolve(&a(&[(1, true), (2, true)]), Var::new(1))
            .is_err());
        assert!(a(&[(2, false)]).resolve(&a(&[(2, false)]), Var::new(2)).is_err());

        assert!(a(&[(1, false), (2, true)]).compatible(&a(&[(2, true), (3, false)])));
        assert!(!a(&[(1, false)]).compatible(&a(&[(1, true)])));
        assert!(Assignment::new().compatible(&q1));
        assert!(a(&[(2, true)]).is_subset_of(&q1));
        assert!(!q1.is_subset_of(&a(&[(2, true)])));
        assert!(Assignment::from_pairs([(1, true), (1, false)]).is_err());
    }

    #[test]
    fn problem_lineage() {
        let mut p = five_var();
        assert_eq!(p.tag(), FormulaTag(0));
        assert_eq!(p.y_vars(), [4, 5].into_iter().map(Var::new).collect());
        let k = p.add_derived([Lit::pos(4), Lit::pos(5)]).unwrap();
        assert_eq!(k, ClauseId(5));
        assert_eq!(p.tag(), FormulaTag(1));
        assert_eq!(p.at_tag(FormulaTag(0)).formula().len(), 4);
        assert_eq!(
            p.x_clause_ids(),
            vec![ClauseId(1), ClauseId(2), ClauseId(3), ClauseId(4)]
        );
    }
}
