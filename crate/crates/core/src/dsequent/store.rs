//! D-sequents kept for re-use, and their text form.
//!
//! Line format, one record per line, `#` starts a comment:
//!
//! ```text
//! f <fingerprint>                       formula the records belong to
//! r <id> <lit> ... 0                    derived clause, in lineage order
//! d <target> q <var>=<bit> ... h <id> ... tag <n>
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::DSequent;
use crate::cnf::{Assignment, ClauseId, EcnfProblem, FormulaTag, Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StoreConfig {
    /// Longest conditional admitted.
    pub max_conditional: usize,
    pub capacity: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            max_conditional: 8,
            capacity: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    dseq: DSequent,
    robust: bool,
    stamp: u64,
}

/// Bounded multimap from target to D-sequents. When full, the least recently
/// used fragile entry goes first, then the least recently used robust one.
#[derive(Clone, Debug, Default)]
pub struct DSequentStore {
    config: StoreConfig,
    entries: HashMap<u64, Entry>,
    by_target: BTreeMap<ClauseId, Vec<u64>>,
    lru: BTreeSet<(bool, u64, u64)>,
    next_slot: u64,
    clock: u64,
}

impl DSequentStore {
    pub fn new(config: StoreConfig) -> DSequentStore {
        DSequentStore {
            config,
            ..DSequentStore::default()
        }
    }

    pub fn config(&self) -> StoreConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `s` unless its conditional is too long, the capacity is zero or
    /// an identical entry exists. Returns whether it was stored.
    pub fn admit(&mut self, s: &DSequent, prob: &EcnfProblem) -> bool {
        if s.conditional().len() > self.config.max_conditional || self.config.capacity == 0 {
            return false;
        }
        let robust = s.is_robust(prob);
        if let Some(slots) = self.by_target.get(&s.target()) {
            if slots.iter().any(|slot| {
                let e = &self.entries[slot].dseq;
                e.conditional() == s.conditional() && e.constraint() == s.constraint()
            }) {
                return false;
            }
        }
        while self.entries.len() >= self.config.capacity {
            let &(_, _, slot) = self.lru.first().expect("non-empty store");
            self.evict(slot);
        }
        self.clock += 1;
        let slot = self.next_slot;
        self.next_slot += 1;
        self.entries.insert(
            slot,
            Entry {
                dseq: s.clone(),
                robust,
                stamp: self.clock,
            },
        );
        self.by_target.entry(s.target()).or_default().push(slot);
        self.lru.insert((robust, self.clock, slot));
        true
    }

    fn evict(&mut self, slot: u64) {
        let e = self.entries.remove(&slot).expect("live slot");
        self.lru.remove(&(e.robust, e.stamp, slot));
        let slots = self.by_target.get_mut(&e.dseq.target()).expect("indexed target");
        slots.retain(|&s| s != slot);
        if slots.is_empty() {
            self.by_target.remove(&e.dseq.target());
        }
    }

    /// Entries for `target` whose conditional is contained in `q`: robust
    /// ones first, then shorter conditionals, then oldest first.
    pub fn lookup(&self, target: ClauseId, q: &Assignment) -> Vec<DSequent> {
        let Some(slots) = self.by_target.get(&target) else {
            return Vec::new();
        };
        let mut hits: Vec<&Entry> = slots
            .iter()
            .map(|s| &self.entries[s])
            .filter(|e| e.dseq.conditional().is_subset_of(q))
            .collect();
        hits.sort_by_key(|e| (!e.robust, e.dseq.conditional().len(), e.dseq.constraint().len()));
        hits.into_iter().map(|e| e.dseq.clone()).collect()
    }

    /// Marks `s` as recently used.
    pub fn touch(&mut self, s: &DSequent) {
        let Some(slots) = self.by_target.get(&s.target()) else {
            return;
        };
        let Some(&slot) = slots.iter().find(|slot| self.entries[slot].dseq == *s) else {
            return;
        };
        self.clock += 1;
        let e = self.entries.get_mut(&slot).expect("live slot");
        self.lru.remove(&(e.robust, e.stamp, slot));
        e.stamp = self.clock;
        self.lru.insert((e.robust, e.stamp, slot));
    }

    /// All entries, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &DSequent> + '_ {
        let mut entries: Vec<&Entry> = self.entries.values().collect();
        entries.sort_by_key(|e| e.stamp);
        entries.into_iter().map(|e| &e.dseq)
    }

    pub fn snapshot(&self, prob: &EcnfProblem, fingerprint: Option<String>) -> StoreSnapshot {
        let derived = prob
            .derived_ids()
            .map(|id| (id, prob.clause(id).expect("derived clause").lits().to_vec()))
            .collect();
        StoreSnapshot {
            fingerprint,
            derived,
            dseqs: self.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct SnapshotError {
    pub line: usize,
    pub message: String,
}

/// Serializable contents of a store.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoreSnapshot {
    pub fingerprint: Option<String>,
    pub derived: Vec<(ClauseId, Vec<Lit>)>,
    pub dseqs: Vec<DSequent>,
}

impl StoreSnapshot {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(fp) = &self.fingerprint {
            let _ = writeln!(out, "f {fp}");
        }
        for (id, lits) in &self.derived {
            let _ = write!(out, "r {}", id.0);
            for l in lits {
                let _ = write!(out, " {}", l.to_dimacs());
            }
            out.push_str(" 0\n");
        }
        for s in &self.dseqs {
            let _ = write!(out, "d {} q", s.target().0);
            for (v, b) in s.conditional().iter() {
                let _ = write!(out, " {}={}", v.index(), u8::from(b));
            }
            out.push_str(" h");
            for h in s.constraint() {
                let _ = write!(out, " {}", h.0);
            }
            let _ = writeln!(out, " tag {}", s.tag().0);
        }
        out
    }

    pub fn parse(text: &str) -> Result<StoreSnapshot, SnapshotError> {
        let mut snap = StoreSnapshot::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| SnapshotError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tok = trimmed.split_whitespace();
            match tok.next() {
                Some("f") => {
                    let fp = tok.next().ok_or_else(|| err("missing fingerprint".into()))?;
                    if snap.fingerprint.replace(fp.to_string()).is_some() {
                        return Err(err("duplicate fingerprint line".into()));
                    }
                }
                Some("r") => {
                    let id = parse_u32(tok.next(), "clause id").map_err(err)?;
                    let mut lits = Vec::new();
                    let mut closed = false;
                    for t in tok.by_ref() {
                        let v: i32 = t.parse().map_err(|_| err(format!("bad literal `{t}`")))?;
                        if v == 0 {
                            closed = true;
                            break;
                        }
                        lits.push(Lit::from_dimacs(v).expect("non-zero literal"));
                    }
                    if !closed {
                        return Err(err("derived clause not terminated by 0".into()));
                    }
                    snap.derived.push((ClauseId(id), lits));
                }
                Some("d") => {
                    let dseq = parse_dseq(&mut tok).map_err(err)?;
                    snap.dseqs.push(dseq);
                }
                Some(other) => return Err(err(format!("unknown record `{other}`"))),
                None => unreachable!(),
            }
            if let Some(extra) = tok.next() {
                return Err(err(format!("trailing token `{extra}`")));
            }
        }
        Ok(snap)
    }
}

fn parse_u32(tok: Option<&str>, what: &str) -> Result<u32, String> {
    let t = tok.ok_or_else(|| format!("missing {what}"))?;
    t.parse().map_err(|_| format!("bad {what} `{t}`"))
}

fn parse_dseq<'a>(tok: &mut impl Iterator<Item = &'a str>) -> Result<DSequent, String> {
    let target = ClauseId(parse_u32(tok.next(), "target id")?);
    if tok.next() != Some("q") {
        return Err("expected `q`".into());
    }
    let mut q = Assignment::new();
    let mut next = tok.next();
    while let Some(t) = next {
        if t == "h" {
            break;
        }
        let (v, b) = t.split_once('=').ok_or_else(|| format!("bad binding `{t}`"))?;
        let v: u32 = v.parse().map_err(|_| format!("bad variable `{v}`"))?;
        if v == 0 {
            return Err("variable 0".into());
        }
        let b = match b {
            "0" => false,
            "1" => true,
            _ => return Err(format!("bad bit `{b}`")),
        };
        q.assign(Var::new(v), b).map_err(|e| e.to_string())?;
        next = tok.next();
    }
    if next != Some("h") {
        return Err("expected `h`".into());
    }
    let mut h = BTreeSet::new();
    let tag = loop {
        match tok.next() {
            Some("tag") => break FormulaTag(parse_u32(tok.next(), "tag")?),
            Some(t) => {
                h.insert(ClauseId(t.parse().map_err(|_| format!("bad clause id `{t}`"))?));
            }
            None => return Err("expected `tag`".into()),
        }
    };
    DSequent::new(q, h, target, tag).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(q: &[(u32, bool)], h: &[u32], c: u32) -> DSequent {
        DSequent::new(
            Assignment::from_pairs(q.iter().copied()).unwrap(),
            h.iter().map(|&i| ClauseId(i)).collect(),
            ClauseId(c),
            FormulaTag(0),
        )
        .unwrap()
    }

    fn prob() -> EcnfProblem {
        EcnfProblem::from_dimacs(3, &[&[1, 2], &[1, 3], &[2]], &[1]).unwrap()
    }

    #[test]
    fn lookup_filters_by_subspace() {
        let p = prob();
        let mut st = DSequentStore::new(StoreConfig::default());
        assert!(st.admit(&ds(&[(2, true)], &[], 1), &p));
        assert!(!st.admit(&ds(&[(2, true)], &[], 1), &p));
        assert!(st.admit(&ds(&[(2, true), (3, false)], &[2], 1), &p));
        let q = Assignment::from_pairs([(2, true), (1, false)]).unwrap();
        assert_eq!(st.lookup(ClauseId(1), &q), vec![ds(&[(2, true)], &[], 1)]);
        assert!(st.lookup(ClauseId(2), &q).is_empty());
    }

    #[test]
    fn eviction_prefers_fragile() {
        let p = prob();
        let mut st = DSequentStore::new(StoreConfig {
            max_conditional: 1,
            capacity: 2,
        });
        assert!(!st.admit(&ds(&[(2, true), (3, true)], &[], 1), &p));
        st.admit(&ds(&[(2, true)], &[2], 1), &p); // fragile: C2 is an X-clause
        st.admit(&ds(&[(3, true)], &[], 1), &p);
        st.admit(&ds(&[(3, false)], &[], 1), &p);
        assert_eq!(st.len(), 2);
        assert!(st.iter().all(|s| s.is_robust(&p)));
        st.touch(&ds(&[(3, true)], &[], 1));
        st.admit(&ds(&[(2, false)], &[], 1), &p);
        let left: Vec<_> = st.iter().cloned().collect();
        assert_eq!(left, vec![ds(&[(3, true)], &[], 1), ds(&[(2, false)], &[], 1)]);
    }

    #[test]
    fn snapshot_round_trip() {
        let snap = StoreSnapshot {
            fingerprint: Some("abc".into()),
            derived: vec![(ClauseId(4), vec![Lit::pos(2), Lit::neg(3)]), (ClauseId(5), vec![])],
            dseqs: vec![ds(&[(1, false), (3, true)], &[2, 4], 1), ds(&[], &[], 2)],
        };
        let text = snap.render();
        assert!(text.contains("d 1 q 1=0 3=1 h 2 4 tag 0"));
        assert_eq!(StoreSnapshot::parse(&text).unwrap(), snap);
    }

    #[test]
    fn snapshot_errors() {
        assert_eq!(StoreSnapshot::parse("d 1 q h tag 0\nx\n").unwrap_err().line, 2);
        assert!(StoreSnapshot::parse("d 1 q 1=2 h tag 0").is_err());
        assert!(StoreSnapshot::parse("d 1 q h 1 tag 0").is_err());
        assert!(StoreSnapshot::parse("r 4 1 2").is_err());
        assert!(StoreSnapshot::parse("d 1 q 1=0 h").is_err());
    }
}
