mod common;

use std::collections::BTreeSet;

use common::{random_problem, Shape};
use proptest::prelude::*;
use qe_core::oracle::is_z_boundary_point;
use qe_core::{Assignment, ClauseId, EcnfProblem, Oracle, OracleError, Var};

const SMALL: Shape = Shape {
    vars: (3, 8),
    clauses: (2, 10),
    max_len: 3,
};

fn point(n: u32, bits: u64) -> Assignment {
    Assignment::from_pairs((1..=n).map(|v| (v, bits >> (v - 1) & 1 == 1))).unwrap()
}

fn partial(prob: &EcnfProblem, mask: u64, bits: u64) -> Assignment {
    Assignment::from_pairs(
        (1..=prob.num_vars())
            .filter(|v| mask >> (v - 1) & 1 == 1)
            .map(|v| (v, bits >> (v - 1) & 1 == 1)),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// A point removable in the whole formula stays removable in any
    /// subspace containing it.
    #[test]
    fn removability_is_local(seed in any::<u64>(), mask in any::<u64>(), bits in any::<u64>()) {
        let o = Oracle::default();
        let prob = random_problem(seed, SMALL);
        let n = prob.num_vars();
        let q = partial(&prob, mask, bits);
        let x: BTreeSet<Var> = prob.x_vars().clone();
        let sub = prob.with_formula(prob.formula().cofactor(&q));
        let x_sub: BTreeSet<Var> = x.iter().copied().filter(|v| !q.contains_var(*v)).collect();
        for b in 0..1u64 << n {
            let p = point(n, b);
            if !q.is_subset_of(&p) {
                continue;
            }
            let Ok(true) = o.is_removable(&p, &prob, &x) else { continue };
            match o.is_removable(&p, &sub, &x_sub) {
                Ok(local) => prop_assert!(local),
                Err(OracleError::NotBoundaryPoint) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    /// Redundant sets grow by clauses redundant in what is left.
    #[test]
    fn redundancy_is_incremental(seed in any::<u64>(), pick in any::<u64>()) {
        let o = Oracle::default();
        let prob = random_problem(seed, SMALL);
        let xs = prob.x_clause_ids();
        prop_assume!(xs.len() >= 2);
        let c = xs[(pick % xs.len() as u64) as usize];
        let h: BTreeSet<ClauseId> = xs.iter().enumerate()
            .filter(|&(i, &id)| id != c && pick >> (8 + i) & 1 == 1)
            .map(|(_, &id)| id)
            .collect();
        let empty = Assignment::new();
        prop_assume!(o.is_redundant_set(&h, &prob, &empty).unwrap().redundant);
        let rest = prob.with_formula(prob.formula().without(&h));
        prop_assume!(o.is_redundant_set(&BTreeSet::from([c]), &rest, &empty).unwrap().redundant);
        let mut both = h.clone();
        both.insert(c);
        prop_assert!(o.is_redundant_set(&both, &prob, &empty).unwrap().redundant);
    }

    /// Redundancy in a subspace implies virtual redundancy in every
    /// smaller subspace.
    #[test]
    fn subspace_redundancy_is_inherited(seed in any::<u64>(), mask in any::<u64>(), bits in any::<u64>(), extra in any::<u64>()) {
        let o = Oracle::default();
        let prob = random_problem(seed, SMALL);
        let q = partial(&prob, mask & extra, bits);
        let r = partial(&prob, mask | extra, bits);
        prop_assume!(q != r);
        for c in prob.x_clause_ids() {
            if o.is_redundant_set(&BTreeSet::from([c]), &prob, &q).unwrap().redundant {
                prop_assert!(o.is_virtually_redundant(c, &prob, &r).unwrap());
            }
        }
    }

    /// Every satisfiable formula with a clause has a single-variable
    /// boundary point next to one of its models.
    #[test]
    fn boundary_point_exists(seed in any::<u64>()) {
        let o = Oracle::default();
        let prob = random_problem(seed, SMALL);
        let f = prob.formula();
        let satisfiable = (0..1u64 << prob.num_vars()).any(|b| f.eval(&point(prob.num_vars(), b)) == Some(true));
        match o.single_flip_boundary_point(f).unwrap() {
            Some((s, v)) => {
                prop_assert!(satisfiable);
                prop_assert_eq!(f.eval(&s), Some(true));
                let mut flipped = s.without(v);
                flipped.assign(v, !s.get(v).unwrap()).unwrap();
                prop_assert!(is_z_boundary_point(&flipped, f, &BTreeSet::from([v])).unwrap());
            }
            None => prop_assert!(!satisfiable),
        }
    }
}

/// Dropping the clause keeps the quantified formula but not the formula.
#[test]
fn quantified_redundancy_is_weaker() {
    let o = Oracle::default();
    let prob = EcnfProblem::from_dimacs(2, &[&[1, 2]], &[1]).unwrap();
    let g = BTreeSet::from([ClauseId(1)]);
    assert!(o.is_redundant_set(&g, &prob, &Assignment::new()).unwrap().redundant);
    let empty = qe_core::CnfFormula::new(2);
    assert!(o.counterexample(&empty, &prob).unwrap().is_none());
    assert_ne!(prob.formula().eval(&point(2, 0)), empty.eval(&point(2, 0)));
}

#[test]
fn limit_is_enforced() {
    let o = Oracle::new(10, qe_core::Exec::Sequential);
    let prob = random_problem(
        1,
        Shape {
            vars: (12, 12),
            clauses: (3, 3),
            max_len: 2,
        },
    );
    assert!(matches!(
        o.qe_by_enumeration(&prob),
        Err(OracleError::TooLarge { vars: 12, .. })
    ));
}
