#![allow(dead_code)]

use qe_core::{EcnfProblem, Lit, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a random instance.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub vars: (u32, u32),
    pub clauses: (usize, usize),
    pub max_len: usize,
}

pub const FUZZ: Shape = Shape {
    vars: (6, 14),
    clauses: (3, 30),
    max_len: 4,
};

/// Deterministic instance for `seed`. Clause widths are 1..=max_len over
/// distinct variables, so no tautologies; at least one variable is quantified.
pub fn random_problem(seed: u64, shape: Shape) -> EcnfProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(shape.vars.0..=shape.vars.1);
    let m = rng.random_range(shape.clauses.0..=shape.clauses.1);
    let mut order: Vec<u32> = (1..=n).collect();
    order.shuffle(&mut rng);
    let k = rng.random_range(1..n) as usize;
    let x: Vec<u32> = order[..k].to_vec();
    let mut clauses: Vec<Vec<Lit>> = Vec::with_capacity(m);
    for _ in 0..m {
        let len = rng.random_range(1..=shape.max_len.min(n as usize));
        let mut vs: Vec<u32> = (1..=n).collect();
        vs.shuffle(&mut rng);
        clauses.push(
            vs[..len]
                .iter()
                .map(|&v| Lit::new(Var::new(v), rng.random_bool(0.5)))
                .collect(),
        );
    }
    let mut f = qe_core::CnfFormula::new(n);
    for c in clauses {
        f.add_clause(c).expect("distinct variables");
    }
    EcnfProblem::new(f, x.into_iter().map(Var::new)).expect("in range")
}

pub fn assignment(pairs: &[(u32, bool)]) -> qe_core::Assignment {
    qe_core::Assignment::from_pairs(pairs.iter().copied()).unwrap()
}

/// Instances small enough for the member-formula audit.
pub const AUDIT: Shape = Shape {
    vars: (4, 10),
    clauses: (3, 20),
    max_len: 3,
};

/// Seeds of `AUDIT` whose joins close an order cycle and need repair.
pub const REPAIR_SEEDS: [u64; 6] = [7462, 49682, 71280, 114506, 124421, 142847];
