use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qe_core::{solve, CnfFormula, EcnfProblem, Exec, Lit, Oracle, SolveOptions, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, n: u32, m: usize) -> EcnfProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = CnfFormula::new(n);
    let mut vars: Vec<u32> = (1..=n).collect();
    for _ in 0..m {
        vars.shuffle(&mut rng);
        let width = rng.random_range(2..=3);
        let lits: Vec<Lit> = vars[..width]
            .iter()
            .map(|&v| Lit::new(Var::new(v), rng.random_bool(0.5)))
            .collect();
        f.add_clause(lits).unwrap();
    }
    EcnfProblem::new(f, (1..=n * 2 / 3).map(Var::new)).unwrap()
}

fn corpus(n: u32) -> Vec<EcnfProblem> {
    (0..16).map(|s| instance(s, n, (n * 2) as usize)).collect()
}

fn reuse(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for n in [12u32, 18] {
        let probs = corpus(n);
        for (name, on) in [("reuse", true), ("no_reuse", false)] {
            let opts = SolveOptions {
                reuse: on,
                ..SolveOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(name, n), &probs, |b, ps| {
                b.iter(|| {
                    for p in ps {
                        black_box(solve(black_box(p), &opts, None).unwrap());
                    }
                })
            });
        }
    }
    g.finish();
}

/// Solving followed by oracle verification, the verification sweep in each
/// execution mode.
fn solve_and_verify(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_verify");
    g.sample_size(10);
    let probs = corpus(18);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let o = Oracle::new(24, exec);
        g.bench_with_input(BenchmarkId::new(name, 18), &probs, |b, ps| {
            b.iter(|| {
                for p in ps {
                    let r = solve(p, &SolveOptions::default(), None).unwrap();
                    assert!(o.equiv_quantified(&r.f_star, p).unwrap());
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, reuse, solve_and_verify);
criterion_main!(benches);
