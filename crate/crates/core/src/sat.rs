//! Small DPLL satisfiability check used for conflict analysis.
//!
//! Instances handed to it are residual formulas of a few dozen variables, so
//! plain clause scanning with unit propagation is enough.

use crate::cnf::{Assignment, Lit, Var};

/// A satisfying assignment over the variables of `clauses`, if one exists.
/// An empty clause makes the set unsatisfiable.
pub fn solve(clauses: &[Vec<Lit>]) -> Option<Assignment> {
    let mut model = Assignment::new();
    if search(clauses, &mut model) {
        Some(model)
    } else {
        None
    }
}

pub fn is_sat(clauses: &[Vec<Lit>]) -> bool {
    solve(clauses).is_some()
}

enum Status {
    Conflict,
    Satisfied,
    Open(Var),
}

fn propagate(clauses: &[Vec<Lit>], model: &mut Assignment, trail: &mut Vec<Var>) -> Status {
    loop {
        let mut changed = false;
        let mut branch = None;
        for c in clauses {
            let mut unassigned = None;
            let mut count = 0;
            let mut sat = false;
            for &l in c {
                match model.get(l.var()) {
                    Some(b) if l.eval(b) => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        count += 1;
                        unassigned = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            match (count, unassigned) {
                (0, _) => return Status::Conflict,
                (1, Some(l)) => {
                    model.assign(l.var(), l.satisfying_bit()).expect("unassigned variable");
                    trail.push(l.var());
                    changed = true;
                }
                (_, Some(l)) => {
                    if branch.is_none() {
                        branch = Some(l.var());
                    }
                }
                _ => unreachable!(),
            }
        }
        if !changed {
            return match branch {
                Some(v) => Status::Open(v),
                None => Status::Satisfied,
            };
        }
    }
}

fn search(clauses: &[Vec<Lit>], model: &mut Assignment) -> bool {
    let mut trail = Vec::new();
    let status = propagate(clauses, model, &mut trail);
    let var = match status {
        Status::Satisfied => return true,
        Status::Conflict => {
            undo(model, &trail);
            return false;
        }
        Status::Open(v) => v,
    };
    for bit in [false, true] {
        model.assign(var, bit).expect("unassigned variable");
        if search(clauses, model) {
            return true;
        }
        model.unassign(var);
    }
    undo(model, &trail);
    false
}

fn undo(model: &mut Assignment, trail: &[Var]) {
    for &v in trail {
        model.unassign(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(cs: &[&[i32]]) -> Vec<Vec<Lit>> {
        cs.iter()
            .map(|c| c.iter().map(|&l| Lit::from_dimacs(l).unwrap()).collect())
            .collect()
    }

    #[test]
    fn small_instances() {
        assert!(is_sat(&[]));
        assert!(!is_sat(&cnf(&[&[]])));
        assert!(!is_sat(&cnf(&[&[1], &[-1]])));
        let f = cnf(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2, 3], &[-3, 1]]);
        let m = solve(&f).unwrap();
        for c in &f {
            assert!(c.iter().any(|l| m.get(l.var()).is_some_and(|b| l.eval(b))));
        }
        assert!(!is_sat(&cnf(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]])));
    }
}
