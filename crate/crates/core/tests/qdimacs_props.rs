use proptest::prelude::*;
use qe_core::qdimacs::{fingerprint, parse_qdimacs, write_qdimacs};

/// QDIMACS text with distinct variables per clause.
fn qdimacs_text() -> impl Strategy<Value = String> {
    (2u32..=10).prop_flat_map(|n| {
        let clause = prop::collection::btree_map(1..=n, any::<bool>(), 1..=4);
        (
            Just(n),
            prop::collection::btree_set(1..=n, 0..=n as usize),
            prop::collection::vec(clause, 0..12),
        )
            .prop_map(|(n, x, clauses)| {
                let mut t = format!("c generated\np cnf {n} {}\n", clauses.len());
                if !x.is_empty() {
                    t.push('e');
                    for v in x {
                        t.push_str(&format!(" {v}"));
                    }
                    t.push_str(" 0\n");
                }
                for c in clauses {
                    for (v, pos) in c {
                        t.push_str(&format!("{} ", if pos { v as i32 } else { -(v as i32) }));
                    }
                    t.push_str("0\n");
                }
                t
            })
    })
}

proptest! {
    #[test]
    fn emit_then_parse_round_trips(text in qdimacs_text()) {
        let p = parse_qdimacs(&text).unwrap();
        let emitted = write_qdimacs(&p);
        let q = parse_qdimacs(&emitted).unwrap();
        prop_assert_eq!(q.num_vars(), p.num_vars());
        prop_assert_eq!(q.x_vars(), p.x_vars());
        prop_assert_eq!(q.formula().canonical_clauses(), p.formula().canonical_clauses());
        prop_assert_eq!(write_qdimacs(&q), emitted);
        prop_assert_eq!(fingerprint(&q), fingerprint(&p));
    }
}
