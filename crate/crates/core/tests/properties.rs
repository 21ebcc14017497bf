mod common;

use common::*;
use proptest::prelude::*;
use spinvar::problems::{parse_graph, Edge};
use spinvar::Graph;

fn check(c: Check) -> std::result::Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn circuits_preserve_norm(n in 2usize..=6, reps in 1usize..=3, seed in any::<u64>()) {
        check(norm_preserved(n, reps, seed))?;
    }

    #[test]
    fn hermitian_expectations_are_real(o in observable(), seed in any::<u64>()) {
        check(expectation_real(&o, seed))?;
    }

    #[test]
    fn matvec_matches_dense_matrix(o in observable(), seed in any::<u64>()) {
        check(matvec_matches_dense(&o, seed))?;
    }

    #[test]
    fn pauli_rotation_matches_matrix_exponential(label in pauli_label(), angle in -7.0f64..7.0, seed in any::<u64>()) {
        check(rotation_matches_exponential(&label, angle, seed))?;
    }

    #[test]
    fn shift_rule_matches_finite_differences(n in 2usize..=4, reps in 1usize..=2, seed in any::<u64>()) {
        check(shift_matches_finite_difference(n, reps, seed))?;
    }

    #[test]
    fn lanczos_agrees_with_dense(o in observable(), k in 1usize..=3, seed in any::<u64>()) {
        check(lanczos_matches_dense(&o, k, seed))?;
    }

    #[test]
    fn variational_bound_holds(n in 4usize..=6, alpha in -1.0f64..1.0, seed in any::<u64>()) {
        check(variational_bound(n, alpha, seed))?;
    }

    #[test]
    fn maxcut_diagonal_is_minus_cut(n in 2usize..=7, seed in any::<u64>()) {
        check(maxcut_diagonal(n, seed))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn noisy_runs_are_bit_reproducible(seed in any::<u64>()) {
        check(reproducible(seed))?;
    }
}

#[test]
fn edges_round_trip_through_text() {
    let g = Graph::new(3, vec![Edge { u: 0, v: 1, w: 1.5 }, Edge { u: 1, v: 2, w: 1.0 }]).unwrap();
    let back = parse_graph(&g.to_edge_list()).unwrap();
    assert_eq!(back.edges(), g.edges());
}
