//! Properties of the normalized matrix of maximal in-forests, checked against
//! the eigenprojector and the structure of the graph.

use consensus_core::forest::DEFAULT_ENUMERATION_CAP;
use consensus_core::generate::{all_unit_digraphs, random_digraph, seeded_rng};
use consensus_core::*;
use proptest::prelude::*;

fn arb_small(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n, any::<u64>(), 0.0..0.8f64)
        .prop_map(|(n, seed, p)| random_digraph(&mut seeded_rng(seed), n, p, 0.1..=2.0))
}

fn summary(g: &Digraph) -> ForestSummary {
    maximal_forest_matrix(g, DEFAULT_ENUMERATION_CAP).unwrap()
}

#[test]
fn dimension_agrees_with_sink_count_up_to_four_nodes() {
    for n in 1..=4 {
        for (mask, g) in all_unit_digraphs(n) {
            let s = summary(&g);
            assert_eq!(s.d, in_forest_dimension(&g), "n = {n}, mask = {mask}");
            // no forest with fewer trees exists
            if s.d > 1 {
                assert!(enumerate_in_forests(&g, s.d - 1, DEFAULT_ENUMERATION_CAP)
                    .unwrap()
                    .is_empty());
            }
            let listed = enumerate_in_forests(&g, s.d, DEFAULT_ENUMERATION_CAP).unwrap();
            assert_eq!(listed.len(), s.forest_count);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn j_matrix_is_stochastic_projector(g in arb_small(6)) {
        let s = summary(&g);
        let j = &s.j_matrix;
        let l = g.laplacian();
        prop_assert!(s.total_weight > 0.0);
        for r in j.row_sums() {
            prop_assert!((r - 1.0).abs() <= 1e-12);
        }
        for row in j.to_rows() {
            for v in row {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        prop_assert!(j.mul(j).max_abs_diff(j) <= 1e-9);
        prop_assert!(l.mul(j).max_abs() <= 1e-9);
        prop_assert!(j.mul(&l).max_abs() <= 1e-9);
        prop_assert_eq!(numerical_rank(j, 1e-10).unwrap(), s.d);
    }

    #[test]
    fn forest_and_eigenprojector_agree(g in arb_small(6)) {
        let s = summary(&g);
        let p = eigenprojector_at_zero(&g).unwrap();
        prop_assert_eq!(p.d, s.d);
        prop_assert!(p.matrix.max_abs_diff(&s.j_matrix) <= 1e-9);
    }

    #[test]
    fn positive_entries_are_forest_memberships(g in arb_small(5)) {
        let s = summary(&g);
        let n = g.order();
        let forests = enumerate_in_forests(&g, s.d, DEFAULT_ENUMERATION_CAP).unwrap();
        let mut member = vec![vec![false; n]; n];
        for f in &forests {
            let next = |v: usize| f.arcs.iter().find(|a| a.source == v).map(|a| a.target);
            for i in 0..n {
                let mut v = i;
                while let Some(t) = next(v) {
                    v = t;
                }
                member[i][v] = true;
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(s.j_matrix[(i, j)] > 0.0, member[i][j]);
            }
        }
        // columns of non-roots vanish
        for j in 0..n {
            if !forests.iter().any(|f| f.roots.contains(&j)) {
                prop_assert!((0..n).all(|i| s.j_matrix[(i, j)] == 0.0));
            }
        }
    }

    #[test]
    fn scaling_weights_leaves_j_unchanged(g in arb_small(6), c in 0.05..20.0f64) {
        let scaled = Digraph::new(
            g.order(),
            g.arcs().iter().map(|a| Arc::new(a.source, a.target, a.weight * c)),
        )
        .unwrap();
        prop_assert!(summary(&scaled).j_matrix.max_abs_diff(&summary(&g).j_matrix) <= 1e-12);
    }
}
