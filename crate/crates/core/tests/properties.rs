use consensus_core::generate::{random_digraph, seeded_rng};
use consensus_core::scc::is_strongly_connected;
use consensus_core::spectral::{singular_values, within_gershgorin};
use consensus_core::*;
use proptest::prelude::*;

fn arb_digraph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n, any::<u64>(), 0.0..1.0f64)
        .prop_map(|(n, seed, p)| random_digraph(&mut seeded_rng(seed), n, p, 0.1..=2.0))
}

/// Reachability closure by Floyd-Warshall; the oracle for the component tests.
fn reach(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.order();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for a in g.arcs() {
        r[a.source][a.target] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_rows_sum_to_zero(g in arb_digraph(12)) {
        for s in g.laplacian().row_sums() {
            prop_assert!(s.abs() <= 1e-12);
        }
    }

    #[test]
    fn perron_plus_scaled_laplacian_is_identity(g in arb_digraph(10), eps in 0.01..3.0f64) {
        let p = g.perron_matrix(eps).unwrap();
        let l = g.laplacian();
        let n = g.order();
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((p[(i, j)] + eps * l[(i, j)] - id).abs() <= 1e-12);
            }
        }
        for s in p.row_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_ignores_arc_order(g in arb_digraph(8), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut arcs = g.arcs().to_vec();
        arcs.shuffle(&mut seeded_rng(seed));
        let h = Digraph::new(g.order(), arcs).unwrap();
        prop_assert_eq!(h.laplacian(), g.laplacian());
        prop_assert_eq!(h, g);
    }

    #[test]
    fn edge_list_round_trip(g in arb_digraph(10)) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn components_match_mutual_reachability(g in arb_digraph(9)) {
        let r = reach(&g);
        let scc = scc_decompose(&g);
        let n = g.order();
        for i in 0..n {
            for j in 0..n {
                let same = scc.component_of[i] == scc.component_of[j];
                prop_assert_eq!(same, r[i][j] && r[j][i]);
            }
        }
        // a component is a sink iff it reaches nothing outside itself
        for (c, comp) in scc.components.iter().enumerate() {
            let v = comp[0];
            let closed = (0..n).all(|u| !r[v][u] || scc.component_of[u] == c);
            prop_assert_eq!(scc.sink_flags[c], closed);
        }
        // condensation is acyclic: component ids admit a topological order
        let mut indeg = vec![0; scc.count()];
        for &(_, b) in &scc.condensation_arcs {
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..scc.count()).filter(|&c| indeg[c] == 0).collect();
        let mut seen = 0;
        while let Some(c) = queue.pop() {
            seen += 1;
            for &(a, b) in &scc.condensation_arcs {
                if a == c {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        queue.push(b);
                    }
                }
            }
        }
        prop_assert_eq!(seen, scc.count());
    }

    #[test]
    fn rank_report_invariants(g in arb_digraph(9)) {
        let r = rank_report(&g);
        prop_assert!(1 <= r.d && r.d <= r.c && r.c <= r.n);
        prop_assert_eq!(r.rank_corrected, r.n - r.d);
        prop_assert_eq!(r.lemma2_formula_valid, r.d == r.c);
        prop_assert_eq!(r.lemma2_formula_valid, r.sccs_pairwise_disconnected);
        // some node reachable from every node
        let reach = reach(&g);
        let oracle = (0..r.n).any(|t| (0..r.n).all(|s| reach[s][t]));
        prop_assert_eq!(has_spanning_converging_tree(&g), oracle);
        if is_strongly_connected(&g) {
            prop_assert_eq!((r.d, r.rank_corrected), (1, r.n - 1));
        }
    }

    #[test]
    fn spectrum_lies_in_gershgorin_disks(g in arb_digraph(10)) {
        let l = g.laplacian();
        let scale = l.max_abs().max(1.0);
        for z in eigenvalues(&l).unwrap() {
            prop_assert!(within_gershgorin(&l, z, 1e-8 * scale));
            prop_assert!(z.re >= -1e-8 * scale);
        }
    }

    #[test]
    fn eigenvalues_make_shifted_matrix_singular(g in arb_digraph(8)) {
        // the smallest singular value of L - lambda I for real eigenvalues,
        // and of the real 2n x 2n embedding for complex ones
        let l = g.laplacian();
        let n = g.order();
        let scale = l.max_abs().max(1.0);
        for z in eigenvalues(&l).unwrap() {
            let mut big = SquareMatrix::zeros(2 * n);
            for i in 0..n {
                for j in 0..n {
                    let re = l[(i, j)] - if i == j { z.re } else { 0.0 };
                    let im = if i == j { -z.im } else { 0.0 };
                    big[(i, j)] = re;
                    big[(n + i, n + j)] = re;
                    big[(i, n + j)] = -im;
                    big[(n + i, j)] = im;
                }
            }
            let s = singular_values(&big).unwrap();
            prop_assert!(*s.last().unwrap() <= 1e-6 * scale, "{z} {s:?}");
        }
    }

    #[test]
    fn eigenvalue_count_and_order(g in arb_digraph(10)) {
        let ev = eigenvalues(&g.laplacian()).unwrap();
        prop_assert_eq!(ev.len(), g.order());
        for w in ev.windows(2) {
            prop_assert!((w[0].re, w[0].im) <= (w[1].re, w[1].im));
        }
    }
}
