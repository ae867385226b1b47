//! Graph families used by the verification runs: every labeled unit-weight
//! digraph on a few nodes, and seeded random weighted digraphs.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{Arc, Digraph};

pub type GraphRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> GraphRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ordered pairs `(i, j)`, `i != j`, in lexicographic order.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Number of labeled simple digraphs without self-loops on `n` nodes.
pub fn unit_digraph_count(n: usize) -> u64 {
    1u64 << (n * (n - 1))
}

/// The unit-weight digraph whose arc set is encoded by `mask` over
/// [`ordered_pairs`].
pub fn unit_digraph(n: usize, mask: u64) -> Digraph {
    let pairs = ordered_pairs(n);
    Digraph::unit(
        n,
        pairs
            .into_iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, p)| p),
    )
    .expect("pairs are distinct and in range")
}

/// Every labeled unit-weight digraph on `n` nodes, tagged with its mask.
/// Only sensible for `n <= 5`.
pub fn all_unit_digraphs(n: usize) -> impl Iterator<Item = (u64, Digraph)> {
    assert!(
        (1..=5).contains(&n),
        "exhaustive enumeration supports 1..=5 nodes"
    );
    (0..unit_digraph_count(n)).map(move |mask| (mask, unit_digraph(n, mask)))
}

/// Each ordered pair becomes an arc with probability `arc_prob`, weights
/// uniform in `weights`.
pub fn random_digraph<R: Rng>(
    rng: &mut R,
    n: usize,
    arc_prob: f64,
    weights: RangeInclusive<f64>,
) -> Digraph {
    let mut arcs = Vec::new();
    for (s, t) in ordered_pairs(n) {
        if rng.random_bool(arc_prob) {
            arcs.push(Arc::new(s, t, rng.random_range(weights.clone())));
        }
    }
    Digraph::new(n, arcs).expect("generated arcs are valid")
}

/// A random Hamiltonian cycle plus extra arcs with probability `extra_prob`.
pub fn random_strongly_connected<R: Rng>(
    rng: &mut R,
    n: usize,
    extra_prob: f64,
    weights: RangeInclusive<f64>,
) -> Digraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut used = vec![false; n * n];
    let mut arcs = Vec::new();
    if n > 1 {
        for k in 0..n {
            let (s, t) = (order[k], order[(k + 1) % n]);
            used[s * n + t] = true;
            arcs.push(Arc::new(s, t, rng.random_range(weights.clone())));
        }
    }
    for (s, t) in ordered_pairs(n) {
        if !used[s * n + t] && rng.random_bool(extra_prob) {
            arcs.push(Arc::new(s, t, rng.random_range(weights.clone())));
        }
    }
    Digraph::new(n, arcs).expect("generated arcs are valid")
}

/// Vector with entries uniform in `range`.
pub fn random_state<R: Rng>(rng: &mut R, n: usize, range: RangeInclusive<f64>) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(range.clone())).collect()
}
