//! Exhaustive enumeration of spanning converging forests (in-forests) and the
//! normalized matrix of maximal in-forests.
//!
//! This is the combinatorial ground truth the numerical routines are checked
//! against, so it favours plain exhaustiveness over speed: every node either
//! keeps one of its out-arcs or none, and each such choice vector is kept if it
//! is acyclic.

use crate::digraph::{Arc, Digraph};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Upper bound on the size of the candidate space `prod_i (outdeg(i) + 1)`.
pub const MAX_CANDIDATES: u128 = 1 << 26;

/// A spanning converging forest.
#[derive(Debug, Clone, PartialEq)]
pub struct InForest {
    /// Chosen arcs, sorted by source.
    pub arcs: Vec<Arc>,
    /// Nodes without a chosen out-arc, sorted.
    pub roots: Vec<usize>,
    /// Product of the chosen arc weights (1 for the empty forest).
    pub weight: f64,
}

impl InForest {
    pub fn tree_count(&self) -> usize {
        self.roots.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestSummary {
    /// In-forest dimension; maximal in-forests have `n - d` arcs.
    pub d: usize,
    pub total_weight: f64,
    /// `j_matrix[(i, j)]`: weight share of maximal in-forests in which node `i`
    /// lies in the tree rooted at `j`.
    pub j_matrix: SquareMatrix,
    pub forest_count: usize,
}

fn check_size(g: &Digraph, cap: usize) -> Result<()> {
    let n = g.order();
    if n > cap {
        return Err(Error::GraphTooLargeForEnumeration(format!(
            "{n} nodes exceeds the cap of {cap}"
        )));
    }
    let mut candidates: u128 = 1;
    for v in 0..n {
        candidates = candidates.saturating_mul(g.out_neighbors(v).len() as u128 + 1);
    }
    if candidates > MAX_CANDIDATES {
        return Err(Error::GraphTooLargeForEnumeration(format!(
            "{candidates} candidate arc subsets exceeds the budget of {MAX_CANDIDATES}"
        )));
    }
    Ok(())
}

/// Calls `visit(parent, weight)` for every spanning in-forest, where
/// `parent[v]` is the head of the arc chosen at `v`.
fn for_each_forest<F>(g: &Digraph, mut visit: F)
where
    F: FnMut(&[Option<usize>], f64),
{
    let n = g.order();
    // choice[v] == 0 means "no arc", k > 0 means out_neighbors(v)[k - 1].
    let mut choice = vec![0usize; n];
    let mut parent = vec![None; n];
    let mut state = vec![0u8; n];

    loop {
        let mut weight = 1.0;
        for v in 0..n {
            parent[v] = match choice[v] {
                0 => None,
                k => {
                    let (t, w) = g.out_neighbors(v)[k - 1];
                    weight *= w;
                    Some(t)
                }
            };
        }
        if is_acyclic(&parent, &mut state) {
            visit(&parent, weight);
        }

        // Advance the odometer; node 0 is the least significant digit.
        let mut v = 0;
        loop {
            if v == n {
                return;
            }
            choice[v] += 1;
            if choice[v] <= g.out_neighbors(v).len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

/// Follows each node's out-arc chain; revisiting a node of the current walk
/// means a cycle.
fn is_acyclic(parent: &[Option<usize>], state: &mut [u8]) -> bool {
    const FRESH: u8 = 0;
    const ON_WALK: u8 = 1;
    const DONE: u8 = 2;
    state.fill(FRESH);
    for start in 0..parent.len() {
        let mut v = start;
        while state[v] == FRESH {
            state[v] = ON_WALK;
            match parent[v] {
                Some(next) => v = next,
                None => break,
            }
        }
        if state[v] == ON_WALK && parent[v].is_some() {
            return false;
        }
        let mut v = start;
        while state[v] == ON_WALK {
            state[v] = DONE;
            match parent[v] {
                Some(next) => v = next,
                None => break,
            }
        }
    }
    true
}

fn root_of(parent: &[Option<usize>], mut v: usize) -> usize {
    while let Some(next) = parent[v] {
        v = next;
    }
    v
}

/// All spanning in-forests with exactly `num_trees` trees, ordered
/// lexicographically by their sorted arc lists.
pub fn enumerate_in_forests(g: &Digraph, num_trees: usize, cap: usize) -> Result<Vec<InForest>> {
    let n = g.order();
    if num_trees == 0 || num_trees > n {
        return Err(Error::InvalidParameter(format!(
            "number of trees must be in 1..={n}, got {num_trees}"
        )));
    }
    check_size(g, cap)?;

    let mut forests = Vec::new();
    for_each_forest(g, |parent, weight| {
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != num_trees {
            return;
        }
        let arcs = (0..n)
            .filter_map(|v| {
                parent[v].map(|t| {
                    let w = g
                        .out_neighbors(v)
                        .iter()
                        .find(|&&(u, _)| u == t)
                        .map(|&(_, w)| w)
                        .unwrap();
                    Arc::new(v, t, w)
                })
            })
            .collect();
        forests.push(InForest {
            arcs,
            roots,
            weight,
        });
    });
    forests.sort_by(|a, b| {
        let ka = a.arcs.iter().map(|x| (x.source, x.target));
        let kb = b.arcs.iter().map(|x| (x.source, x.target));
        ka.cmp(kb)
    });
    Ok(forests)
}

/// Builds the normalized matrix of maximal in-forests by brute force.
pub fn maximal_forest_matrix(g: &Digraph, cap: usize) -> Result<ForestSummary> {
    check_size(g, cap)?;
    let n = g.order();

    // Running accumulation over forests with the fewest trees seen so far.
    let mut best = usize::MAX;
    let mut total = 0.0;
    let mut count = 0usize;
    let mut acc = vec![0.0; n * n];

    for_each_forest(g, |parent, weight| {
        let trees = parent.iter().filter(|p| p.is_none()).count();
        if trees > best {
            return;
        }
        if trees < best {
            best = trees;
            total = 0.0;
            count = 0;
            acc.fill(0.0);
        }
        total += weight;
        count += 1;
        for i in 0..n {
            acc[i * n + root_of(parent, i)] += weight;
        }
    });

    let mut j_matrix = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            j_matrix[(i, j)] = acc[i * n + j] / total;
        }
    }
    Ok(ForestSummary {
        d: best,
        total_weight: total,
        j_matrix,
        forest_count: count,
    })
}
