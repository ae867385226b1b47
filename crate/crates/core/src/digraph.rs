//! Weighted digraphs and the matrices derived from them.
//!
//! An arc `(i, j, a_ij)` means agent `i` listens to agent `j`: it contributes
//! `a_ij` to row `i` of the Laplacian. Under this orientation a converging tree
//! has every arc pointing along a path toward its root, and the root has
//! out-degree zero.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

impl Arc {
    pub fn new(source: usize, target: usize, weight: f64) -> Self {
        Arc {
            source,
            target,
            weight,
        }
    }
}

impl From<(usize, usize, f64)> for Arc {
    fn from((source, target, weight): (usize, usize, f64)) -> Self {
        Arc::new(source, target, weight)
    }
}

/// A simple weighted digraph on nodes `0..n`.
///
/// Arcs are stored sorted by `(source, target)`, so two digraphs built from
/// permutations of the same arc list compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    out_neighbors: Vec<Vec<(usize, f64)>>,
}

impl Digraph {
    /// Validates and builds a digraph.
    pub fn new<I, A>(n: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = A>,
        A: Into<Arc>,
    {
        if n == 0 {
            return Err(Error::EmptyGraphOrder);
        }
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for arc in arcs {
            let arc = arc.into();
            let Arc {
                source,
                target,
                weight,
            } = arc;
            if source >= n || target >= n {
                return Err(Error::NodeOutOfRange {
                    from: source,
                    to: target,
                    n,
                });
            }
            if source == target {
                return Err(Error::SelfLoop(source));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::NonPositiveWeight {
                    from: source,
                    to: target,
                    weight,
                });
            }
            if !seen.insert((source, target)) {
                return Err(Error::DuplicateArc(source, target));
            }
            list.push(arc);
        }
        list.sort_by_key(|a| (a.source, a.target));

        let mut out_neighbors = vec![Vec::new(); n];
        for a in &list {
            out_neighbors[a.source].push((a.target, a.weight));
        }
        Ok(Digraph {
            n,
            arcs: list,
            out_neighbors,
        })
    }

    /// Digraph on `n` nodes with no arcs.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::<Arc>::new())
    }

    /// Digraph with every listed pair joined by a unit-weight arc.
    pub fn unit<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, pairs.into_iter().map(|(s, t)| Arc::new(s, t, 1.0)))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Targets and weights of the arcs leaving `node`, sorted by target.
    pub fn out_neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.out_neighbors[node]
    }

    /// Weighted out-degree of `node`.
    pub fn out_degree(&self, node: usize) -> f64 {
        self.out_neighbors[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn adjacency(&self) -> SquareMatrix {
        let mut a = SquareMatrix::zeros(self.n);
        for arc in &self.arcs {
            a[(arc.source, arc.target)] = arc.weight;
        }
        a
    }

    /// `L = D - A` with `D` the diagonal of weighted out-degrees.
    ///
    /// The diagonal is accumulated from the same row entries it cancels, so
    /// every row sums to zero up to rounding in the degree sum.
    pub fn laplacian(&self) -> SquareMatrix {
        let mut l = SquareMatrix::zeros(self.n);
        for i in 0..self.n {
            let mut degree = 0.0;
            for &(j, w) in &self.out_neighbors[i] {
                l[(i, j)] = -w;
                degree += w;
            }
            l[(i, i)] = degree;
        }
        l
    }

    /// Perron matrix `P = I - eps * L` of the discrete consensus iteration.
    pub fn perron_matrix(&self, eps: f64) -> Result<SquareMatrix> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::NonPositiveStepSize(eps));
        }
        let mut p = SquareMatrix::identity(self.n);
        for i in 0..self.n {
            for &(j, w) in &self.out_neighbors[i] {
                p[(i, j)] = eps * w;
            }
            p[(i, i)] = 1.0 - eps * self.out_degree(i);
        }
        Ok(p)
    }

    /// Largest weighted out-degree, i.e. the largest diagonal entry of `L`.
    pub fn max_out_degree(&self) -> f64 {
        (0..self.n).map(|i| self.out_degree(i)).fold(0.0, f64::max)
    }
}
