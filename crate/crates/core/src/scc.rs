//! Strongly connected components, the in-forest dimension and the rank of `L`.

use std::collections::BTreeSet;

use crate::digraph::Digraph;

/// Partition of the nodes into strongly connected components.
///
/// Components are numbered by their smallest node, and each component's node
/// list is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub component_of: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    /// Arcs between distinct components, deduplicated and sorted.
    pub condensation_arcs: Vec<(usize, usize)>,
    /// `true` for components with no outgoing condensation arc.
    pub sink_flags: Vec<bool>,
}

impl SccDecomposition {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn sink_count(&self) -> usize {
        self.sink_flags.iter().filter(|&&s| s).count()
    }

    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        self.sink_flags
            .iter()
            .enumerate()
            .filter_map(|(c, &s)| s.then_some(c))
    }
}

/// Tarjan's algorithm, iterative so that deep graphs cannot overflow the stack.
fn tarjan(g: &Digraph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.order();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut out = Vec::new();
    // (node, position of the next out-neighbor to visit)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let nbrs = g.out_neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos].0;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }

            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
    }
    out
}

pub fn scc_decompose(g: &Digraph) -> SccDecomposition {
    let mut components = tarjan(g);
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_unstable_by_key(|c| c[0]);

    let mut component_of = vec![0; g.order()];
    for (id, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = id;
        }
    }

    let condensation: BTreeSet<(usize, usize)> = g
        .arcs()
        .iter()
        .map(|a| (component_of[a.source], component_of[a.target]))
        .filter(|(a, b)| a != b)
        .collect();

    let mut sink_flags = vec![true; components.len()];
    for &(from, _) in &condensation {
        sink_flags[from] = false;
    }

    SccDecomposition {
        component_of,
        components,
        condensation_arcs: condensation.into_iter().collect(),
        sink_flags,
    }
}

/// Minimum number of trees in a spanning converging forest, computed as the
/// number of sink components.
pub fn in_forest_dimension(g: &Digraph) -> usize {
    scc_decompose(g).sink_count()
}

/// Whether some node is reachable from every node.
///
/// In the condensation every component reaches a sink, so a node reachable
/// from everywhere exists exactly when there is a single sink component.
pub fn has_spanning_converging_tree(g: &Digraph) -> bool {
    in_forest_dimension(g) == 1
}

pub fn is_strongly_connected(g: &Digraph) -> bool {
    scc_decompose(g).count() == 1
}

/// Rank of the Laplacian from the graph structure alone, next to the value the
/// uncorrected `n - c` formula would give.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankReport {
    pub n: usize,
    /// Number of strongly connected components.
    pub c: usize,
    pub num_sink_sccs: usize,
    /// In-forest dimension.
    pub d: usize,
    /// `n - d`, the rank of `L` for every digraph.
    pub rank_corrected: usize,
    /// `n - c`, correct only when no arcs join distinct components.
    pub rank_lemma2_original: usize,
    pub lemma2_formula_valid: bool,
    /// No arcs between distinct components.
    pub sccs_pairwise_disconnected: bool,
}

pub fn rank_report(g: &Digraph) -> RankReport {
    rank_report_from(g.order(), &scc_decompose(g))
}

pub fn rank_report_from(n: usize, scc: &SccDecomposition) -> RankReport {
    let c = scc.count();
    let d = scc.sink_count();
    RankReport {
        n,
        c,
        num_sink_sccs: d,
        d,
        rank_corrected: n - d,
        rank_lemma2_original: n - c,
        lemma2_formula_valid: d == c,
        sccs_pairwise_disconnected: scc.condensation_arcs.is_empty(),
    }
}
