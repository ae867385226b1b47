//! Analysis of weighted digraph Laplacians and the consensus dynamics they
//! drive.
//!
//! The crate computes the rank of `L = D - A` from the in-forest dimension
//! (the number of sink strongly connected components), the Laplacian
//! spectrum, and the normalized matrix of maximal in-forests `J` in three
//! independent ways: exhaustive forest enumeration, the eigenprojector of `L`
//! at zero, and the long-run limit of the Perron matrix `P = I - eps L`.

pub mod digraph;
pub mod dynamics;
pub mod edgelist;
pub mod error;
pub mod forest;
pub mod generate;
pub mod linalg;
pub mod matrix;
pub mod scc;
pub mod spectral;

pub use digraph::{Arc, Digraph};
pub use dynamics::{
    cesaro_limit, perron_properties, power_limit, simulate_continuous, simulate_discrete,
    LongRunResult, Mode, PerronProperties, PowerLimit, Trajectory,
};
pub use edgelist::{parse_edge_list, write_edge_list, EdgeListError};
pub use error::{Error, Result};
pub use forest::{enumerate_in_forests, maximal_forest_matrix, ForestSummary, InForest};
pub use matrix::SquareMatrix;
pub use num_complex::Complex64;
pub use scc::{
    has_spanning_converging_tree, in_forest_dimension, rank_report, scc_decompose, RankReport,
    SccDecomposition,
};
pub use spectral::{
    eigenprojector_at_zero, eigenvalues, numerical_rank, spectral_report, Eigenprojector,
    SpectralReport, Tolerances,
};
