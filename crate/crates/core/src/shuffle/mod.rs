//! Cut processes, forward riffles and the inverse (shuffle-matrix)
//! description of a riffle sequence.

pub mod matrix;
pub mod perm;
pub mod piles;
pub mod prefix;
pub mod refine;
pub mod riffle;

pub use matrix::{
    graph_sort, sample_inverse_shuffled_perm, sample_shuffle_matrix, shuffle_graph, sort_lex, ShuffleGraph,
    ShuffleMatrix, SortedStrings,
};
pub use perm::Permutation;
pub use piles::{CutProcess, PileSizes, Rounding};
pub use prefix::{is_almost_mu_like, is_chi_good, lambda_of_prefix, prefix_interval};
pub use refine::{sample_component_sizes, sample_inverse_deck, sample_shuffle_graph};
pub use riffle::{riffle_once, shuffle_k};
