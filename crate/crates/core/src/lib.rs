//! Partitional clustering over Euclidean minimum spanning trees.
//!
//! Every algorithm here works on the same object: the MST of the complete
//! Euclidean distance graph. Removing `k − 1` of its edges yields a
//! `k`-partition, and the algorithms differ only in how they pick those
//! edges:
//!
//! * [`single_linkage_cut`] drops the heaviest edges;
//! * [`divisive_maximize`] greedily removes edges maximising a cluster
//!   validity [`Objective`] (ITM when the objective is the information
//!   criterion);
//! * [`agglomerative_maximize`], [`genie`] and [`genie_plus_ic`] start from
//!   singletons (or a warm start) and greedily consume edges;
//! * [`hemst`] and [`ctcehc`] are two further tree-based heuristics.
//!
//! Results are scored against reference labelings with the adjusted Rand
//! index ([`adjusted_rand`]), and [`exhaustive_max_ar`] /
//! [`local_search_max_ar`] bound what any edge-removal partition could
//! achieve. The [`benchmark`] module wires all of it into a reproducible
//! experiment runner.
//!
//! ```
//! use mstclust_core::{build_mst, genie, Dataset, GenieParams};
//!
//! let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
//! let mst = build_mst(&ds);
//! let p = genie(&mst, &GenieParams::new(0.3, 2).unwrap()).unwrap();
//! assert_eq!(p.labels(), &[1, 1, 1, 1, 1, 2]);
//! ```

pub mod agglomerative;
pub mod algorithm;
pub mod benchmark;
mod dataset;
mod disjoint_sets;
pub mod divisive;
mod error;
pub mod external;
pub mod extras;
pub mod greedy;
mod knn;
pub mod mst;
pub mod oracle;
mod partition;
pub mod validity;

#[cfg(test)]
mod tests_support;

pub use agglomerative::{
    agglomerative_maximize, genie, genie_plus_ic, genie_with_trace, GenieParams, GeniePlusIcParams,
};
pub use algorithm::Algorithm;
pub use dataset::{euclidean_distance, load_dataset, write_dataset, Dataset};
pub use disjoint_sets::DisjointSets;
pub use divisive::{divisive_maximize, single_linkage_cut};
pub use error::{Error, Result};
pub use greedy::{Evaluation, GreedyRun, GreedyStep};
pub use external::{adjusted_rand, best_ar_over_references, confusion_matrix, ConfusionMatrix};
pub use extras::{ctcehc, hemst};
pub use knn::{knn_table, NeighbourTable};
pub use mst::{
    build_mst, components_after_removal, tree_path_length, vertex_degrees, write_mst, Edge, EdgeId,
    Mst,
};
pub use oracle::{exhaustive_max_ar, local_search_max_ar, OracleResult, SearchConfig};
pub use partition::{load_labels, write_labels, ClusterSizes, Partition, NOISE};
pub use validity::{evaluate_objective, EvalContext, Objective};
