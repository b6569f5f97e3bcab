//! Consensus selection and validity measures for ensembles of stochastic
//! graph clusterings.
//!
//! Stochastic clusterers give a different answer on every run. This crate
//! picks a representative answer by comparing the runs to each other
//! instead of scoring them in isolation: run an ensemble ([`clusterer`]),
//! weigh every pair of runs by how many vertex pairs they agree on
//! ([`metasim`]), group mutually similar runs by recursive min-cut
//! bisection ([`wgc`]), and return the most central member of the largest
//! group ([`validity::select_most_similar`]). Conventional indices
//! (modularity, Dunn, aligned error rate) live in [`validity`] and
//! [`align`] for head-to-head comparison, [`synth`] fabricates planted
//! inputs, and [`incremental`] handles data that arrives in phases.
//!
//! ```
//! use clusterval::clusterer::{run_ensemble_parallel, Algorithm, ClustererConfig};
//! use clusterval::metasim::build_meta_graph;
//! use clusterval::validity::select_most_similar;
//! use clusterval::wgc::{wgc_cluster, StopRule};
//! use clusterval::Graph;
//!
//! # fn main() -> clusterval::Result<()> {
//! // Two triangles joined by a bridge.
//! let graph = Graph::new(
//!     6,
//!     vec![
//!         (0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
//!         (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0),
//!         (2, 3, 1.0),
//!     ],
//! )?;
//! let config = ClustererConfig { k: 2, ..ClustererConfig::new(Algorithm::EmMixture) };
//! let ensemble = run_ensemble_parallel(&graph, &config, 10, 1)?;
//! let cc = build_meta_graph(&ensemble)?;
//! let mc = wgc_cluster(&cc.to_graph(), StopRule::TargetGroups(2))?;
//! let winner = select_most_similar(&cc, &mc)?;
//! let consensus = &ensemble.runs()[winner].clustering;
//! assert_eq!(consensus.cluster_count(), 2);
//! # Ok(())
//! # }
//! ```

pub mod align;
pub mod clusterer;
pub mod error;
pub mod graph;
pub mod incremental;
pub mod io;
pub mod metasim;
pub mod synth;
pub mod validity;
pub mod wgc;

pub use error::{Error, Result};
pub use graph::{Clustering, Graph};
