//! Ordered-subgraph Weisfeiler-Leman refinement and data-driven subgraph sampling.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the labeled graph type, atomic types, subgraph enumeration and file I/O.
//! * [`wl`] implements color refinement and folklore k-WL over a shared content-addressed
//!   [`wl::ColorTable`], plus the cross-graph [`wl::distinguish`] test.
//! * [`oswl`] implements k-ordered-subgraph WL and its vertex-subgraph variant.
//! * [`gadgets`] builds CFI gadgets, Furer grid graphs and backbone composites.
//! * [`imle`] covers MAP solving over subgraph encodings, perturb-and-MAP sampling,
//!   the I-MLE gradient estimator and selection policies.
//! * [`neural`] is a small float64 GNN stack with hand-written backward passes.
//! * [`harness`] ties everything into distinguishability matrices.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled (the default) and plain iterators otherwise.

pub mod error;
pub mod gadgets;
pub mod graph;
pub mod harness;
pub mod imle;
pub mod neural;
pub mod oswl;
pub mod par;
pub mod wl;

mod hashing;

pub use error::{Error, Result};
pub use graph::{build_graph, LabeledGraph};
