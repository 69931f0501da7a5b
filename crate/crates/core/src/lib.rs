//! Topology-augmented authorship attribution over frozen text embeddings.
//!
//! The pipeline reshapes a pooled embedding vector into a small point cloud,
//! summarises it with zero-dimensional persistent homology, appends the
//! resulting (birth, death, persistence) triples to the embedding and feeds the
//! concatenation into a linear-softmax head.
//!
//! Modules:
//! - [`persistence`]: Vietoris–Rips persistent homology in dimensions 0 and 1.
//! - [`features`]: reshape → persistence → flatten feature extraction.
//! - [`head`]: the trainable attribution head and its variants.
//! - [`metrics`]: confusion matrices, F1 scores and percentage gains.
//! - [`corpus`]: EMB1/CSV interchange and synthetic corpus generators.
//! - [`experiment`]: variant sweeps, result tables and PCA export.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod features;
pub mod head;
pub mod metrics;
pub mod persistence;
pub mod rng;

pub use error::{Error, Result};
