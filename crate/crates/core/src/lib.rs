//! Training-free point-cloud recognition through topology.
//!
//! A point cloud is turned into a fixed-length descriptor vector in three
//! stages: build a filtration over the cloud (alpha complex by default,
//! Vietoris-Rips for small or degenerate inputs), compute its persistent
//! homology, and vectorize the resulting diagram with an ATOL model fitted
//! on the database. Recognition is exact nearest-neighbor search over the
//! descriptor vectors.
//!
//! The crate is organized along that pipeline:
//!
//! * [`pointcloud`] — loading, synthesis, preprocessing, and perturbation
//!   of 3D point clouds
//! * [`filtration`] — Vietoris-Rips and alpha filtrations (incremental 3D
//!   Delaunay underneath)
//! * [`persistence`] — boundary-matrix reduction to birth-death pairs and
//!   the dimension-fallback diagram selection
//! * [`atol`] — quantizer-based diagram vectorization
//! * [`index`] — descriptor database: build, persist, query, and recall
//!   metrics

pub mod atol;
pub mod error;
pub mod filtration;
pub mod index;
pub mod persistence;
pub mod pointcloud;

pub use error::{Error, ErrorCategory, Result};
